#pragma once

#include <filesystem>
#include <string>

#include "bpsim/network.hpp"

namespace bpsim {

// Parses the documented JSON network format (docs/formats.md) and validates.
// Throws ConfigError with line/field context on malformed input, unknown
// keys, or validation violations.
Network load_network(const std::string& text);
Network load_network_file(const std::filesystem::path& path);

// Canonical serialization: sorted object keys, links and junctions by id,
// rate entries in table order. load_network(save_network(n)) == n for any
// valid network.
std::string save_network(const Network& net);

}  // namespace bpsim
