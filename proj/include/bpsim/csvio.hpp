#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "bpsim/analysis.hpp"
#include "bpsim/sim.hpp"

namespace bpsim {

// Shortest decimal that round-trips the exact double; keeps artifacts
// byte-stable across runs and machines.
std::string format_double(double v);

// Write via a sibling temp file plus rename so readers never observe a
// partial artifact.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

std::string trace_csv(const Trace& tr);
std::string stability_csv(const StabilityReport& rep);
std::string drift_csv(const LyapunovSeries& series);

std::string sweep_csv(
    const std::vector<std::pair<std::string, SweepResult>>& runs);

struct MetricRow {
  std::string controller;
  std::string metric;
  double value = 0.0;
};

std::string metrics_csv(const std::vector<MetricRow>& rows);

}  // namespace bpsim
