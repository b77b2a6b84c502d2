#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "bpsim/arrivals.hpp"
#include "bpsim/baselines.hpp"
#include "bpsim/controller.hpp"
#include "bpsim/network.hpp"

namespace bpsim {

enum class ControllerKind { Backpressure, FixedTime, Scats };

std::string to_string(ControllerKind kind);
ControllerKind controller_kind_from(const std::string& name);

struct ControllerConfig {
  ControllerKind kind = ControllerKind::Backpressure;
  TiePolicy tie = TiePolicy::LowestPhaseId;
  // Fixed-time: explicit per-junction plans; junctions without one run an
  // equal split of default_phase_slots per phase.
  std::map<JunctionId, FixedTimePlan> plans;
  int default_phase_slots = 10;
  ScatsConfig scats;
};

// A fully resolved experiment: network, demand, routing, states, controller.
// Everything a run consumes; the canonical serialization (network inlined)
// is what the manifest hash covers.
struct Scenario {
  Network net;
  NetIndex index;
  std::string network_path;  // as written in the file

  std::int64_t horizon = 0;
  std::uint64_t seed = 0;
  double slot_seconds = 1.0;  // metadata only; rates are per slot
  double arrival_scale = 1.0;

  ControllerConfig controller;
  std::vector<ArrivalProcess> arrivals;   // at most one per entry link
  TurnRatios ratios;
  std::vector<StateProcess> state_procs;  // exactly one per junction

  std::string canonical;  // canonical JSON, network inlined
  std::uint64_t hash() const;

  // Offered demand per link: process mean times arrival_scale; zero
  // elsewhere. The direction vector for boundary computations.
  std::vector<double> mean_rates() const;

  Scenario scaled(double rho) const;  // arrival_scale multiplied by rho
};

Scenario load_scenario(const std::string& text,
                       const std::filesystem::path& base_dir);
Scenario load_scenario_file(const std::filesystem::path& path);

std::unique_ptr<Controller> make_controller(const Scenario& sc);
std::unique_ptr<Controller> make_controller(const Scenario& sc,
                                            const ControllerConfig& cfg);

}  // namespace bpsim
