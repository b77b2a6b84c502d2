#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "bpsim/controller.hpp"
#include "bpsim/network.hpp"

namespace bpsim {

// ---------------------------------------------------------------------------
// Fixed-time control: a rigid cyclic plan, immune to demand.

struct FixedTimePlan {
  // Ordered (phase id, duration in slots) slices; durations >= 1.
  std::vector<std::pair<PhaseId, int>> slices;

  int cycle_length() const;
};

// Phase whose cumulative-duration window contains slot mod cycle.
PhaseId fixed_time_decide(const FixedTimePlan& plan, std::int64_t slot);

class FixedTimeController final : public Controller {
 public:
  // One plan per junction, indexed by junction id.
  explicit FixedTimeController(std::vector<FixedTimePlan> plans)
      : plans_(std::move(plans)) {}

  std::vector<PhaseId> decide(const Network& net,
                              std::span<const double> queues,
                              std::span<const StateId> states,
                              std::int64_t slot) override;

 private:
  std::vector<FixedTimePlan> plans_;
};

// Equal time for every phase, default_slots each, in listed order.
FixedTimePlan equal_split_plan(const Junction& jn, int default_slots);

// ---------------------------------------------------------------------------
// SCATS-like control: cycle-by-cycle split-plan voting that equalizes the
// degree of saturation across approaches, plus additive cycle adaptation
// toward a target DS. An approximation, not a replication; every parameter
// here is scenario-overridable and all comparisons against it are orderings.

struct DegreeOfSaturation {
  double value = 0.0;
};

// used/total; 0 when total is 0. used > total is a contract violation.
DegreeOfSaturation degree_of_saturation(double used_green, double total_green);

struct ScatsConfig {
  int cycle_min = 40;   // slots
  int cycle_max = 120;  // slots
  double target_ds = 0.9;
  double adapt_step = 0.05;  // cycle-length change per boundary, fractional
  // Optional explicit split-plan library per junction: fractions per phase in
  // junction phase order, each plan summing to 1. Junctions without an entry
  // get default_split_library().
  std::map<JunctionId, std::vector<std::vector<double>>> libraries;
};

// Equal split plus one plan boosting each phase to share 2/(k+1): 5 plans for
// a 4-phase junction.
std::vector<std::vector<double>> default_split_library(int num_phases);

// What the voting logic sees each slot, all local to one junction:
// queue per approach and, per (phase, approach), the saturation service the
// phase would offer that approach under the current traffic state.
struct ScatsObs {
  std::vector<double> queue;
  std::vector<std::vector<double>> saturation;  // [phase index][approach]
};

struct ScatsJunctionState {
  int cycle_length = 0;
  int plan = 0;  // index into library
  int slot_in_cycle = 0;
  std::vector<int> greens;           // per phase, integer slots, current cycle
  std::vector<double> used_green;    // per approach, accumulated this cycle
  std::vector<double> total_green;   // per approach
  std::vector<std::vector<double>> library;
};

ScatsJunctionState scats_init(const ScatsConfig& cfg, const Junction& jn);

// One slot of SCATS-like operation. Within a cycle, follows the junction's
// phase sequence with greens = split fractions x cycle (largest remainder,
// each phase at least one slot). At a cycle boundary, adapts the cycle length
// toward target_ds and votes for the plan minimizing the max deviation of
// predicted per-approach DS from their mean.
std::pair<PhaseId, ScatsJunctionState> scats_decide(const ScatsConfig& cfg,
                                                    const Junction& jn,
                                                    ScatsJunctionState st,
                                                    const ScatsObs& obs,
                                                    std::int64_t slot);

class ScatsController final : public Controller {
 public:
  ScatsController(ScatsConfig cfg, const Network& net);

  void reset() override;
  std::vector<PhaseId> decide(const Network& net,
                              std::span<const double> queues,
                              std::span<const StateId> states,
                              std::int64_t slot) override;

 private:
  ScatsConfig cfg_;
  std::vector<ScatsJunctionState> states_;
};

}  // namespace bpsim
