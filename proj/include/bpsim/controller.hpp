#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bpsim/network.hpp"

namespace bpsim {

enum class TiePolicy {
  LowestPhaseId,  // reproducible default
  KeepPrevious,   // stick with the previous phase when it ties the max
  SeededRandom,   // deterministic hash over the tie set
};

// Everything a junction's controller may look at: its own state and the
// queues of links it touches. queues is indexed by LinkId and only entries
// for adjacent links are read.
struct LocalObservation {
  JunctionId junction = 0;
  std::span<const double> queues;
  StateId state = 0;
};

// Queue differential. An exit downstream (nullopt) counts as queue 0:
// discharged vehicles vanish, so exits always pull.
double movement_weight(double q_from, std::optional<double> q_to);

// Weighted service sum over the phase's movements under the current state.
double phase_pressure(const Network& net, const Junction& jn,
                      const LocalObservation& obs, PhaseId p);

// Max-pressure phase choice for one junction. prev only matters under
// KeepPrevious; seed only under SeededRandom.
PhaseId select_phase(const Network& net, const Junction& jn,
                     const LocalObservation& obs, TiePolicy tie,
                     std::optional<PhaseId> prev = std::nullopt,
                     std::uint64_t seed = 0);

// One decision per junction, each from purely local observation.
std::vector<PhaseId> decide_all(const Network& net,
                                std::span<const double> queues,
                                std::span<const StateId> states, TiePolicy tie,
                                std::span<const std::optional<PhaseId>> prev = {},
                                std::uint64_t seed = 0);

// Slot-synchronous controller interface the simulator drives. decide() sees
// beginning-of-slot queues and the current per-junction states.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void reset() {}
  virtual std::vector<PhaseId> decide(const Network& net,
                                      std::span<const double> queues,
                                      std::span<const StateId> states,
                                      std::int64_t slot) = 0;
};

class BackpressureController final : public Controller {
 public:
  explicit BackpressureController(TiePolicy tie = TiePolicy::LowestPhaseId,
                                  std::uint64_t seed = 0)
      : tie_(tie), seed_(seed) {}

  void reset() override { prev_.clear(); }
  std::vector<PhaseId> decide(const Network& net,
                              std::span<const double> queues,
                              std::span<const StateId> states,
                              std::int64_t slot) override;

 private:
  TiePolicy tie_;
  std::uint64_t seed_;
  std::vector<std::optional<PhaseId>> prev_;
};

}  // namespace bpsim
