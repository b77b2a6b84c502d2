#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace bpsim {

using LinkId = std::int32_t;
using JunctionId = std::int32_t;
using PhaseId = std::int32_t;
using StateId = std::int32_t;

inline constexpr double kUnboundedCapacity =
    std::numeric_limits<double>::infinity();

struct Link {
  LinkId id = 0;
  double capacity = kUnboundedCapacity;  // vehicles; +inf means unbounded
  bool is_entry = false;                 // exogenous demand may arrive here
  bool is_exit = false;                  // vehicles leave the network here

  bool bounded() const { return std::isfinite(capacity); }
  friend bool operator==(const Link&, const Link&) = default;
};

struct Movement {
  LinkId from = 0;
  LinkId to = 0;
  auto operator<=>(const Movement&) const = default;
};

struct Phase {
  PhaseId id = 0;
  // Nonempty; every element is one of the owning junction's movements.
  std::vector<Movement> movements;

  bool contains(const Movement& m) const;
  friend bool operator==(const Phase&, const Phase&) = default;
};

struct TrafficState {
  StateId id = 0;
  std::string label;
  friend bool operator==(const TrafficState&, const TrafficState&) = default;
};

// Service rates in vehicles per slot. A movement outside the phase always
// rates 0; inside the phase, a table entry wins, default_saturation otherwise.
struct RateTable {
  struct Key {
    PhaseId phase = 0;
    Movement movement;
    StateId state = 0;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, double> entries;
  double default_saturation = 1.0;

  friend bool operator==(const RateTable&, const RateTable&) = default;
};

struct Junction {
  JunctionId id = 0;
  std::vector<Movement> movements;
  std::vector<Phase> phases;
  std::vector<TrafficState> states;
  RateTable rates;

  const Phase* find_phase(PhaseId p) const;
  bool has_state(StateId z) const;
  bool has_movement(const Movement& m) const;
  // Distinct upstream links in first-appearance order; the local approach
  // indexing the adaptive baseline keys its accounting on.
  std::vector<LinkId> approaches() const;

  friend bool operator==(const Junction&, const Junction&) = default;
};

struct Network {
  std::vector<Link> links;          // ids dense in [0,N): links[i].id == i
  std::vector<Junction> junctions;  // ids dense in [0,J): junctions[i].id == i

  int num_links() const { return static_cast<int>(links.size()); }
  int num_junctions() const { return static_cast<int>(junctions.size()); }

  friend bool operator==(const Network&, const Network&) = default;
};

struct Violation {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<Violation> warnings;

  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

// Structural checks: dense ids, movements endpoint-valid, phases nonempty and
// drawn from the junction's movement list, no movement shared between
// junctions, exit links have no outgoing movements, rate table keys resolve,
// capacities and rates nonnegative. Warnings for suspicious-but-legal shapes.
ValidationReport validate_network(const Network& net);

// Service rate for movement m at junction j under (phase p, state z).
// Zero when p does not contain m. Throws std::out_of_range on unknown ids.
double rate(const Network& net, JunctionId j, PhaseId p, const Movement& m,
            StateId z);

// Flat movement indexing over a validated network, plus per-link adjacency.
// Everything downstream of validation (simulator, analysis) works in terms of
// global movement ids.
struct NetIndex {
  struct MovementRef {
    Movement movement;
    JunctionId junction = 0;
    int local = 0;  // position in the junction's movement list
  };

  std::vector<MovementRef> movements;      // junction-major order
  std::vector<std::vector<int>> out_of;    // link -> outgoing movement ids
  std::vector<std::vector<int>> into;      // link -> incoming movement ids
  std::vector<std::vector<int>> by_junction;
  // by_phase[j][k] lists global movement ids of junctions[j].phases[k].
  std::vector<std::vector<std::vector<int>>> by_phase;
  std::vector<LinkId> entry_links;

  int num_movements() const { return static_cast<int>(movements.size()); }
  int find(const Movement& m) const;  // -1 when absent

  static NetIndex build(const Network& net);
};

}  // namespace bpsim
