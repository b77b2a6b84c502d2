#pragma once

#include <cstdint>
#include <vector>

#include "bpsim/scenario.hpp"

namespace bpsim {

// One slot of passing traffic through a movement: smooth saturation toward
// the per-slot maximum R. Returns 0 when R = 0; always <= min(R, x).
double discharge(double x, double R);

// Live run state. Queues live as per-movement shares: Q_a is the sum of
// shares over a's outgoing movements plus the terminal bucket (vehicles on a
// dead-end link nothing can serve). Exit links hold nothing.
struct SimState {
  std::int64_t slot = 0;
  std::vector<double> shares;     // per global movement id
  std::vector<double> terminal;   // per link
  std::vector<StateId> states;    // per junction, the current z_i
  std::vector<int> state_index;   // per junction, index into its state list

  std::vector<double> queues(const Scenario& sc) const;
};

struct SlotRecord {
  std::int64_t slot = 0;
  std::vector<PhaseId> decisions;   // per junction
  std::vector<double> arrivals;     // per link, exogenous vehicles landed
  std::vector<double> discharges;   // per global movement id
  std::vector<double> queues;       // per link, end of slot
  double lyapunov = 0.0;            // sum of squared end-of-slot queues
  double exited = 0.0;              // vehicles that left the network
  bool capacity_breach = false;     // some end-of-slot queue exceeds capacity
};

struct Trace {
  std::uint64_t scenario_hash = 0;
  int num_links = 0;
  int num_junctions = 0;
  std::vector<SlotRecord> slots;
  double total_arrivals = 0.0;
  double total_exits = 0.0;

  bool any_breach() const;
};

SimState initial_state(const Scenario& sc);

// Advance one slot: land exogenous arrivals (dischargeable immediately at
// their entry link), discharge each junction's active phase with downstream
// residual-capacity caps, then land transfers (dischargeable next slot).
// Throws SimError if a conservation or capacity invariant breaks.
SlotRecord step(const Scenario& sc, SimState& st,
                const std::vector<PhaseId>& decisions);

Trace run(const Scenario& sc);                    // scenario's own controller
Trace run(const Scenario& sc, Controller& ctrl);  // override

}  // namespace bpsim
