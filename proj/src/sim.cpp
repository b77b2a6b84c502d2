#include "bpsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bpsim/errors.hpp"

namespace bpsim {

double discharge(double x, double R) {
  if (R <= 0.0 || x <= 0.0) return 0.0;
  // -R*expm1(-x/R) = R*(1 - e^{-x/R}) without cancellation for small x/R.
  const double d = -R * std::expm1(-x / R);
  return std::min(d, std::min(R, x));
}

std::vector<double> SimState::queues(const Scenario& sc) const {
  std::vector<double> q(sc.net.num_links(), 0.0);
  for (int g = 0; g < sc.index.num_movements(); ++g)
    q[sc.index.movements[g].movement.from] += shares[g];
  for (int a = 0; a < sc.net.num_links(); ++a) q[a] += terminal[a];
  return q;
}

SimState initial_state(const Scenario& sc) {
  SimState st;
  st.slot = 0;
  st.shares.assign(sc.index.num_movements(), 0.0);
  st.terminal.assign(sc.net.num_links(), 0.0);
  st.states.resize(sc.net.num_junctions());
  st.state_index.resize(sc.net.num_junctions());
  for (int j = 0; j < sc.net.num_junctions(); ++j) {
    const int zi = sc.state_procs[j].initial_index(sc.seed);
    st.state_index[j] = zi;
    st.states[j] = sc.net.junctions[j].states[zi].id;
  }
  return st;
}

namespace {

constexpr double kShareSlack = 1e-12;   // float dust tolerated in shares
constexpr double kCapSlack = 1e-9;      // capacity/conservation slack

// Vehicles joining link a pick an outgoing movement by the fixed ratios;
// with no outgoing movement they park in the terminal bucket.
void apportion(const Scenario& sc, SimState& st, LinkId a, double vehicles) {
  const auto& outs = sc.index.out_of[a];
  if (outs.empty()) {
    st.terminal[a] += vehicles;
    return;
  }
  for (int g : outs) st.shares[g] += vehicles * sc.ratios.fraction[g];
}

}  // namespace

SlotRecord step(const Scenario& sc, SimState& st,
                const std::vector<PhaseId>& decisions) {
  const Network& net = sc.net;
  const NetIndex& ix = sc.index;
  const int n = net.num_links();
  if (static_cast<int>(decisions.size()) != net.num_junctions())
    throw SimError("step: one decision per junction required");

  SlotRecord rec;
  rec.slot = st.slot;
  rec.decisions = decisions;
  rec.arrivals.assign(n, 0.0);
  rec.discharges.assign(ix.num_movements(), 0.0);

  // Exogenous arrivals: dischargeable this slot at their entry link. An
  // arrival at an exit link passes straight through the system.
  for (const auto& proc : sc.arrivals) {
    const double a = proc.sample(sc.seed, st.slot) * sc.arrival_scale;
    if (a == 0.0) continue;
    rec.arrivals[proc.link] = a;
    if (net.links[proc.link].is_exit)
      rec.exited += a;
    else
      apportion(sc, st, proc.link, a);
  }

  // Queue snapshot after arrivals: same-slot dischargeability of landed
  // vehicles, and the base for downstream residual capacity.
  std::vector<double> q_now(n, 0.0);
  for (int g = 0; g < ix.num_movements(); ++g)
    q_now[ix.movements[g].movement.from] += st.shares[g];
  for (int a = 0; a < n; ++a) q_now[a] += st.terminal[a];

  // Discharge active phases. Junction order matters only when two junctions
  // compete for one bounded link's residual space; id order is the contract.
  std::vector<double> inflow(n, 0.0);
  for (const auto& jn : net.junctions) {
    const PhaseId p = decisions[jn.id];
    const Phase* ph = jn.find_phase(p);
    if (ph == nullptr)
      throw SimError("step: junction " + std::to_string(jn.id) +
                     " got unknown phase " + std::to_string(p));
    const StateId z = st.states[jn.id];
    const auto phase_index = static_cast<std::size_t>(ph - jn.phases.data());
    const auto& globals = ix.by_phase[jn.id][phase_index];
    for (std::size_t k = 0; k < ph->movements.size(); ++k) {
      const Movement& m = ph->movements[k];
      const double R = rate(net, jn.id, p, m, z);
      if (R <= 0.0) continue;
      const int g = globals[k];
      const double share = st.shares[g];
      if (share <= 0.0) continue;
      double room = std::numeric_limits<double>::infinity();
      const Link& down = net.links[m.to];
      if (down.bounded() && !down.is_exit)
        room = std::max(0.0, down.capacity - (q_now[m.to] + inflow[m.to]));
      const double moved = std::min({discharge(share, R), share, room});
      if (moved <= 0.0) continue;
      st.shares[g] = share - moved;
      rec.discharges[g] = moved;
      if (down.is_exit)
        rec.exited += moved;
      else
        inflow[m.to] += moved;
    }
  }

  // Transfers land now and become dischargeable next slot (the slot rule:
  // only vehicles present at the start of a slot move through a junction).
  for (int a = 0; a < n; ++a)
    if (inflow[a] > 0.0) apportion(sc, st, a, inflow[a]);

  // Invariants. Shares may carry float dust below zero; anything larger is
  // a real accounting bug.
  for (int g = 0; g < ix.num_movements(); ++g) {
    if (st.shares[g] < 0.0) {
      if (st.shares[g] < -kShareSlack)
        throw SimError("step: negative movement share at slot " +
                       std::to_string(st.slot));
      st.shares[g] = 0.0;
    }
  }

  rec.queues.assign(n, 0.0);
  for (int g = 0; g < ix.num_movements(); ++g)
    rec.queues[ix.movements[g].movement.from] += st.shares[g];
  for (int a = 0; a < n; ++a) rec.queues[a] += st.terminal[a];

  for (int a = 0; a < n; ++a) {
    const Link& l = net.links[a];
    if (!l.bounded()) continue;
    if (rec.queues[a] > l.capacity + kCapSlack) {
      // Transfers respect residual capacity, so only this slot's exogenous
      // arrivals can push past the limit; anything else is a bug.
      if (rec.queues[a] > std::max(q_now[a], l.capacity) + kCapSlack)
        throw SimError("step: transfers overflowed link " + std::to_string(a) +
                       " at slot " + std::to_string(st.slot));
      rec.capacity_breach = true;
    }
  }

  double l2 = 0.0;
  for (int a = 0; a < n; ++a) l2 += rec.queues[a] * rec.queues[a];
  rec.lyapunov = l2;

  st.slot += 1;
  for (int j = 0; j < net.num_junctions(); ++j) {
    const int zi = sc.state_procs[j].next_index(sc.seed, st.slot,
                                                st.state_index[j]);
    st.state_index[j] = zi;
    st.states[j] = net.junctions[j].states[zi].id;
  }
  return rec;
}

Trace run(const Scenario& sc) {
  auto ctrl = make_controller(sc);
  return run(sc, *ctrl);
}

Trace run(const Scenario& sc, Controller& ctrl) {
  Trace tr;
  tr.scenario_hash = sc.hash();
  tr.num_links = sc.net.num_links();
  tr.num_junctions = sc.net.num_junctions();
  tr.slots.reserve(static_cast<std::size_t>(sc.horizon));

  SimState st = initial_state(sc);
  std::vector<double> q(sc.net.num_links(), 0.0);
  for (std::int64_t t = 0; t < sc.horizon; ++t) {
    const auto decisions = ctrl.decide(sc.net, q, st.states, t);
    SlotRecord rec = step(sc, st, decisions);
    for (double a : rec.arrivals) tr.total_arrivals += a;
    tr.total_exits += rec.exited;
    q = rec.queues;
    tr.slots.push_back(std::move(rec));
  }
  return tr;
}

bool Trace::any_breach() const {
  for (const auto& rec : slots)
    if (rec.capacity_breach) return true;
  return false;
}

}  // namespace bpsim
