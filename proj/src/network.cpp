#include "bpsim/network.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bpsim {

bool Phase::contains(const Movement& m) const {
  return std::find(movements.begin(), movements.end(), m) != movements.end();
}

const Phase* Junction::find_phase(PhaseId p) const {
  for (const auto& ph : phases)
    if (ph.id == p) return &ph;
  return nullptr;
}

bool Junction::has_state(StateId z) const {
  for (const auto& s : states)
    if (s.id == z) return true;
  return false;
}

bool Junction::has_movement(const Movement& m) const {
  return std::find(movements.begin(), movements.end(), m) != movements.end();
}

std::vector<LinkId> Junction::approaches() const {
  std::vector<LinkId> out;
  for (const auto& m : movements)
    if (std::find(out.begin(), out.end(), m.from) == out.end())
      out.push_back(m.from);
  return out;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& v : violations)
    os << "error[" << v.code << "]: " << v.message << "\n";
  for (const auto& w : warnings)
    os << "warning[" << w.code << "]: " << w.message << "\n";
  return os.str();
}

namespace {

std::string mv(const Movement& m) {
  return "(" + std::to_string(m.from) + "->" + std::to_string(m.to) + ")";
}

}  // namespace

ValidationReport validate_network(const Network& net) {
  ValidationReport rep;
  auto err = [&](std::string code, std::string msg) {
    rep.violations.push_back({std::move(code), std::move(msg)});
  };
  auto warn = [&](std::string code, std::string msg) {
    rep.warnings.push_back({std::move(code), std::move(msg)});
  };

  const int n = net.num_links();
  for (int i = 0; i < n; ++i) {
    const Link& l = net.links[i];
    if (l.id != i)
      err("link-ids", "links must be dense and ordered; index " +
                          std::to_string(i) + " holds id " +
                          std::to_string(l.id));
    if (std::isnan(l.capacity) || l.capacity < 0.0)
      err("link-capacity", "link " + std::to_string(l.id) +
                               " has negative or NaN capacity");
  }

  auto link_ok = [&](LinkId a) { return a >= 0 && a < n; };

  for (int j = 0; j < net.num_junctions(); ++j) {
    const Junction& jn = net.junctions[j];
    const std::string jtag = "junction " + std::to_string(jn.id);
    if (jn.id != j)
      err("junction-ids", "junctions must be dense and ordered; index " +
                              std::to_string(j) + " holds id " +
                              std::to_string(jn.id));

    std::set<Movement> seen;
    for (const auto& m : jn.movements) {
      if (!link_ok(m.from) || !link_ok(m.to)) {
        err("movement-links", jtag + " movement " + mv(m) +
                                  " references an unknown link");
        continue;
      }
      if (!seen.insert(m).second)
        err("movement-dup", jtag + " lists movement " + mv(m) + " twice");
      if (net.links[m.to].is_entry)
        warn("entry-inflow", jtag + " movement " + mv(m) +
                                 " feeds an entry link");
    }

    if (jn.phases.empty())
      err("phases-empty", jtag + " has no phases");
    std::set<PhaseId> phase_ids;
    for (const auto& ph : jn.phases) {
      if (!phase_ids.insert(ph.id).second)
        err("phase-dup", jtag + " repeats phase id " + std::to_string(ph.id));
      if (ph.movements.empty())
        err("phase-empty", jtag + " phase " + std::to_string(ph.id) +
                               " allows no movements");
      for (const auto& m : ph.movements)
        if (!jn.has_movement(m))
          err("phase-movements", jtag + " phase " + std::to_string(ph.id) +
                                     " uses movement " + mv(m) +
                                     " the junction does not define");
    }

    if (jn.states.empty())
      err("states-empty", jtag + " has no traffic states");
    std::set<StateId> state_ids;
    for (const auto& s : jn.states)
      if (!state_ids.insert(s.id).second)
        err("state-dup", jtag + " repeats state id " + std::to_string(s.id));

    if (std::isnan(jn.rates.default_saturation) ||
        jn.rates.default_saturation < 0.0)
      err("rate-default", jtag + " has a negative default saturation");
    for (const auto& [key, r] : jn.rates.entries) {
      if (std::isnan(r) || r < 0.0 || !std::isfinite(r))
        err("rate-value", jtag + " rate for movement " + mv(key.movement) +
                              " is negative or non-finite");
      const Phase* ph = jn.find_phase(key.phase);
      if (ph == nullptr) {
        err("rate-phase", jtag + " rate entry names unknown phase " +
                              std::to_string(key.phase));
        continue;
      }
      if (!jn.has_movement(key.movement))
        err("rate-movement", jtag + " rate entry names movement " +
                                 mv(key.movement) +
                                 " the junction does not define");
      else if (!ph->contains(key.movement))
        err("rate-off-phase", jtag + " rate entry pairs movement " +
                                  mv(key.movement) + " with phase " +
                                  std::to_string(key.phase) +
                                  " that does not serve it");
      if (!state_ids.count(key.state))
        err("rate-state", jtag + " rate entry names unknown state " +
                              std::to_string(key.state));
    }

    // Movements no phase ever serves can never discharge.
    for (const auto& m : jn.movements) {
      bool served = false;
      for (const auto& ph : jn.phases)
        if (ph.contains(m)) served = true;
      if (!served)
        warn("movement-unserved", jtag + " movement " + mv(m) +
                                      " appears in no phase");
    }
  }

  // A movement belongs to exactly one junction: its upstream link's signal.
  std::map<Movement, JunctionId> owner;
  for (const auto& jn : net.junctions)
    for (const auto& m : jn.movements) {
      auto [it, fresh] = owner.try_emplace(m, jn.id);
      if (!fresh && it->second != jn.id)
        err("movement-shared", "movement " + mv(m) +
                                   " is controlled by junctions " +
                                   std::to_string(it->second) + " and " +
                                   std::to_string(jn.id));
    }

  // Per-link outgoing movement census for the exit/dead-end checks.
  std::vector<int> outdeg(n, 0), indeg(n, 0);
  for (const auto& [m, _] : owner) {
    if (m.from >= 0 && m.from < n) ++outdeg[m.from];
    if (m.to >= 0 && m.to < n) ++indeg[m.to];
  }
  for (int i = 0; i < n; ++i) {
    const Link& l = net.links[i];
    if (l.is_exit && outdeg[i] > 0)
      err("exit-outflow", "exit link " + std::to_string(i) +
                              " has outgoing movements");
    if (!l.is_exit && outdeg[i] == 0 && (indeg[i] > 0 || l.is_entry))
      warn("dead-end", "link " + std::to_string(i) +
                           " receives traffic but has no outgoing movements "
                           "and is not an exit");
  }

  return rep;
}

double rate(const Network& net, JunctionId j, PhaseId p, const Movement& m,
            StateId z) {
  if (j < 0 || j >= net.num_junctions())
    throw std::out_of_range("rate: unknown junction " + std::to_string(j));
  const Junction& jn = net.junctions[j];
  const Phase* ph = jn.find_phase(p);
  if (ph == nullptr)
    throw std::out_of_range("rate: junction " + std::to_string(j) +
                            " has no phase " + std::to_string(p));
  if (!jn.has_state(z))
    throw std::out_of_range("rate: junction " + std::to_string(j) +
                            " has no state " + std::to_string(z));
  if (!jn.has_movement(m))
    throw std::out_of_range("rate: junction " + std::to_string(j) +
                            " has no movement " + mv(m));
  if (!ph->contains(m)) return 0.0;
  auto it = jn.rates.entries.find(RateTable::Key{p, m, z});
  if (it != jn.rates.entries.end()) return it->second;
  return jn.rates.default_saturation;
}

int NetIndex::find(const Movement& m) const {
  for (int g = 0; g < num_movements(); ++g)
    if (movements[g].movement == m) return g;
  return -1;
}

NetIndex NetIndex::build(const Network& net) {
  NetIndex ix;
  const int n = net.num_links();
  ix.out_of.assign(n, {});
  ix.into.assign(n, {});
  ix.by_junction.assign(net.num_junctions(), {});
  ix.by_phase.assign(net.num_junctions(), {});

  for (const auto& jn : net.junctions) {
    for (int k = 0; k < static_cast<int>(jn.movements.size()); ++k) {
      const Movement& m = jn.movements[k];
      const int g = ix.num_movements();
      ix.movements.push_back({m, jn.id, k});
      ix.out_of[m.from].push_back(g);
      ix.into[m.to].push_back(g);
      ix.by_junction[jn.id].push_back(g);
    }
    auto& phases = ix.by_phase[jn.id];
    phases.resize(jn.phases.size());
    for (std::size_t pi = 0; pi < jn.phases.size(); ++pi)
      for (const auto& m : jn.phases[pi].movements)
        phases[pi].push_back(ix.find(m));
  }

  for (const auto& l : net.links)
    if (l.is_entry) ix.entry_links.push_back(l.id);
  return ix;
}

}  // namespace bpsim
