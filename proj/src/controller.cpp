#include "bpsim/controller.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include "bpsim/rng.hpp"

namespace bpsim {

double movement_weight(double q_from, std::optional<double> q_to) {
  return q_from - q_to.value_or(0.0);
}

double phase_pressure(const Network& net, const Junction& jn,
                      const LocalObservation& obs, PhaseId p) {
  const Phase* ph = jn.find_phase(p);
  if (ph == nullptr)
    throw std::out_of_range("phase_pressure: junction " +
                            std::to_string(jn.id) + " has no phase " +
                            std::to_string(p));
  double s = 0.0;
  for (const auto& m : ph->movements) {
    const double xi = rate(net, jn.id, p, m, obs.state);
    if (xi == 0.0) continue;
    std::optional<double> down;
    if (!net.links[m.to].is_exit) down = obs.queues[m.to];
    s += movement_weight(obs.queues[m.from], down) * xi;
  }
  return s;
}

PhaseId select_phase(const Network& net, const Junction& jn,
                     const LocalObservation& obs, TiePolicy tie,
                     std::optional<PhaseId> prev, std::uint64_t seed) {
  if (jn.phases.empty())
    throw std::out_of_range("select_phase: junction " +
                            std::to_string(jn.id) + " has no phases");

  double best = -std::numeric_limits<double>::infinity();
  std::vector<PhaseId> ties;
  for (const auto& ph : jn.phases) {
    const double s = phase_pressure(net, jn, obs, ph.id);
    if (s > best) {
      best = s;
      ties.clear();
      ties.push_back(ph.id);
    } else if (s == best) {
      ties.push_back(ph.id);
    }
  }

  if (ties.size() == 1) return ties.front();
  switch (tie) {
    case TiePolicy::LowestPhaseId:
      return *std::min_element(ties.begin(), ties.end());
    case TiePolicy::KeepPrevious:
      if (prev)
        for (PhaseId p : ties)
          if (p == *prev) return p;
      return *std::min_element(ties.begin(), ties.end());
    case TiePolicy::SeededRandom: {
      // Any deterministic function of the inputs qualifies; fold the tie set
      // and the junction into the hash so different junctions break ties
      // differently under the same seed.
      std::uint64_t h = mix(seed, 0x7165u, static_cast<std::uint64_t>(jn.id));
      for (PhaseId p : ties)
        h = splitmix64(h ^ static_cast<std::uint64_t>(p));
      return ties[h % ties.size()];
    }
  }
  return ties.front();
}

std::vector<PhaseId> decide_all(const Network& net,
                                std::span<const double> queues,
                                std::span<const StateId> states, TiePolicy tie,
                                std::span<const std::optional<PhaseId>> prev,
                                std::uint64_t seed) {
  std::vector<PhaseId> out;
  out.reserve(net.junctions.size());
  for (const auto& jn : net.junctions) {
    LocalObservation obs{jn.id, queues, states[jn.id]};
    std::optional<PhaseId> pv;
    if (static_cast<std::size_t>(jn.id) < prev.size()) pv = prev[jn.id];
    out.push_back(select_phase(net, jn, obs, tie, pv, seed));
  }
  return out;
}

std::vector<PhaseId> BackpressureController::decide(
    const Network& net, std::span<const double> queues,
    std::span<const StateId> states, std::int64_t) {
  prev_.resize(net.junctions.size());
  auto out = decide_all(net, queues, states, tie_, prev_, seed_);
  for (std::size_t i = 0; i < out.size(); ++i) prev_[i] = out[i];
  return out;
}

}  // namespace bpsim
