#include "bpsim/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "bpsim/errors.hpp"

namespace bpsim {

int FixedTimePlan::cycle_length() const {
  int c = 0;
  for (const auto& [p, d] : slices) c += d;
  return c;
}

PhaseId fixed_time_decide(const FixedTimePlan& plan, std::int64_t slot) {
  const int cycle = plan.cycle_length();
  if (cycle <= 0) throw ConfigError("fixed-time plan has no duration");
  auto pos = static_cast<int>(((slot % cycle) + cycle) % cycle);
  for (const auto& [p, d] : plan.slices) {
    if (pos < d) return p;
    pos -= d;
  }
  return plan.slices.back().first;  // unreachable for a valid plan
}

std::vector<PhaseId> FixedTimeController::decide(const Network& net,
                                                 std::span<const double>,
                                                 std::span<const StateId>,
                                                 std::int64_t slot) {
  std::vector<PhaseId> out;
  out.reserve(net.junctions.size());
  for (const auto& jn : net.junctions)
    out.push_back(fixed_time_decide(plans_.at(jn.id), slot));
  return out;
}

FixedTimePlan equal_split_plan(const Junction& jn, int default_slots) {
  FixedTimePlan plan;
  for (const auto& ph : jn.phases) plan.slices.emplace_back(ph.id, default_slots);
  return plan;
}

DegreeOfSaturation degree_of_saturation(double used_green,
                                        double total_green) {
  if (used_green < 0.0 || total_green < 0.0 || used_green > total_green)
    throw ConfigError("degree_of_saturation: need 0 <= used <= total");
  if (total_green == 0.0) return {0.0};
  return {used_green / total_green};
}

std::vector<std::vector<double>> default_split_library(int num_phases) {
  if (num_phases <= 0)
    throw ConfigError("split library needs at least one phase");
  const int k = num_phases;
  std::vector<std::vector<double>> lib;
  lib.emplace_back(k, 1.0 / k);
  if (k == 1) return lib;
  // One plan per phase, boosting it to share 2/(k+1); the rest split evenly.
  for (int boosted = 0; boosted < k; ++boosted) {
    std::vector<double> plan(k, 1.0 / (k + 1));
    plan[boosted] = 2.0 / (k + 1);
    lib.push_back(std::move(plan));
  }
  return lib;
}

namespace {

// Integer greens from fractions: largest remainder, then every phase gets at
// least one slot (taken from the largest allocation).
std::vector<int> allocate_greens(const std::vector<double>& fractions,
                                 int cycle) {
  const int k = static_cast<int>(fractions.size());
  std::vector<int> greens(k, 0);
  std::vector<std::pair<double, int>> rem(k);
  int used = 0;
  for (int i = 0; i < k; ++i) {
    const double target = fractions[i] * cycle;
    greens[i] = static_cast<int>(std::floor(target));
    used += greens[i];
    rem[i] = {target - greens[i], i};
  }
  std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int i = 0; used < cycle; ++i, ++used) greens[rem[i % k].second] += 1;
  for (int i = 0; i < k; ++i) {
    while (greens[i] == 0) {
      auto mx = std::max_element(greens.begin(), greens.end());
      if (*mx <= 1) break;  // cycle < phases; validated away at init
      *mx -= 1;
      greens[i] += 1;
    }
  }
  return greens;
}

int clamp_cycle(const ScatsConfig& cfg, int cycle) {
  return std::clamp(cycle, cfg.cycle_min, cfg.cycle_max);
}

// Vote criterion: minimize the max deviation of predicted per-approach DS
// from the plan's mean DS. Demand is proxied by the green actually used this
// cycle; which phases serve which approach comes from the saturation matrix.
int vote_plan(const std::vector<std::vector<double>>& library, int cycle,
              const ScatsObs& obs, const std::vector<double>& demand) {
  const int num_approaches = static_cast<int>(demand.size());
  int best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (int s = 0; s < static_cast<int>(library.size()); ++s) {
    const auto& plan = library[s];
    std::vector<double> ds(num_approaches, 0.0);
    for (int a = 0; a < num_approaches; ++a) {
      double green = 0.0;
      for (int p = 0; p < static_cast<int>(plan.size()); ++p)
        if (obs.saturation[p][a] > 0.0) green += plan[p] * cycle;
      if (green > 0.0)
        ds[a] = std::min(1.0, demand[a] / green);
      else
        ds[a] = demand[a] > 0.0 ? 1.0 : 0.0;
    }
    const double mean =
        std::accumulate(ds.begin(), ds.end(), 0.0) / num_approaches;
    double score = 0.0;
    for (double v : ds) score = std::max(score, std::abs(v - mean));
    if (score < best_score) {
      best_score = score;
      best = s;
    }
  }
  return best;
}

}  // namespace

ScatsJunctionState scats_init(const ScatsConfig& cfg, const Junction& jn) {
  if (cfg.cycle_min < static_cast<int>(jn.phases.size()))
    throw ConfigError("scats: cycle_min shorter than the phase sequence of junction " +
                      std::to_string(jn.id));
  if (cfg.cycle_min <= 0 || cfg.cycle_max < cfg.cycle_min)
    throw ConfigError("scats: need 0 < cycle_min <= cycle_max");

  ScatsJunctionState st;
  auto it = cfg.libraries.find(jn.id);
  if (it != cfg.libraries.end()) {
    st.library = it->second;
    for (const auto& plan : st.library) {
      if (plan.size() != jn.phases.size())
        throw ConfigError("scats: split plan length does not match phases of junction " +
                          std::to_string(jn.id));
      double sum = 0.0;
      for (double f : plan) {
        if (f < 0.0) throw ConfigError("scats: negative split fraction");
        sum += f;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("scats: split fractions must sum to 1");
    }
    if (st.library.empty()) throw ConfigError("scats: empty plan library");
  } else {
    st.library = default_split_library(static_cast<int>(jn.phases.size()));
  }

  st.cycle_length = cfg.cycle_min;
  st.plan = 0;
  st.slot_in_cycle = 0;
  st.greens = allocate_greens(st.library[0], st.cycle_length);
  const int num_approaches = static_cast<int>(jn.approaches().size());
  st.used_green.assign(num_approaches, 0.0);
  st.total_green.assign(num_approaches, 0.0);
  return st;
}

std::pair<PhaseId, ScatsJunctionState> scats_decide(const ScatsConfig& cfg,
                                                    const Junction& jn,
                                                    ScatsJunctionState st,
                                                    const ScatsObs& obs,
                                                    std::int64_t) {
  const int k = static_cast<int>(jn.phases.size());
  if (obs.queue.size() != st.used_green.size() ||
      static_cast<int>(obs.saturation.size()) != k)
    throw ConfigError("scats: observation shape does not match the junction");

  // Active phase: walk the green windows.
  int phase_index = k - 1;
  int pos = st.slot_in_cycle;
  for (int p = 0; p < k; ++p) {
    if (pos < st.greens[p]) {
      phase_index = p;
      break;
    }
    pos -= st.greens[p];
  }
  const PhaseId decision = jn.phases[phase_index].id;

  // A green slot counts as used when the approach held at least one
  // saturation quantum of traffic, i.e. it could have saturated the slot.
  for (std::size_t a = 0; a < st.used_green.size(); ++a) {
    const double sat = obs.saturation[phase_index][a];
    if (sat <= 0.0) continue;
    st.total_green[a] += 1.0;
    if (obs.queue[a] >= sat) st.used_green[a] += 1.0;
  }

  st.slot_in_cycle += 1;
  if (st.slot_in_cycle >= st.cycle_length) {
    // Cycle boundary: adapt the cycle toward the target DS, then vote.
    double max_ds = 0.0;
    for (std::size_t a = 0; a < st.used_green.size(); ++a)
      max_ds = std::max(
          max_ds, degree_of_saturation(st.used_green[a], st.total_green[a]).value);
    const int delta =
        std::max(1, static_cast<int>(std::lround(cfg.adapt_step * st.cycle_length)));
    if (max_ds > cfg.target_ds)
      st.cycle_length = clamp_cycle(cfg, st.cycle_length + delta);
    else if (max_ds < cfg.target_ds)
      st.cycle_length = clamp_cycle(cfg, st.cycle_length - delta);

    st.plan = vote_plan(st.library, st.cycle_length, obs, st.used_green);
    st.greens = allocate_greens(st.library[st.plan], st.cycle_length);
    std::fill(st.used_green.begin(), st.used_green.end(), 0.0);
    std::fill(st.total_green.begin(), st.total_green.end(), 0.0);
    st.slot_in_cycle = 0;
  }

  return {decision, std::move(st)};
}

ScatsController::ScatsController(ScatsConfig cfg, const Network& net)
    : cfg_(std::move(cfg)) {
  for (const auto& jn : net.junctions) states_.push_back(scats_init(cfg_, jn));
}

void ScatsController::reset() { states_.clear(); }

std::vector<PhaseId> ScatsController::decide(const Network& net,
                                             std::span<const double> queues,
                                             std::span<const StateId> states,
                                             std::int64_t slot) {
  if (states_.empty())
    for (const auto& jn : net.junctions) states_.push_back(scats_init(cfg_, jn));

  std::vector<PhaseId> out;
  out.reserve(net.junctions.size());
  for (const auto& jn : net.junctions) {
    const auto approaches = jn.approaches();
    ScatsObs obs;
    obs.queue.reserve(approaches.size());
    for (LinkId a : approaches) obs.queue.push_back(queues[a]);
    obs.saturation.assign(jn.phases.size(),
                          std::vector<double>(approaches.size(), 0.0));
    for (std::size_t p = 0; p < jn.phases.size(); ++p) {
      const Phase& ph = jn.phases[p];
      for (const auto& m : ph.movements) {
        const double r = rate(net, jn.id, ph.id, m, states[jn.id]);
        if (r <= 0.0) continue;
        const auto it = std::find(approaches.begin(), approaches.end(), m.from);
        obs.saturation[p][it - approaches.begin()] += r;
      }
    }
    auto [phase, next] = scats_decide(cfg_, jn, std::move(states_[jn.id]), obs, slot);
    states_[jn.id] = std::move(next);
    out.push_back(phase);
  }
  return out;
}

}  // namespace bpsim
