// Acceptance gate: eight checks, one printed line each, exit code = number
// of failures. Tolerances are pinned here, not configurable.

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bpsim/analysis.hpp"
#include "bpsim/cli.hpp"
#include "bpsim/controller.hpp"
#include "bpsim/sim.hpp"
#include "support.hpp"

using namespace bpsim;
namespace bt = bpsim::testing;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

int g_failures = 0;

void report(int number, const std::string& label, bool pass,
            const std::string& detail) {
  std::printf("criterion %d (%s): %s  [%s]\n", number, label.c_str(),
              pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

// --- 1: select_phase against the exhaustive argmax ------------------------

void criterion_argmax() {
  const auto t0 = clock_type::now();
  std::mt19937_64 rng(0x1ea1u);
  int checked = 0;
  bool ok = true;
  for (int i = 0; i < 500 && ok; ++i) {
    const auto jc = bt::random_junction_case(rng);
    const Junction& jn = jc.net.junctions.front();
    const LocalObservation obs{0, jc.queues, jc.state};

    const auto oracle = bt::oracle_pressures(jc);
    double oracle_max = oracle.front();
    for (double s : oracle) oracle_max = std::max(oracle_max, s);
    const auto oracle_ties = bt::oracle_tie_set(jc);

    double impl_max = -std::numeric_limits<double>::infinity();
    for (const auto& ph : jn.phases)
      impl_max = std::max(impl_max, phase_pressure(jc.net, jn, obs, ph.id));
    std::set<PhaseId> impl_ties;
    for (const auto& ph : jn.phases)
      if (phase_pressure(jc.net, jn, obs, ph.id) == impl_max)
        impl_ties.insert(ph.id);

    const PhaseId chosen =
        select_phase(jc.net, jn, obs, TiePolicy::LowestPhaseId);
    ok = phase_pressure(jc.net, jn, obs, chosen) == oracle_max &&
         impl_ties == oracle_ties && oracle_ties.count(chosen) == 1;
    ++checked;
  }
  const double dt = seconds_since(t0);
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d junctions, %.2fs", checked, dt);
  report(1, "max-pressure argmax equals exhaustive oracle", ok && dt < 5.0,
         buf);
}

// --- 2: the passing function against direct evaluation --------------------

void criterion_discharge() {
  double worst = 0.0;
  bool bounds_ok = true;
  int points = 0;
  for (int ri = 0; ri < 100; ++ri) {
    const double R = std::pow(10.0, -3.0 + 5.0 * ri / 99.0);
    for (int xi = 0; xi < 100; ++xi) {
      const double ratio = std::pow(10.0, -6.0 + 7.5 * xi / 99.0);
      const double x = ratio * R;
      const double d = discharge(x, R);
      const long double oracle =
          static_cast<long double>(R) *
          (1.0L - std::exp(-static_cast<long double>(x) /
                           static_cast<long double>(R)));
      const double rel = std::abs(
          static_cast<double>((static_cast<long double>(d) - oracle) / oracle));
      worst = std::max(worst, rel);
      bounds_ok = bounds_ok && d <= std::min(R, x) && d >= 0.0;
      ++points;
    }
  }
  const bool edge_ok = discharge(7.0, 0.0) == 0.0 &&
                       discharge(7.0, -1.0) == 0.0 &&
                       discharge(0.0, 3.0) == 0.0 &&
                       discharge(7.0, 1e-300) <= 1e-300;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d grid points, max rel err %.3g", points,
                worst);
  report(2, "discharge matches R(1-exp(-x/R)) to 1e-12",
         worst <= 1e-12 && bounds_ok && edge_ok, buf);
}

// --- 3: conservation on a 14-junction random network ----------------------

void criterion_conservation() {
  const Scenario sc = bt::chain_scenario(14, 0xc053u, 10000);
  const Trace tr = run(sc);

  double worst_slot = 0.0;
  double prev_total = 0.0;
  double cum_in = 0.0, cum_out = 0.0;
  double total = 0.0;
  for (const auto& rec : tr.slots) {
    double now = 0.0, in = 0.0;
    for (double q : rec.queues) now += q;
    for (double a : rec.arrivals) in += a;
    worst_slot =
        std::max(worst_slot, std::abs((now - prev_total) - (in - rec.exited)));
    cum_in += in;
    cum_out += rec.exited;
    prev_total = now;
    total = now;
  }
  const double cum_err = std::abs(total - (cum_in - cum_out));
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "%d junctions, %zu slots, worst slot err %.2e, cumulative %.2e",
                sc.net.num_junctions(), tr.slots.size(), worst_slot, cum_err);
  report(3, "vehicle conservation within 1e-6",
         worst_slot <= 1e-6 && cum_err <= 1e-6 && tr.slots.size() == 10000,
         buf);
}

// --- 4: capacity LP against hand grid oracles -----------------------------

void criterion_region_oracle() {
  const Network conflict = bt::load_data_network("conflict2.json");
  const NetIndex cix = NetIndex::build(conflict);
  const Network tandem = bt::load_data_network("tandem2.json");
  const NetIndex tix = NetIndex::build(tandem);
  StateDistribution pi1, pi2;
  pi1.per_junction = {{1.0}};
  pi2.per_junction = {{1.0}, {1.0}};

  std::mt19937_64 rng(0x9a2du);
  std::uniform_real_distribution<double> u(0.0, 1.3);
  int disagreements = 0, checked = 0, skipped = 0;

  for (int i = 0; i < 200; ++i) {
    const double a = u(rng), b = u(rng);
    if (bt::conflict2_boundary_distance(a, b) <= 0.0101) {
      ++skipped;
      continue;
    }
    const bool lp = capacity_feasible(conflict, cix, pi1,
                                      std::vector<double>{a, b, 0.0, 0.0})
                        .feasible;
    disagreements += lp != bt::conflict2_grid_feasible(a, b);
    ++checked;
  }
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng), b = u(rng);
    if (bt::tandem2_boundary_distance(a, b) <= 0.0101) {
      ++skipped;
      continue;
    }
    const bool lp = capacity_feasible(tandem, tix, pi2,
                                      std::vector<double>{a, 0.0, 0.0, b})
                        .feasible;
    disagreements += lp != bt::tandem2_grid_feasible(a, b);
    ++checked;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "%d points checked, %d in boundary band skipped, %d disagree",
                checked, skipped, disagreements);
  report(4, "capacity LP equals 0.01-grid hand oracle", disagreements == 0,
         buf);
}

// --- 5 and 7: boundary stability, divergence, and drift shape -------------

struct DriftVerdict {
  bool ok = false;
  int knee = -1;
  int tail_bins = 0;
};

// Knee rule, pinned: over 6 equal-width bins of pre-step total queue, a bin
// is estimable with >= 30 samples; the knee is the smallest index from which
// every estimable bin has strictly negative mean drift; the tail at and above
// the knee must contain at least 2 estimable bins. Six bins, not more: on a
// 1e5-slot stable trace the top twelfths are visited only inside one or two
// excursions, and a few dozen serially correlated samples do not estimate a
// conditional mean.
DriftVerdict drift_verdict(const LyapunovSeries& series) {
  DriftVerdict v;
  const int n = static_cast<int>(series.bins.size());
  int last_estimable = -1;
  for (int i = 0; i < n; ++i)
    if (series.bins[i].count >= 30) last_estimable = i;
  if (last_estimable < 0) return v;

  int knee = -1;
  for (int k = 0; k <= last_estimable; ++k) {
    bool all_neg = true;
    for (int j = k; j <= last_estimable; ++j)
      if (series.bins[j].count >= 30 && !(series.bins[j].mean_drift < 0.0))
        all_neg = false;
    if (all_neg) {
      knee = k;
      break;
    }
  }
  if (knee < 0) return v;

  int tail = 0;
  for (int j = knee; j <= last_estimable; ++j)
    if (series.bins[j].count >= 30) ++tail;
  v.knee = knee;
  v.tail_bins = tail;
  v.ok = tail >= 2;
  return v;
}

struct StabilityOutcome {
  bool pass5 = false;
  std::string detail5;
  bool pass7 = false;
  std::string detail7;
};

StabilityOutcome run_stability_and_drift() {
  const char* names[] = {"conflict2_scenario.json", "tandem2_scenario.json",
                         "cross_scenario.json"};
  const std::int64_t horizon = 100000;
  const int seeds = 10;

  bool stat_ok = true, growth_ok = true, drift_ok = true;
  double worst_stat = 0.0;
  double worst_ratio = std::numeric_limits<double>::infinity();
  int min_knee = 99, max_knee = -1, min_tail = 99;
  int runs = 0;

  for (const char* name : names) {
    Scenario base = bt::load_data_scenario(name);
    base.horizon = horizon;
    const auto pi = StateDistribution::product_of(base);
    const auto rho = max_throughput_multiplier_routed(
        base.net, base.index, pi, base.ratios, base.mean_rates());
    if (rho.unbounded || rho.rho_star <= 0.0) {
      stat_ok = false;
      break;
    }
    const std::vector<double> v_thresholds{10.0 * base.net.num_links()};

    for (int s = 0; s < seeds; ++s) {
      Scenario lo = base.scaled(0.95 * rho.rho_star);
      lo.seed = base.seed + static_cast<std::uint64_t>(s);
      double lo_final = 0.0;
      {
        const Trace tr = run(lo);
        const auto rep = stability_statistic(tr, v_thresholds);
        worst_stat = std::max(worst_stat, rep.worst[0]);
        stat_ok = stat_ok && rep.worst[0] < 0.01;
        for (double q : tr.slots.back().queues) lo_final += q;

        const auto verdict = drift_verdict(drift_estimate(tr, 6));
        drift_ok = drift_ok && verdict.ok;
        if (verdict.knee >= 0) {
          min_knee = std::min(min_knee, verdict.knee);
          max_knee = std::max(max_knee, verdict.knee);
          min_tail = std::min(min_tail, verdict.tail_bins);
        }
      }
      Scenario hi = base.scaled(1.1 * rho.rho_star);
      hi.seed = lo.seed;
      double hi_final = 0.0;
      {
        const Trace tr = run(hi);
        for (double q : tr.slots.back().queues) hi_final += q;
      }
      growth_ok = growth_ok && hi_final > 10.0 * lo_final;
      if (lo_final > 0.0)
        worst_ratio = std::min(worst_ratio, hi_final / lo_final);
      ++runs;
    }
  }

  StabilityOutcome out;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "3 networks x %d seeds at 1e5 slots, worst statistic %.4f at "
                "V=10N, worst 1.1x/0.95x final-queue ratio %.1f",
                seeds, worst_stat, worst_ratio);
  out.pass5 = stat_ok && growth_ok;
  out.detail5 = buf;

  char buf7[160];
  std::snprintf(buf7, sizeof buf7,
                "%d runs, knee range [%d, %d] of 6 bins, min tail %d "
                "estimable bins",
                runs, min_knee, max_knee, min_tail);
  out.pass7 = drift_ok && runs == 30;
  out.detail7 = buf7;
  return out;
}

// --- 6: controller comparison on the shipped four-approach junction -------

void criterion_comparison() {
  const auto t0 = clock_type::now();
  const Scenario sc = bt::load_data_scenario("cross_scenario.json");

  SweepSpec spec;
  spec.criterion = SweepCriterion::NoCapacityBreach;
  spec.rho_lo = 0.05;
  spec.rho_hi = 6.0;
  spec.resolution = 0.05;

  auto sweep_for = [&](ControllerKind kind) {
    ControllerConfig cfg = sc.controller;
    cfg.kind = kind;
    return empirical_multiplier(sc, cfg, spec);
  };
  const auto bp = sweep_for(ControllerKind::Backpressure);
  const auto ft = sweep_for(ControllerKind::FixedTime);
  const auto scats = sweep_for(ControllerKind::Scats);
  const double dt = seconds_since(t0);

  const bool ok = !bp.hit_upper_bound && bp.rho_hat >= scats.rho_hat + 0.1 &&
                  bp.rho_hat >= ft.rho_hat + 0.1 && dt < 120.0;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "rho_hat backpressure %.2f, scats %.2f, fixed-time %.2f, %.1fs",
                bp.rho_hat, scats.rho_hat, ft.rho_hat, dt);
  report(6, "backpressure bests both baselines by 0.1", ok, buf);
}

// --- 8: manifest reruns reproduce artifacts byte for byte -----------------

bool same_bytes(const std::filesystem::path& a,
                const std::filesystem::path& b) {
  return bt::read_file(a) == bt::read_file(b);
}

// The CLI narrates runs on stdout; keep the report to criterion lines.
int run_quietly(const std::vector<std::string>& args) {
  std::fflush(stdout);
  const int saved = dup(1);
  const int null_fd = open("/dev/null", O_WRONLY);
  dup2(null_fd, 1);
  const int code = run_command(args);
  std::fflush(stdout);
  dup2(saved, 1);
  close(null_fd);
  close(saved);
  return code;
}

void criterion_rerun() {
  namespace fs = std::filesystem;
  const auto dir_a = bt::fresh_tmp_dir("acc_sim_a");
  const auto dir_b = bt::fresh_tmp_dir("acc_sim_b");
  const auto scen = (bt::data_dir() / "cross_scenario.json").string();

  bool ok = run_quietly({"simulate", "--scenario", scen, "--horizon", "1500",
                         "--seed", "31", "--out", dir_a.string()}) == 0;
  ok = ok && run_quietly({"rerun", "--manifest",
                          (dir_a / "manifest.json").string(), "--out",
                          dir_b.string()}) == 0;
  int files = 0;
  if (ok) {
    for (const auto& entry : fs::directory_iterator(dir_a)) {
      const auto name = entry.path().filename().string();
      if (name == "trace.csv" || name.ends_with(".svg")) {
        ok = ok && same_bytes(entry.path(), dir_b / name);
        ++files;
      }
    }
  }

  const auto dir_c = bt::fresh_tmp_dir("acc_swp_a");
  const auto dir_d = bt::fresh_tmp_dir("acc_swp_b");
  ok = ok &&
       run_quietly({"sweep", "--scenario",
                    (bt::data_dir() / "conflict2_scenario.json").string(),
                    "--horizon", "400", "--rho-max", "1.5", "--controllers",
                    "backpressure", "--out", dir_c.string()}) == 0;
  ok = ok && run_quietly({"rerun", "--manifest",
                          (dir_c / "manifest.json").string(), "--out",
                          dir_d.string()}) == 0;
  if (ok) {
    for (const auto& entry : fs::directory_iterator(dir_c)) {
      const auto name = entry.path().filename().string();
      if (name.ends_with(".csv") || name.ends_with(".svg")) {
        ok = ok && same_bytes(entry.path(), dir_d / name);
        ++files;
      }
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d artifacts compared across 2 reruns",
                files);
  report(8, "manifest rerun is byte-identical", ok && files >= 4, buf);
}

}  // namespace

int main() {
  criterion_argmax();
  criterion_discharge();
  criterion_conservation();
  criterion_region_oracle();
  const auto sd = run_stability_and_drift();
  report(5, "stable at 0.95x boundary, divergent at 1.1x", sd.pass5,
         sd.detail5);
  criterion_comparison();
  report(7, "lyapunov drift negative above the knee", sd.pass7, sd.detail7);
  criterion_rerun();
  if (g_failures == 0)
    std::printf("all acceptance criteria hold\n");
  else
    std::printf("%d acceptance criteria failing\n", g_failures);
  return g_failures;
}
