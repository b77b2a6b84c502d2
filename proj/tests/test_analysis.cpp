#include <doctest.h>

#include <cmath>
#include <random>

#include "bpsim/analysis.hpp"
#include "bpsim/errors.hpp"
#include "support.hpp"

using namespace bpsim;
namespace bt = bpsim::testing;

namespace {

Trace trace_of(const std::vector<std::vector<double>>& queue_rows) {
  Trace tr;
  tr.num_links = static_cast<int>(queue_rows.front().size());
  tr.num_junctions = 1;
  std::int64_t t = 0;
  for (const auto& q : queue_rows) {
    SlotRecord rec;
    rec.slot = t++;
    rec.queues = q;
    rec.lyapunov = lyapunov(q);
    tr.slots.push_back(std::move(rec));
  }
  return tr;
}

StateDistribution single_state_pi(const Network& net) {
  StateDistribution pi;
  pi.per_junction.assign(net.junctions.size(), {1.0});
  return pi;
}

}  // namespace

TEST_CASE("lyapunov is the squared norm") {
  CHECK(lyapunov(std::vector<double>{3.0, 4.0}) == 25.0);
  CHECK(lyapunov(std::vector<double>{}) == 0.0);
}

TEST_CASE("stability statistic counts exceedances") {
  const Trace tr = trace_of({{0.0}, {5.0}, {15.0}, {25.0}});
  const auto rep = stability_statistic(tr, std::vector<double>{10.0, 20.0});

  REQUIRE(rep.thresholds == std::vector<double>{10.0, 20.0});
  CHECK(rep.per_queue[0][0] == doctest::Approx(0.5));   // 15, 25 above 10
  CHECK(rep.per_queue[1][0] == doctest::Approx(0.25));  // only 25 above 20
  CHECK(rep.worst[0] == doctest::Approx(0.5));
  CHECK(rep.worst[1] == doctest::Approx(0.25));
  // Last half: totals 15 -> 25, one slot apart.
  CHECK(rep.tail_slope == doctest::Approx(10.0));
}

TEST_CASE("statistic is nonincreasing in the threshold") {
  std::mt19937_64 rng(5);
  std::vector<std::vector<double>> rows;
  std::uniform_real_distribution<double> u(0.0, 50.0);
  for (int t = 0; t < 200; ++t) rows.push_back({u(rng), u(rng), u(rng)});
  const Trace tr = trace_of(rows);

  const std::vector<double> grid{1, 2, 5, 10, 20, 40};
  const auto rep = stability_statistic(tr, grid);
  for (std::size_t v = 1; v < grid.size(); ++v) {
    CHECK(rep.worst[v] <= rep.worst[v - 1]);
    for (int a = 0; a < tr.num_links; ++a)
      CHECK(rep.per_queue[v][a] <= rep.per_queue[v - 1][a]);
  }
  for (std::size_t v = 0; v < grid.size(); ++v) {
    CHECK(rep.worst[v] >= 0.0);
    CHECK(rep.worst[v] <= 1.0);
  }
}

TEST_CASE("drift bins average the one-slot lyapunov change") {
  // Totals 1,3,1,3,...: L alternates 1,9; drift +8 from the low bin and -8
  // from the high bin.
  std::vector<std::vector<double>> rows;
  for (int t = 0; t < 40; ++t) rows.push_back({t % 2 ? 3.0 : 1.0});
  const Trace tr = trace_of(rows);

  const auto series = drift_estimate(tr, 2);
  REQUIRE(series.values.size() == 40);
  CHECK(series.values[0] == 1.0);
  CHECK(series.values[1] == 9.0);
  REQUIRE(series.bins.size() == 2);
  CHECK(series.bins[0].mean_drift == doctest::Approx(8.0));
  CHECK(series.bins[1].mean_drift == doctest::Approx(-8.0));
  CHECK(series.bins[0].count + series.bins[1].count == 39);
}

TEST_CASE("junction rate hull lists one vector per phase") {
  const Network net = bt::load_data_network("cross_junction.json");
  const auto dry = junction_rate_hull(net, 0, 0);
  const auto wet = junction_rate_hull(net, 0, 1);

  REQUIRE(dry.size() == 4);
  REQUIRE(dry[0].size() == 12);
  // Phase 0 serves the first four movements at the dry saturation.
  for (int k = 0; k < 4; ++k) CHECK(dry[0][k] == doctest::Approx(2.2));
  for (int k = 4; k < 12; ++k) CHECK(dry[0][k] == 0.0);
  for (int k = 0; k < 4; ++k) CHECK(wet[0][k] == doctest::Approx(1.76));
  // The turn phase serves movements 4 and 5 only.
  CHECK(dry[1][4] == doctest::Approx(2.2));
  CHECK(dry[1][5] == doctest::Approx(2.2));
  CHECK(dry[1][0] == 0.0);
}

TEST_CASE("capacity membership on the conflict junction") {
  const Network net = bt::load_data_network("conflict2.json");
  const NetIndex ix = NetIndex::build(net);
  const auto pi = single_state_pi(net);

  SUBCASE("interior point is certified feasible") {
    const auto cert =
        capacity_feasible(net, ix, pi, std::vector<double>{0.4, 0.4, 0.0, 0.0});
    REQUIRE(cert.feasible);
    CHECK(cert.max_residual <= 1e-8);
    CHECK(cert.flows[0] == doctest::Approx(0.4));
    CHECK(cert.flows[1] == doctest::Approx(0.4));
    REQUIRE(cert.theta.size() == 1);
    const auto& th = cert.theta.front();
    CHECK(th.weights.size() == 2);
    CHECK(th.weights[0] + th.weights[1] == doctest::Approx(1.0));
    CHECK(th.weights[0] >= 0.4 - 1e-9);
    CHECK(th.weights[1] >= 0.4 - 1e-9);
  }

  SUBCASE("outside point carries a witness") {
    const auto cert =
        capacity_feasible(net, ix, pi, std::vector<double>{0.6, 0.6, 0.0, 0.0});
    REQUIRE_FALSE(cert.feasible);
    REQUIRE_FALSE(cert.witness.empty());
    bool mentions_conservation = false;
    for (const auto& w : cert.witness)
      if (w.find("conservation") != std::string::npos)
        mentions_conservation = true;
    CHECK(mentions_conservation);
  }

  SUBCASE("zero demand is feasible") {
    const auto cert =
        capacity_feasible(net, ix, pi, std::vector<double>(4, 0.0));
    CHECK(cert.feasible);
  }

  SUBCASE("monotone under componentwise decrease") {
    std::mt19937_64 rng(40);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
      const double l0 = u(rng), l1 = u(rng);
      const auto hi = capacity_feasible(
          net, ix, pi, std::vector<double>{l0, l1, 0.0, 0.0});
      if (!hi.feasible) continue;
      const auto lo = capacity_feasible(
          net, ix, pi, std::vector<double>{0.5 * l0, 0.7 * l1, 0.0, 0.0});
      CHECK(lo.feasible);
    }
  }
}

TEST_CASE("tandem infeasibility points at the shared junction") {
  const Network net = bt::load_data_network("tandem2.json");
  const NetIndex ix = NetIndex::build(net);
  const auto pi = single_state_pi(net);

  // 0.7 + 0.5 overload junction 1 even though each link alone fits.
  const auto cert = capacity_feasible(
      net, ix, pi, std::vector<double>{0.7, 0.0, 0.0, 0.5});
  REQUIRE_FALSE(cert.feasible);
  bool mentions_middle = false;
  for (const auto& w : cert.witness)
    if (w.find("service") != std::string::npos ||
        w.find("mix(junction 1") != std::string::npos)
      mentions_middle = true;
  CHECK(mentions_middle);
}

TEST_CASE("lambda off the entry links is rejected") {
  const Network net = bt::load_data_network("conflict2.json");
  const NetIndex ix = NetIndex::build(net);
  const auto pi = single_state_pi(net);
  CHECK_THROWS_AS(capacity_feasible(net, ix, pi,
                                    std::vector<double>{0.0, 0.0, 0.3, 0.0}),
                  ConfigError);
  CHECK_THROWS_AS(
      capacity_feasible(net, ix, pi, std::vector<double>{0.1, 0.1}),
      ConfigError);
}

TEST_CASE("throughput multiplier on hand-solved networks") {
  const Network net = bt::load_data_network("conflict2.json");
  const NetIndex ix = NetIndex::build(net);
  const auto pi = single_state_pi(net);

  const std::vector<double> dir{0.5, 0.5, 0.0, 0.0};
  const auto res = max_throughput_multiplier(net, ix, pi, dir);
  REQUIRE_FALSE(res.unbounded);
  CHECK(res.rho_star == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(res.cert.feasible);

  // Inverse scaling: doubling the direction halves the multiplier.
  const std::vector<double> dir2{1.0, 1.0, 0.0, 0.0};
  const auto res2 = max_throughput_multiplier(net, ix, pi, dir2);
  CHECK(res2.rho_star == doctest::Approx(0.5).epsilon(1e-9));

  CHECK_THROWS_AS(
      max_throughput_multiplier(net, ix, pi, std::vector<double>(4, 0.0)),
      ConfigError);
}

TEST_CASE("always-served movement bounds rho by rate over demand") {
  // One entry, one exit, a single phase serving the only movement at rate 2.
  Network net;
  net.links = {{0, kUnboundedCapacity, true, false},
               {1, kUnboundedCapacity, false, true}};
  Junction jn;
  jn.id = 0;
  jn.movements = {{0, 1}};
  jn.phases = {{0, {{0, 1}}}};
  jn.states = {{0, ""}};
  jn.rates.default_saturation = 2.0;
  net.junctions.push_back(std::move(jn));
  const NetIndex ix = NetIndex::build(net);
  const auto pi = single_state_pi(net);

  const auto res =
      max_throughput_multiplier(net, ix, pi, std::vector<double>{0.8, 0.0});
  REQUIRE_FALSE(res.unbounded);
  CHECK(res.rho_star == doctest::Approx(2.0 / 0.8).epsilon(1e-9));
}

TEST_CASE("demand through an entry-exit passthrough is unbounded") {
  Network net;
  net.links = {{0, kUnboundedCapacity, true, true},
               {1, kUnboundedCapacity, true, false},
               {2, kUnboundedCapacity, false, true}};
  Junction jn;
  jn.id = 0;
  jn.movements = {{1, 2}};
  jn.phases = {{0, {{1, 2}}}};
  jn.states = {{0, ""}};
  net.junctions.push_back(std::move(jn));
  const NetIndex ix = NetIndex::build(net);

  const auto res = max_throughput_multiplier(
      net, ix, single_state_pi(net), std::vector<double>{1.0, 0.0, 0.0});
  CHECK(res.unbounded);
}

TEST_CASE("routed boundary equals free boundary without route choice") {
  // Single outgoing movement per link: the ratios force the only routing the
  // free LP could pick anyway.
  for (const char* name : {"conflict2_scenario.json", "tandem2_scenario.json"}) {
    const Scenario sc = bt::load_data_scenario(name);
    const auto pi = StateDistribution::product_of(sc);
    const auto dir = sc.mean_rates();

    const auto free_res =
        max_throughput_multiplier(sc.net, sc.index, pi, dir);
    const auto routed = max_throughput_multiplier_routed(
        sc.net, sc.index, pi, sc.ratios, dir);
    REQUIRE_FALSE(free_res.unbounded);
    REQUIRE_FALSE(routed.unbounded);
    CHECK(routed.rho_star ==
          doctest::Approx(free_res.rho_star).epsilon(1e-9));
  }
}

TEST_CASE("cross routed boundary is below the free one") {
  const Scenario sc = bt::load_data_scenario("cross_scenario.json");
  const auto pi = StateDistribution::product_of(sc);
  const auto dir = sc.mean_rates();

  const auto routed = max_throughput_multiplier_routed(
      sc.net, sc.index, pi, sc.ratios, dir);
  const auto free_res = max_throughput_multiplier(sc.net, sc.index, pi, dir);

  // Mean saturation 0.75*2.2 + 0.25*1.76 = 2.09. Fixed 0.6/0.4 splits make
  // the worst movements of the two used phases 0.33 and 0.18 per unit rho,
  // so rho* = 2.09 / 0.51; free routing may rebalance and sit higher.
  CHECK(routed.rho_star == doctest::Approx(2.09 / 0.51).epsilon(1e-9));
  CHECK(free_res.rho_star > routed.rho_star);
}

TEST_CASE("product state distribution follows the scenario") {
  const Scenario sc = bt::load_data_scenario("cross_scenario.json");
  const auto pi = StateDistribution::product_of(sc);
  CHECK_FALSE(pi.joint);
  REQUIRE(pi.per_junction.size() == 1);
  CHECK(pi.per_junction[0][0] == doctest::Approx(0.75));
  CHECK(pi.per_junction[0][1] == doctest::Approx(0.25));
  pi.validate(sc.net);

  StateDistribution bad = pi;
  bad.per_junction[0] = {0.5, 0.4};
  CHECK_THROWS_AS(bad.validate(sc.net), ConfigError);
}

TEST_CASE("joint distribution matches its product when independent") {
  const Network net = bt::load_data_network("tandem2.json");
  const NetIndex ix = NetIndex::build(net);

  StateDistribution prod;
  prod.per_junction = {{1.0}, {1.0}};

  StateDistribution joint;
  joint.joint = true;
  joint.support = {{{0, 0}, 1.0}};
  joint.validate(net);

  const std::vector<double> lam{0.6, 0.0, 0.0, 0.3};
  CHECK(capacity_feasible(net, ix, prod, lam).feasible ==
        capacity_feasible(net, ix, joint, lam).feasible);
  const std::vector<double> hot{0.8, 0.0, 0.0, 0.4};
  CHECK(capacity_feasible(net, ix, prod, hot).feasible ==
        capacity_feasible(net, ix, joint, hot).feasible);
}

TEST_CASE("grid oracle and LP agree away from the boundary") {
  const Network conflict = bt::load_data_network("conflict2.json");
  const NetIndex cix = NetIndex::build(conflict);
  const auto cpi = single_state_pi(conflict);

  std::mt19937_64 rng(914);
  std::uniform_real_distribution<double> u(0.0, 1.25);
  for (int i = 0; i < 60; ++i) {
    const double l0 = u(rng), l1 = u(rng);
    if (bt::conflict2_boundary_distance(l0, l1) <= 0.011) continue;
    const bool lp =
        capacity_feasible(conflict, cix, cpi,
                          std::vector<double>{l0, l1, 0.0, 0.0})
            .feasible;
    CHECK(lp == bt::conflict2_grid_feasible(l0, l1));
  }
}

TEST_CASE("empirical multiplier brackets the analytic boundary") {
  Scenario sc = bt::load_data_scenario("conflict2_scenario.json");
  sc.horizon = 4000;
  for (auto& l : sc.net.links) l.capacity = 100.0;

  SweepSpec spec;
  spec.criterion = SweepCriterion::NoCapacityBreach;
  spec.rho_lo = 0.05;
  spec.rho_hi = 2.5;

  // Shipped demand (0.45, 0.40) has its routed boundary at 1/0.85.
  const auto res = empirical_multiplier(sc, sc.controller, spec);
  CHECK_FALSE(res.hit_upper_bound);
  CHECK(res.rho_hat > 0.8);
  CHECK(res.rho_hat < 1.35);

  // Evaluations live on the resolution grid, pass below, fail above.
  for (const auto& ev : res.evaluations) {
    const double k = ev.rho / spec.resolution;
    CHECK(std::abs(k - std::round(k)) < 1e-6);
    if (ev.rho <= res.rho_hat) CHECK(ev.passed);
    if (ev.rho > res.rho_hat + spec.resolution / 2) CHECK_FALSE(ev.passed);
  }
}

TEST_CASE("trivially satisfiable criterion flags the upper bound") {
  Scenario sc = bt::load_data_scenario("conflict2_scenario.json");
  sc.horizon = 300;
  for (auto& l : sc.net.links) l.capacity = kUnboundedCapacity;

  SweepSpec spec;
  spec.criterion = SweepCriterion::NoCapacityBreach;
  spec.rho_hi = 1.5;

  const auto res = empirical_multiplier(sc, sc.controller, spec);
  CHECK(res.hit_upper_bound);
  CHECK(res.rho_hat == doctest::Approx(1.5));
}

TEST_CASE("certificate json is well formed") {
  const Network net = bt::load_data_network("conflict2.json");
  const NetIndex ix = NetIndex::build(net);
  const auto cert = capacity_feasible(
      net, ix, single_state_pi(net), std::vector<double>{0.3, 0.3, 0.0, 0.0});
  const auto text =
      certificate_json(net, ix, cert, std::vector<double>{0.3, 0.3, 0.0, 0.0});
  CHECK(text.find("bpsim.certificate.v1") != std::string::npos);
  CHECK(text.find("\"feasible\": true") != std::string::npos);
  CHECK(text.find("\"flows\"") != std::string::npos);
}
