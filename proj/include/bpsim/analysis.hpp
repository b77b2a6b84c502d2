#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bpsim/network.hpp"
#include "bpsim/scenario.hpp"
#include "bpsim/sim.hpp"

namespace bpsim {

// Empirical strong-stability indicator: for each threshold V, the fraction of
// slots each queue spent above V, plus the worst queue per threshold and the
// trend of total queue over the trace's last half.
struct StabilityReport {
  std::vector<double> thresholds;
  std::vector<std::vector<double>> per_queue;  // [threshold][link]
  std::vector<double> worst;                   // [threshold]
  double tail_slope = 0.0;                     // vehicles per slot
};

StabilityReport stability_statistic(const Trace& tr,
                                    std::span<const double> thresholds);

// Sum of squared queue lengths.
double lyapunov(std::span<const double> queues);

struct DriftBin {
  double lo = 0.0;
  double hi = 0.0;
  std::int64_t count = 0;
  double mean_drift = 0.0;
};

// L per slot plus one-slot drift E[L(t+1)-L(t)] conditioned on total-queue
// bins. Negative drift in every high-occupancy bin is the empirical shadow of
// the B - eps*sum(Q) bound.
struct LyapunovSeries {
  std::vector<double> values;
  std::vector<DriftBin> bins;
};

LyapunovSeries drift_estimate(const Trace& tr, int num_bins);

// Vertices of one junction's achievable-service set under state z: one rate
// vector per phase over the junction's movements in local order.
std::vector<std::vector<double>> junction_rate_hull(const Network& net,
                                                    JunctionId j, StateId z);

// State-occupancy weighting for the capacity program: per-junction product
// form, or a fully joint distribution (at most 2 junctions).
struct StateDistribution {
  bool joint = false;
  std::vector<std::vector<double>> per_junction;  // product: [junction][state index]
  // joint: (state index per junction, probability)
  std::vector<std::pair<std::vector<int>, double>> support;

  static StateDistribution product_of(const Scenario& sc);
  void validate(const Network& net) const;  // throws ConfigError
};

struct ThetaBlock {
  JunctionId junction = 0;
  std::vector<StateId> states;    // one id (product) or the joint assignment
  std::vector<double> weights;    // per phase, junction phase order
};

struct RegionCertificate {
  bool feasible = false;
  std::vector<double> flows;         // per global movement id
  std::vector<ThetaBlock> theta;
  double max_residual = 0.0;         // double recheck of every constraint
  std::vector<std::string> witness;  // infeasible: violated constraint labels
};

// Feasibility of arrival vector lambda (per link, zero off entries) against
// the time-shared service region. Flows are free variables: the region of
// demands supportable under some routing.
RegionCertificate capacity_feasible(const Network& net, const NetIndex& ix,
                                    const StateDistribution& pi,
                                    std::span<const double> lambda);

struct ThroughputResult {
  bool unbounded = false;  // direction entirely serviceable, no finite bound
  double rho_star = 0.0;
  RegionCertificate cert;  // certificate at the boundary
};

// sup{rho : capacity_feasible(net, pi, rho*direction)}, free-flow routing.
ThroughputResult max_throughput_multiplier(const Network& net,
                                           const NetIndex& ix,
                                           const StateDistribution& pi,
                                           std::span<const double> direction);

// Flow per movement induced by pushing lambda through fixed turn ratios.
std::vector<double> routed_flows(const Network& net, const NetIndex& ix,
                                 const TurnRatios& ratios,
                                 std::span<const double> lambda);

// Boundary along the scenario's own routing: flows pinned to the turn-ratio
// propagation of the direction instead of chosen by the LP. This is the
// reference boundary for simulator-facing stability checks; the free-flow
// variant can exceed what fixed routing can reach.
ThroughputResult max_throughput_multiplier_routed(
    const Network& net, const NetIndex& ix, const StateDistribution& pi,
    const TurnRatios& ratios, std::span<const double> direction);

enum class SweepCriterion { NoCapacityBreach, StabilityThreshold };

struct SweepSpec {
  SweepCriterion criterion = SweepCriterion::NoCapacityBreach;
  double v_threshold = 0.0;  // StabilityThreshold: the V to test at
  double tau = 0.01;         // StabilityThreshold: required statistic bound
  double rho_lo = 0.05;
  double rho_hi = 4.0;
  double resolution = 0.05;
};

struct SweepEvaluation {
  double rho = 0.0;
  bool passed = false;
};

struct SweepResult {
  double rho_hat = 0.0;
  bool hit_upper_bound = false;  // criterion held at rho_hi itself
  std::vector<SweepEvaluation> evaluations;
};

// Largest demand multiplier (on the resolution grid, by bisection) whose run
// still meets the criterion. Fresh controller per evaluation, same seed.
SweepResult empirical_multiplier(const Scenario& sc,
                                 const ControllerConfig& ctrl,
                                 const SweepSpec& spec);

// Certificate file content; lambda is echoed for context.
std::string certificate_json(const Network& net, const NetIndex& ix,
                             const RegionCertificate& cert,
                             std::span<const double> lambda);

}  // namespace bpsim
