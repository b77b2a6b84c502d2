#include "bpsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include <json.hpp>

#include "bpsim/errors.hpp"
#include "bpsim/lp.hpp"

namespace bpsim {

namespace {

// Exact double -> rational via mantissa/exponent split; the LP sees the
// binary value the caller computed, nothing rounded twice.
lp::Rat rat(double v) {
  if (!std::isfinite(v)) throw LpError("nonfinite coefficient in capacity program");
  if (v == 0.0) return lp::Rat(0);
  int exp = 0;
  const double m = std::frexp(v, &exp);
  const std::int64_t mant = std::llround(std::ldexp(m, 53));
  exp -= 53;
  boost::multiprecision::cpp_int num = mant;
  if (exp >= 0) return lp::Rat(num << exp);
  return lp::Rat(num, boost::multiprecision::cpp_int(1) << -exp);
}

// One convex-weight block: a junction under one state context, with its
// occupancy weight and the LP columns holding its per-phase weights.
struct ThetaVars {
  JunctionId junction = 0;
  int junction_index = 0;
  std::vector<int> assignment;  // state index per junction (joint) or one
  StateId state = 0;            // this junction's state in the block
  double weight = 0.0;
  int base = 0;
  int num_phases = 0;
};

std::vector<ThetaVars> make_blocks(const Network& net,
                                   const StateDistribution& pi,
                                   int first_col) {
  std::vector<ThetaVars> out;
  int col = first_col;
  for (std::size_t ji = 0; ji < net.junctions.size(); ++ji) {
    const Junction& jn = net.junctions[ji];
    if (!pi.joint) {
      for (std::size_t zi = 0; zi < jn.states.size(); ++zi) {
        ThetaVars b;
        b.junction = jn.id;
        b.junction_index = static_cast<int>(ji);
        b.assignment = {static_cast<int>(zi)};
        b.state = jn.states[zi].id;
        b.weight = pi.per_junction[ji][zi];
        b.base = col;
        b.num_phases = static_cast<int>(jn.phases.size());
        col += b.num_phases;
        out.push_back(std::move(b));
      }
    } else {
      for (const auto& [assignment, prob] : pi.support) {
        ThetaVars b;
        b.junction = jn.id;
        b.junction_index = static_cast<int>(ji);
        b.assignment = assignment;
        b.state = jn.states[assignment[ji]].id;
        b.weight = prob;
        b.base = col;
        b.num_phases = static_cast<int>(jn.phases.size());
        col += b.num_phases;
        out.push_back(std::move(b));
      }
    }
  }
  return out;
}

int theta_count(const std::vector<ThetaVars>& blocks) {
  int n = 0;
  for (const auto& b : blocks) n += b.num_phases;
  return n;
}

std::string mix_label(const Network& net, const ThetaVars& b, bool joint) {
  std::string s = "mix(junction " + std::to_string(b.junction) + ", state ";
  if (!joint) {
    s += std::to_string(b.state);
  } else {
    for (std::size_t ji = 0; ji < b.assignment.size(); ++ji) {
      if (ji) s += "+";
      s += std::to_string(net.junctions[ji].states[b.assignment[ji]].id);
    }
  }
  return s + ")";
}

void add_mix_rows(lp::Problem& p, const Network& net,
                  const std::vector<ThetaVars>& blocks, bool joint) {
  for (const auto& b : blocks) {
    std::vector<lp::Rat> row(p.num_vars, lp::Rat(0));
    for (int k = 0; k < b.num_phases; ++k) row[b.base + k] = 1;
    p.add_row(lp::RowType::Eq, std::move(row), lp::Rat(1),
              mix_label(net, b, joint));
  }
}

std::string service_label(const Movement& m) {
  return "service(" + std::to_string(m.from) + "->" + std::to_string(m.to) +
         ")";
}

std::vector<std::vector<double>> theta_values(
    const std::vector<ThetaVars>& blocks, const std::vector<lp::Rat>& x) {
  std::vector<std::vector<double>> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) {
    std::vector<double> w(b.num_phases, 0.0);
    for (int k = 0; k < b.num_phases; ++k) w[k] = lp::to_double(x[b.base + k]);
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<ThetaBlock> make_theta_blocks(
    const Network& net, const std::vector<ThetaVars>& blocks, bool joint,
    const std::vector<std::vector<double>>& theta) {
  std::vector<ThetaBlock> out;
  out.reserve(blocks.size());
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    ThetaBlock tb;
    tb.junction = blocks[bi].junction;
    if (!joint) {
      tb.states = {blocks[bi].state};
    } else {
      for (std::size_t ji = 0; ji < blocks[bi].assignment.size(); ++ji)
        tb.states.push_back(
            net.junctions[ji].states[blocks[bi].assignment[ji]].id);
    }
    tb.weights = theta[bi];
    out.push_back(std::move(tb));
  }
  return out;
}

// Double-precision re-evaluation of every constraint the certificate claims
// to satisfy. Worst violation; exact solutions land at rounding noise.
double recheck_residual(const Network& net, const NetIndex& ix,
                        const std::vector<ThetaVars>& blocks,
                        const std::vector<std::vector<double>>& theta,
                        std::span<const double> flows,
                        std::span<const double> lambda_eff) {
  double r = 0.0;
  for (const Link& a : net.links) {
    if (a.is_exit) continue;
    double acc = -lambda_eff[a.id];
    for (int g : ix.out_of[a.id]) acc += flows[g];
    for (int g : ix.into[a.id]) acc -= flows[g];
    r = std::max(r, std::abs(acc));
  }
  for (int g = 0; g < ix.num_movements(); ++g) {
    const auto& ref = ix.movements[g];
    const Junction& jn = net.junctions[ref.junction];
    double srv = 0.0;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      if (blocks[bi].junction != ref.junction) continue;
      for (int k = 0; k < blocks[bi].num_phases; ++k)
        srv += blocks[bi].weight * theta[bi][k] *
               rate(net, jn.id, jn.phases[k].id, ref.movement,
                    blocks[bi].state);
    }
    r = std::max(r, flows[g] - srv);
    r = std::max(r, -flows[g]);
  }
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    double sum = 0.0;
    for (double w : theta[bi]) {
      sum += w;
      r = std::max(r, -w);
    }
    r = std::max(r, std::abs(sum - 1.0));
  }
  return r;
}

constexpr double kResidualTol = 1e-8;

void check_lambda(const Network& net, std::span<const double> lambda) {
  if (lambda.size() != net.links.size())
    throw ConfigError("demand vector length must match link count");
  for (const Link& a : net.links) {
    const double v = lambda[a.id];
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ConfigError("demand on link " + std::to_string(a.id) +
                        " must be finite and nonnegative");
    if (v > 0.0 && !a.is_entry)
      throw ConfigError("demand on non-entry link " + std::to_string(a.id));
  }
}

void check_direction(const Network& net, std::span<const double> d) {
  check_lambda(net, d);
  for (double v : d)
    if (v > 0.0) return;
  throw ConfigError("demand direction must be nonzero");
}

}  // namespace

StabilityReport stability_statistic(const Trace& tr,
                                    std::span<const double> thresholds) {
  StabilityReport rep;
  rep.thresholds.assign(thresholds.begin(), thresholds.end());
  const std::size_t nt = thresholds.size();
  const int nl = tr.num_links;
  rep.per_queue.assign(nt, std::vector<double>(nl, 0.0));
  rep.worst.assign(nt, 0.0);
  const std::size_t t_total = tr.slots.size();
  if (t_total == 0 || nl == 0) return rep;

  for (const SlotRecord& rec : tr.slots)
    for (std::size_t vi = 0; vi < nt; ++vi)
      for (int a = 0; a < nl; ++a)
        if (rec.queues[a] > thresholds[vi]) rep.per_queue[vi][a] += 1.0;
  for (std::size_t vi = 0; vi < nt; ++vi) {
    for (int a = 0; a < nl; ++a) {
      rep.per_queue[vi][a] /= static_cast<double>(t_total);
      rep.worst[vi] = std::max(rep.worst[vi], rep.per_queue[vi][a]);
    }
  }

  // Trend of the total queue over the trace's last half, least squares.
  const std::size_t t0 = t_total / 2;
  const std::size_t n = t_total - t0;
  if (n >= 2) {
    double tbar = 0.0, ybar = 0.0;
    std::vector<double> totals(n, 0.0);
    for (std::size_t t = t0; t < t_total; ++t) {
      double s = 0.0;
      for (double q : tr.slots[t].queues) s += q;
      totals[t - t0] = s;
      tbar += static_cast<double>(t);
      ybar += s;
    }
    tbar /= static_cast<double>(n);
    ybar /= static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t t = t0; t < t_total; ++t) {
      const double dt = static_cast<double>(t) - tbar;
      num += dt * (totals[t - t0] - ybar);
      den += dt * dt;
    }
    rep.tail_slope = den > 0.0 ? num / den : 0.0;
  }
  return rep;
}

double lyapunov(std::span<const double> queues) {
  double s = 0.0;
  for (double q : queues) s += q * q;
  return s;
}

LyapunovSeries drift_estimate(const Trace& tr, int num_bins) {
  if (num_bins < 1) throw ConfigError("drift estimate needs at least one bin");
  LyapunovSeries out;
  out.values.reserve(tr.slots.size());
  for (const SlotRecord& rec : tr.slots) out.values.push_back(rec.lyapunov);
  if (tr.slots.size() < 2) return out;

  const std::size_t npairs = tr.slots.size() - 1;
  std::vector<double> cond(npairs, 0.0);  // total queue before the step
  std::vector<double> drift(npairs, 0.0);
  for (std::size_t t = 0; t < npairs; ++t) {
    double s = 0.0;
    for (double q : tr.slots[t].queues) s += q;
    cond[t] = s;
    drift[t] = out.values[t + 1] - out.values[t];
  }
  const auto [mn_it, mx_it] = std::minmax_element(cond.begin(), cond.end());
  const double mn = *mn_it, mx = *mx_it;
  const double width = (mx - mn) / static_cast<double>(num_bins);
  out.bins.assign(num_bins, DriftBin{});
  for (int i = 0; i < num_bins; ++i) {
    out.bins[i].lo = mn + i * width;
    out.bins[i].hi = i + 1 == num_bins ? mx : mn + (i + 1) * width;
  }
  for (std::size_t t = 0; t < npairs; ++t) {
    int i = width > 0.0 ? static_cast<int>((cond[t] - mn) / width) : 0;
    i = std::clamp(i, 0, num_bins - 1);
    out.bins[i].count += 1;
    out.bins[i].mean_drift += drift[t];
  }
  for (DriftBin& b : out.bins)
    if (b.count > 0) b.mean_drift /= static_cast<double>(b.count);
  return out;
}

std::vector<std::vector<double>> junction_rate_hull(const Network& net,
                                                    JunctionId j, StateId z) {
  const Junction* jn = nullptr;
  for (const Junction& cand : net.junctions)
    if (cand.id == j) jn = &cand;
  if (jn == nullptr) throw std::out_of_range("unknown junction id");
  if (!jn->has_state(z)) throw std::out_of_range("unknown state id");
  std::vector<std::vector<double>> hull;
  hull.reserve(jn->phases.size());
  for (const Phase& p : jn->phases) {
    std::vector<double> v;
    v.reserve(jn->movements.size());
    for (const Movement& m : jn->movements) v.push_back(rate(net, j, p.id, m, z));
    hull.push_back(std::move(v));
  }
  return hull;
}

StateDistribution StateDistribution::product_of(const Scenario& sc) {
  StateDistribution pi;
  pi.per_junction.reserve(sc.net.junctions.size());
  for (std::size_t ji = 0; ji < sc.net.junctions.size(); ++ji)
    pi.per_junction.push_back(sc.state_procs[ji].stationary(
        static_cast<int>(sc.net.junctions[ji].states.size())));
  return pi;
}

void StateDistribution::validate(const Network& net) const {
  if (!joint) {
    if (per_junction.size() != net.junctions.size())
      throw ConfigError("state distribution needs one entry per junction");
    for (std::size_t ji = 0; ji < net.junctions.size(); ++ji) {
      if (per_junction[ji].size() != net.junctions[ji].states.size())
        throw ConfigError("state distribution for junction " +
                          std::to_string(net.junctions[ji].id) +
                          " has the wrong length");
      double sum = 0.0;
      for (double p : per_junction[ji]) {
        if (!(p >= -1e-12) || !std::isfinite(p))
          throw ConfigError("state probabilities must be nonnegative");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("state probabilities for junction " +
                          std::to_string(net.junctions[ji].id) +
                          " must sum to 1");
    }
    return;
  }
  if (net.junctions.size() > 2)
    throw ConfigError("joint state distribution supports at most 2 junctions");
  if (support.empty()) throw ConfigError("joint state distribution is empty");
  double sum = 0.0;
  for (const auto& [assignment, prob] : support) {
    if (assignment.size() != net.junctions.size())
      throw ConfigError("joint state assignment has the wrong length");
    for (std::size_t ji = 0; ji < assignment.size(); ++ji)
      if (assignment[ji] < 0 ||
          assignment[ji] >=
              static_cast<int>(net.junctions[ji].states.size()))
        throw ConfigError("joint state assignment out of range");
    if (!(prob >= 0.0) || !std::isfinite(prob))
      throw ConfigError("joint state probabilities must be nonnegative");
    sum += prob;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("joint state probabilities must sum to 1");
}

RegionCertificate capacity_feasible(const Network& net, const NetIndex& ix,
                                    const StateDistribution& pi,
                                    std::span<const double> lambda) {
  pi.validate(net);
  check_lambda(net, lambda);

  const int nf = ix.num_movements();
  const auto blocks = make_blocks(net, pi, nf);
  lp::Problem p;
  p.num_vars = nf + theta_count(blocks);
  p.objective.assign(p.num_vars, lp::Rat(0));

  for (const Link& a : net.links) {
    if (a.is_exit) continue;
    std::vector<lp::Rat> row(p.num_vars, lp::Rat(0));
    for (int g : ix.out_of[a.id]) row[g] += 1;
    for (int g : ix.into[a.id]) row[g] -= 1;
    p.add_row(lp::RowType::Eq, std::move(row), rat(lambda[a.id]),
              "conservation(link " + std::to_string(a.id) + ")");
  }
  for (int g = 0; g < nf; ++g) {
    const auto& ref = ix.movements[g];
    const Junction& jn = net.junctions[ref.junction];
    std::vector<lp::Rat> row(p.num_vars, lp::Rat(0));
    row[g] = 1;
    for (const auto& b : blocks) {
      if (b.junction != ref.junction) continue;
      for (int k = 0; k < b.num_phases; ++k)
        row[b.base + k] -= rat(b.weight) *
                           rat(rate(net, jn.id, jn.phases[k].id, ref.movement,
                                    b.state));
    }
    p.add_row(lp::RowType::Le, std::move(row), lp::Rat(0),
              service_label(ref.movement));
  }
  add_mix_rows(p, net, blocks, pi.joint);

  const lp::Solution sol = lp::solve(p);
  RegionCertificate cert;
  if (sol.status == lp::Status::Infeasible) {
    for (int r : sol.witness_rows) cert.witness.push_back(p.labels[r]);
    return cert;
  }
  if (sol.status != lp::Status::Optimal)
    throw LpError("feasibility program reported unbounded");
  cert.feasible = true;
  cert.flows.resize(nf, 0.0);
  for (int g = 0; g < nf; ++g) cert.flows[g] = lp::to_double(sol.x[g]);
  const auto theta = theta_values(blocks, sol.x);
  cert.theta = make_theta_blocks(net, blocks, pi.joint, theta);
  cert.max_residual =
      recheck_residual(net, ix, blocks, theta, cert.flows, lambda);
  if (cert.max_residual > kResidualTol)
    throw LpError("certificate residual exceeds tolerance");
  return cert;
}

ThroughputResult max_throughput_multiplier(const Network& net,
                                           const NetIndex& ix,
                                           const StateDistribution& pi,
                                           std::span<const double> direction) {
  pi.validate(net);
  check_direction(net, direction);

  const int nf = ix.num_movements();
  const auto blocks = make_blocks(net, pi, nf);
  const int rho_col = nf + theta_count(blocks);
  lp::Problem p;
  p.num_vars = rho_col + 1;
  p.objective.assign(p.num_vars, lp::Rat(0));
  p.objective[rho_col] = 1;

  for (const Link& a : net.links) {
    if (a.is_exit) continue;
    std::vector<lp::Rat> row(p.num_vars, lp::Rat(0));
    for (int g : ix.out_of[a.id]) row[g] += 1;
    for (int g : ix.into[a.id]) row[g] -= 1;
    row[rho_col] = -rat(direction[a.id]);
    p.add_row(lp::RowType::Eq, std::move(row), lp::Rat(0),
              "conservation(link " + std::to_string(a.id) + ")");
  }
  for (int g = 0; g < nf; ++g) {
    const auto& ref = ix.movements[g];
    const Junction& jn = net.junctions[ref.junction];
    std::vector<lp::Rat> row(p.num_vars, lp::Rat(0));
    row[g] = 1;
    for (const auto& b : blocks) {
      if (b.junction != ref.junction) continue;
      for (int k = 0; k < b.num_phases; ++k)
        row[b.base + k] -= rat(b.weight) *
                           rat(rate(net, jn.id, jn.phases[k].id, ref.movement,
                                    b.state));
    }
    p.add_row(lp::RowType::Le, std::move(row), lp::Rat(0),
              service_label(ref.movement));
  }
  add_mix_rows(p, net, blocks, pi.joint);

  const lp::Solution sol = lp::solve(p);
  ThroughputResult res;
  if (sol.status == lp::Status::Unbounded) {
    res.unbounded = true;
    return res;
  }
  if (sol.status != lp::Status::Optimal)
    throw LpError("throughput program reported infeasible");
  res.rho_star = lp::to_double(sol.objective);
  res.cert.feasible = true;
  res.cert.flows.resize(nf, 0.0);
  for (int g = 0; g < nf; ++g) res.cert.flows[g] = lp::to_double(sol.x[g]);
  const auto theta = theta_values(blocks, sol.x);
  res.cert.theta = make_theta_blocks(net, blocks, pi.joint, theta);
  std::vector<double> lambda_eff(net.links.size(), 0.0);
  for (std::size_t a = 0; a < lambda_eff.size(); ++a)
    lambda_eff[a] = res.rho_star * direction[a];
  res.cert.max_residual =
      recheck_residual(net, ix, blocks, theta, res.cert.flows, lambda_eff);
  if (res.cert.max_residual > kResidualTol)
    throw LpError("certificate residual exceeds tolerance");
  return res;
}

std::vector<double> routed_flows(const Network& net, const NetIndex& ix,
                                 const TurnRatios& ratios,
                                 std::span<const double> lambda) {
  ratios.validate(ix);
  if (lambda.size() != net.links.size())
    throw ConfigError("demand vector length must match link count");
  const int n = static_cast<int>(net.links.size());

  // Link throughput x solves x = lambda + T x with T the ratio-weighted
  // adjacency; Gaussian elimination with partial pivoting.
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> x(lambda.begin(), lambda.end());
  for (int i = 0; i < n; ++i) a[i][i] = 1.0;
  for (int g = 0; g < ix.num_movements(); ++g) {
    const Movement& m = ix.movements[g].movement;
    a[m.to][m.from] -= ratios.fraction[g];
  }
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) < 1e-12)
      throw ConfigError("turn ratios recirculate flow; routing has no fixed point");
    std::swap(a[piv], a[c]);
    std::swap(x[piv], x[c]);
    for (int r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0.0) continue;
      const double f = a[r][c] / a[c][c];
      for (int k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      x[r] -= f * x[c];
    }
  }
  for (int i = 0; i < n; ++i) x[i] = std::max(0.0, x[i] / a[i][i]);

  std::vector<double> flows(ix.num_movements(), 0.0);
  for (int g = 0; g < ix.num_movements(); ++g)
    flows[g] = x[ix.movements[g].movement.from] * ratios.fraction[g];
  return flows;
}

ThroughputResult max_throughput_multiplier_routed(
    const Network& net, const NetIndex& ix, const StateDistribution& pi,
    const TurnRatios& ratios, std::span<const double> direction) {
  pi.validate(net);
  check_direction(net, direction);
  const std::vector<double> unit = routed_flows(net, ix, ratios, direction);

  ThroughputResult res;
  bool touched = false;
  for (double u : unit) touched = touched || u > 0.0;
  if (!touched) {
    res.unbounded = true;  // demand never reaches a junction
    return res;
  }

  const auto blocks = make_blocks(net, pi, 0);
  const int rho_col = theta_count(blocks);
  lp::Problem p;
  p.num_vars = rho_col + 1;
  p.objective.assign(p.num_vars, lp::Rat(0));
  p.objective[rho_col] = 1;

  for (int g = 0; g < ix.num_movements(); ++g) {
    if (unit[g] <= 0.0) continue;
    const auto& ref = ix.movements[g];
    const Junction& jn = net.junctions[ref.junction];
    std::vector<lp::Rat> row(p.num_vars, lp::Rat(0));
    row[rho_col] = rat(unit[g]);
    for (const auto& b : blocks) {
      if (b.junction != ref.junction) continue;
      for (int k = 0; k < b.num_phases; ++k)
        row[b.base + k] -= rat(b.weight) *
                           rat(rate(net, jn.id, jn.phases[k].id, ref.movement,
                                    b.state));
    }
    p.add_row(lp::RowType::Le, std::move(row), lp::Rat(0),
              service_label(ref.movement));
  }
  add_mix_rows(p, net, blocks, pi.joint);

  const lp::Solution sol = lp::solve(p);
  if (sol.status == lp::Status::Unbounded) {
    res.unbounded = true;
    return res;
  }
  if (sol.status != lp::Status::Optimal)
    throw LpError("routed throughput program reported infeasible");
  res.rho_star = lp::to_double(sol.objective);
  res.cert.feasible = true;
  res.cert.flows.resize(ix.num_movements(), 0.0);
  for (int g = 0; g < ix.num_movements(); ++g)
    res.cert.flows[g] = res.rho_star * unit[g];
  const auto theta = theta_values(blocks, sol.x);
  res.cert.theta = make_theta_blocks(net, blocks, pi.joint, theta);
  std::vector<double> lambda_eff(net.links.size(), 0.0);
  for (std::size_t a = 0; a < lambda_eff.size(); ++a)
    lambda_eff[a] = res.rho_star * direction[a];
  res.cert.max_residual =
      recheck_residual(net, ix, blocks, theta, res.cert.flows, lambda_eff);
  if (res.cert.max_residual > kResidualTol)
    throw LpError("certificate residual exceeds tolerance");
  return res;
}

SweepResult empirical_multiplier(const Scenario& sc,
                                 const ControllerConfig& ctrl,
                                 const SweepSpec& spec) {
  if (!(spec.resolution > 0.0))
    throw ConfigError("sweep resolution must be positive");
  if (!(spec.rho_lo > 0.0) || spec.rho_hi < spec.rho_lo)
    throw ConfigError("sweep range must satisfy 0 < lo <= hi");
  auto k_lo = static_cast<std::int64_t>(
      std::ceil(spec.rho_lo / spec.resolution - 1e-9));
  const auto k_hi = static_cast<std::int64_t>(
      std::floor(spec.rho_hi / spec.resolution + 1e-9));
  if (k_lo < 1) k_lo = 1;
  if (k_hi < k_lo) throw ConfigError("sweep grid is empty");

  SweepResult out;
  auto eval = [&](std::int64_t k) {
    const double rho = static_cast<double>(k) * spec.resolution;
    const Scenario run_at = sc.scaled(rho);
    auto controller = make_controller(run_at, ctrl);
    const Trace tr = run(run_at, *controller);
    bool ok = false;
    if (spec.criterion == SweepCriterion::NoCapacityBreach) {
      ok = !tr.any_breach();
    } else {
      const double v = spec.v_threshold;
      const StabilityReport rep = stability_statistic(tr, std::span(&v, 1));
      ok = rep.worst[0] <= spec.tau;
    }
    out.evaluations.push_back({rho, ok});
    return ok;
  };

  if (eval(k_hi)) {
    out.rho_hat = static_cast<double>(k_hi) * spec.resolution;
    out.hit_upper_bound = true;
  } else if (k_lo == k_hi || !eval(k_lo)) {
    out.rho_hat = 0.0;  // even the lowest grid point fails
  } else {
    std::int64_t pass = k_lo, fail = k_hi;
    while (fail - pass > 1) {
      const std::int64_t mid = pass + (fail - pass) / 2;
      (eval(mid) ? pass : fail) = mid;
    }
    out.rho_hat = static_cast<double>(pass) * spec.resolution;
  }
  std::sort(out.evaluations.begin(), out.evaluations.end(),
            [](const SweepEvaluation& a, const SweepEvaluation& b) {
              return a.rho < b.rho;
            });
  return out;
}

std::string certificate_json(const Network& net, const NetIndex& ix,
                             const RegionCertificate& cert,
                             std::span<const double> lambda) {
  nlohmann::json doc;
  doc["schema"] = "bpsim.certificate.v1";
  doc["feasible"] = cert.feasible;
  doc["max_residual"] = cert.max_residual;
  doc["lambda"] = std::vector<double>(lambda.begin(), lambda.end());
  if (!cert.flows.empty()) {
    nlohmann::json flows = nlohmann::json::array();
    for (int g = 0; g < ix.num_movements(); ++g) {
      const auto& ref = ix.movements[g];
      flows.push_back({{"junction", ref.junction},
                       {"from", ref.movement.from},
                       {"to", ref.movement.to},
                       {"flow", cert.flows[g]}});
    }
    doc["flows"] = std::move(flows);
  }
  if (!cert.theta.empty()) {
    nlohmann::json theta = nlohmann::json::array();
    for (const ThetaBlock& b : cert.theta) {
      nlohmann::json weights;
      const Junction& jn = net.junctions[b.junction];
      for (std::size_t k = 0; k < b.weights.size(); ++k)
        weights[std::to_string(jn.phases[k].id)] = b.weights[k];
      theta.push_back({{"junction", b.junction},
                       {"states", b.states},
                       {"weights", std::move(weights)}});
    }
    doc["theta"] = std::move(theta);
  }
  doc["witness"] = cert.witness;
  return doc.dump(2) + "\n";
}

}  // namespace bpsim
