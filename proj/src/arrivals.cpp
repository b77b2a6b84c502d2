#include "bpsim/arrivals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bpsim/errors.hpp"
#include "bpsim/rng.hpp"

namespace bpsim {

namespace {

// CDF inversion over explicit weights; u in [0,1).
int pick_index(const std::vector<double>& weights, double u) {
  double acc = 0.0;
  for (int i = 0; i < static_cast<int>(weights.size()); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return static_cast<int>(weights.size()) - 1;  // guards rounding of sum to <1
}

}  // namespace

double ArrivalProcess::sample(std::uint64_t seed, std::int64_t t) const {
  const auto slot = static_cast<std::uint64_t>(t);
  switch (kind) {
    case Kind::Constant:
      return rate;
    case Kind::IidBounded: {
      const double u = uniform01(seed, stream, slot);
      return values[pick_index(weights, u)];
    }
    case Kind::TimeProfile: {
      std::int64_t period = 0;
      for (const auto& p : pieces) period += p.duration;
      std::int64_t pos = t % period;
      double r = pieces.back().rate;
      for (const auto& p : pieces) {
        if (pos < p.duration) {
          r = p.rate;
          break;
        }
        pos -= p.duration;
      }
      const double noise =
          1.0 - jitter + 2.0 * jitter * uniform01(seed, stream, slot);
      return std::clamp(r * noise, 0.0, a_max);
    }
  }
  return 0.0;
}

double ArrivalProcess::mean_rate() const {
  switch (kind) {
    case Kind::Constant:
      return rate;
    case Kind::IidBounded: {
      double m = 0.0;
      for (std::size_t i = 0; i < values.size(); ++i)
        m += values[i] * weights[i];
      return m;
    }
    case Kind::TimeProfile: {
      // Noise has mean 1 and the clamp never binds (validated), so the
      // long-run rate is the duration-weighted piece mean.
      double total = 0.0, mass = 0.0;
      for (const auto& p : pieces) {
        total += static_cast<double>(p.duration);
        mass += static_cast<double>(p.duration) * p.rate;
      }
      return mass / total;
    }
  }
  return 0.0;
}

void ArrivalProcess::validate() const {
  const std::string where = "arrivals[link " + std::to_string(link) + "]";
  if (!(a_max > 0.0) || !std::isfinite(a_max))
    throw ConfigError(where + ": a_max must be positive and finite");
  switch (kind) {
    case Kind::Constant:
      if (rate < 0.0 || !std::isfinite(rate))
        throw ConfigError(where + ": negative rate");
      if (rate > a_max) throw ConfigError(where + ": rate exceeds a_max");
      break;
    case Kind::IidBounded: {
      if (values.empty() || values.size() != weights.size())
        throw ConfigError(where + ": values/weights must be nonempty and equal length");
      for (double v : values)
        if (v < 0.0 || v > a_max || !std::isfinite(v))
          throw ConfigError(where + ": values must lie in [0, a_max]");
      double sum = 0.0;
      for (double w : weights) {
        if (w < 0.0) throw ConfigError(where + ": negative weight");
        sum += w;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError(where + ": weights must sum to 1");
      break;
    }
    case Kind::TimeProfile: {
      if (pieces.empty()) throw ConfigError(where + ": empty profile");
      for (const auto& p : pieces) {
        if (p.duration <= 0) throw ConfigError(where + ": piece duration must be >= 1");
        if (p.rate < 0.0 || !std::isfinite(p.rate))
          throw ConfigError(where + ": negative piece rate");
        // The clamp must never bind or the long-run rate drifts from the
        // declared profile mean.
        if (p.rate * (1.0 + jitter) > a_max + 1e-12)
          throw ConfigError(where + ": peak rate times (1+jitter) exceeds a_max");
      }
      if (jitter < 0.0 || jitter > 1.0)
        throw ConfigError(where + ": jitter must be in [0, 1]");
      break;
    }
  }
}

int StateProcess::initial_index(std::uint64_t seed) const {
  switch (kind) {
    case Kind::Fixed:
      return 0;
    case Kind::Iid:
      return pick_index(pi, uniform01(seed, stream, 0));
    case Kind::Markov:
      return initial;
  }
  return 0;
}

int StateProcess::next_index(std::uint64_t seed, std::int64_t t,
                             int prev) const {
  switch (kind) {
    case Kind::Fixed:
      return 0;
    case Kind::Iid:
      return pick_index(pi, uniform01(seed, stream, static_cast<std::uint64_t>(t)));
    case Kind::Markov:
      return pick_index(matrix[prev],
                        uniform01(seed, stream, static_cast<std::uint64_t>(t)));
  }
  return prev;
}

std::vector<double> StateProcess::stationary(int num_states) const {
  switch (kind) {
    case Kind::Fixed: {
      std::vector<double> out(std::max(num_states, 1), 0.0);
      out[0] = 1.0;
      return out;
    }
    case Kind::Iid:
      return pi;
    case Kind::Markov: {
      // Solve pi P = pi, sum pi = 1 by Gaussian elimination on
      // (P^T - I) pi = 0 with the last row replaced by the normalization.
      const int n = static_cast<int>(matrix.size());
      std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          a[i][j] = matrix[j][i] - (i == j ? 1.0 : 0.0);
      for (int j = 0; j < n; ++j) a[n - 1][j] = 1.0;
      a[n - 1][n] = 1.0;
      for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
          if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        if (std::abs(a[col][col]) < 1e-14)
          throw ConfigError("state process: singular chain, no unique stationary distribution");
        for (int r = 0; r < n; ++r) {
          if (r == col) continue;
          const double f = a[r][col] / a[col][col];
          for (int c = col; c <= n; ++c) a[r][c] -= f * a[col][c];
        }
      }
      std::vector<double> out(n);
      for (int i = 0; i < n; ++i) out[i] = a[i][n] / a[i][i];
      return out;
    }
  }
  return {};
}

void StateProcess::validate(int num_states) const {
  const std::string where = "states[junction " + std::to_string(junction) + "]";
  switch (kind) {
    case Kind::Fixed:
      break;
    case Kind::Iid: {
      if (static_cast<int>(pi.size()) != num_states)
        throw ConfigError(where + ": pi length must match the junction's states");
      double sum = 0.0;
      for (double p : pi) {
        if (p < 0.0) throw ConfigError(where + ": negative probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError(where + ": pi must sum to 1");
      break;
    }
    case Kind::Markov: {
      const int n = static_cast<int>(matrix.size());
      if (n != num_states)
        throw ConfigError(where + ": matrix size must match the junction's states");
      for (const auto& row : matrix) {
        if (static_cast<int>(row.size()) != n)
          throw ConfigError(where + ": matrix must be square");
        double sum = 0.0;
        for (double p : row) {
          if (p < 0.0) throw ConfigError(where + ": negative transition probability");
          sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
          throw ConfigError(where + ": transition rows must sum to 1");
      }
      if (initial < 0 || initial >= n)
        throw ConfigError(where + ": initial state out of range");

      // Irreducible: one strongly connected component over positive entries.
      auto reach = [&](bool transpose) {
        std::vector<bool> seen(n, false);
        std::vector<int> stack{0};
        seen[0] = true;
        while (!stack.empty()) {
          const int u = stack.back();
          stack.pop_back();
          for (int v = 0; v < n; ++v) {
            const double p = transpose ? matrix[v][u] : matrix[u][v];
            if (p > 0.0 && !seen[v]) {
              seen[v] = true;
              stack.push_back(v);
            }
          }
        }
        return seen;
      };
      for (bool t : {false, true})
        for (bool s : reach(t))
          if (!s) throw ConfigError(where + ": chain is not irreducible");

      // Aperiodic: gcd over cycles via BFS levels, gcd(level_u+1-level_v).
      std::vector<int> level(n, -1);
      level[0] = 0;
      std::vector<int> queue{0};
      int g = 0;
      for (std::size_t h = 0; h < queue.size(); ++h) {
        const int u = queue[h];
        for (int v = 0; v < n; ++v) {
          if (matrix[u][v] <= 0.0) continue;
          if (level[v] < 0) {
            level[v] = level[u] + 1;
            queue.push_back(v);
          } else {
            g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
          }
        }
      }
      if (g != 1) throw ConfigError(where + ": chain is periodic");
      break;
    }
  }
}

TurnRatios TurnRatios::uniform(const NetIndex& ix) {
  TurnRatios tr;
  tr.fraction.assign(ix.num_movements(), 0.0);
  for (const auto& outs : ix.out_of) {
    if (outs.empty()) continue;
    const double f = 1.0 / static_cast<double>(outs.size());
    for (int g : outs) tr.fraction[g] = f;
  }
  return tr;
}

void TurnRatios::validate(const NetIndex& ix) const {
  if (static_cast<int>(fraction.size()) != ix.num_movements())
    throw ConfigError("turn ratios: fraction per movement required");
  for (double f : fraction)
    if (f < 0.0 || !std::isfinite(f))
      throw ConfigError("turn ratios: fractions must be nonnegative");
  for (std::size_t a = 0; a < ix.out_of.size(); ++a) {
    const auto& outs = ix.out_of[a];
    if (outs.empty()) continue;
    double sum = 0.0;
    for (int g : outs) sum += fraction[g];
    if (std::abs(sum - 1.0) > 1e-9)
      throw ConfigError("turn ratios: fractions of link " + std::to_string(a) +
                        " sum to " + std::to_string(sum) + ", expected 1");
  }
}

}  // namespace bpsim
