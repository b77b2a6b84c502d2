#pragma once

#include <cstdint>
#include <vector>

#include "bpsim/network.hpp"

namespace bpsim {

// Exogenous demand at one entry link. All kinds are bounded by a_max (the
// admissibility second-moment requirement comes for free from boundedness)
// and rate-ergodic: the long-run sample mean converges to mean_rate().
struct ArrivalProcess {
  enum class Kind { Constant, IidBounded, TimeProfile };

  struct Piece {
    std::int64_t duration = 0;  // slots
    double rate = 0.0;
  };

  Kind kind = Kind::Constant;
  LinkId link = 0;
  std::uint64_t stream = 0;  // rng stream id; distinct per process

  double rate = 0.0;   // Constant kind
  double a_max = 0.0;  // hard per-slot bound, all kinds

  // IidBounded: value distribution with finite support in [0, a_max].
  std::vector<double> values;
  std::vector<double> weights;  // same length, nonnegative, sum 1

  // TimeProfile: piecewise-constant rates repeating with period = total
  // duration, each slot multiplied by iid noise uniform on [1-jitter, 1+jitter].
  std::vector<Piece> pieces;
  double jitter = 0.0;

  // Realized vehicles for the slot; pure in (seed, t).
  double sample(std::uint64_t seed, std::int64_t t) const;
  double mean_rate() const;
  void validate() const;  // throws ConfigError
};

// Per-junction traffic-state evolution: a single fixed state, iid draws from
// pi, or a Markov chain (validated irreducible + aperiodic so a unique
// stationary distribution exists for the capacity analysis).
struct StateProcess {
  enum class Kind { Fixed, Iid, Markov };

  Kind kind = Kind::Fixed;
  JunctionId junction = 0;
  std::uint64_t stream = 0;

  std::vector<double> pi;                   // Iid: distribution over state indexes
  std::vector<std::vector<double>> matrix;  // Markov: row-stochastic
  int initial = 0;                          // Markov: start state index

  int initial_index(std::uint64_t seed) const;
  // State index for slot t given the index at t-1; pure in (seed, t, prev).
  int next_index(std::uint64_t seed, std::int64_t t, int prev) const;
  // Long-run occupancy; what the capacity LP weighs hulls with.
  std::vector<double> stationary(int num_states) const;
  void validate(int num_states) const;  // throws ConfigError
};

// Fixed routing fractions over each link's outgoing movements.
struct TurnRatios {
  std::vector<double> fraction;  // per global movement id

  static TurnRatios uniform(const NetIndex& ix);
  void validate(const NetIndex& ix) const;  // throws ConfigError
};

}  // namespace bpsim
