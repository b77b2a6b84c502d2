#pragma once

#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace bpsim::lp {

// Exact rational arithmetic: feasibility answers are decided by pivoting, not
// tolerances, and infeasibility certificates are exact.
using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const Rat& r) { return r.convert_to<double>(); }

enum class RowType { Eq, Le };

// maximize objective . x  subject to  rows x {=,<=} rhs,  x >= 0.
// An empty objective asks only for feasibility.
struct Problem {
  int num_vars = 0;
  std::vector<std::vector<Rat>> rows;
  std::vector<Rat> rhs;
  std::vector<RowType> types;
  std::vector<std::string> labels;  // one per row; names witness constraints
  std::vector<Rat> objective;

  int add_row(RowType type, std::vector<Rat> coeffs, Rat b, std::string label);
};

enum class Status { Optimal, Infeasible, Unbounded };

struct Solution {
  Status status = Status::Infeasible;
  std::vector<Rat> x;       // structural variable values when not infeasible
  Rat objective = 0;
  // Infeasible: original row indexes with nonzero Farkas multipliers; the
  // constraint families that cannot hold together.
  std::vector<int> witness_rows;
};

// Dense two-phase simplex with Bland's rule (terminates on any input).
Solution solve(const Problem& p);

}  // namespace bpsim::lp
