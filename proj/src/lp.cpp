#include "bpsim/lp.hpp"

#include <stdexcept>

#include "bpsim/errors.hpp"

namespace bpsim::lp {

int Problem::add_row(RowType type, std::vector<Rat> coeffs, Rat b,
                     std::string label) {
  if (static_cast<int>(coeffs.size()) != num_vars)
    throw LpError("lp: row width does not match num_vars");
  rows.push_back(std::move(coeffs));
  rhs.push_back(std::move(b));
  types.push_back(type);
  labels.push_back(std::move(label));
  return static_cast<int>(rows.size()) - 1;
}

namespace {

// Dense tableau over rationals. Columns: structural, then slacks, then
// artificials; last column is the rhs. basis[r] is the basic column of row r.
struct Tableau {
  int m = 0;
  int ncols = 0;
  std::vector<std::vector<Rat>> a;  // m rows of ncols+1
  std::vector<Rat> obj;             // ncols reduced costs (maximize form)
  Rat objval = 0;
  std::vector<int> basis;

  void pivot(int row, int col) {
    const Rat p = a[row][col];
    for (Rat& v : a[row]) v /= p;
    for (int r = 0; r < m; ++r) {
      if (r == row) continue;
      const Rat f = a[r][col];
      if (f == 0) continue;
      for (int c = 0; c <= ncols; ++c) a[r][c] -= f * a[row][c];
    }
    const Rat g = obj[col];
    if (g != 0) {
      for (int c = 0; c < ncols; ++c) obj[c] -= g * a[row][c];
      objval += g * a[row][ncols];
    }
    basis[row] = col;
  }

  // Bland: entering = lowest column with positive reduced cost; leaving =
  // tightest ratio, ties by lowest basic column. Returns false at optimum.
  // Throws LpError via sentinel when unbounded (caller translates).
  enum class StepResult { Optimal, Pivoted, Unbounded };
  StepResult step(const std::vector<bool>& allowed) {
    int col = -1;
    for (int c = 0; c < ncols; ++c)
      if (allowed[c] && obj[c] > 0) {
        col = c;
        break;
      }
    if (col < 0) return StepResult::Optimal;
    int row = -1;
    Rat best;
    for (int r = 0; r < m; ++r) {
      if (a[r][col] <= 0) continue;
      const Rat ratio = a[r][ncols] / a[r][col];
      if (row < 0 || ratio < best ||
          (ratio == best && basis[r] < basis[row])) {
        row = r;
        best = ratio;
      }
    }
    if (row < 0) return StepResult::Unbounded;
    pivot(row, col);
    return StepResult::Pivoted;
  }
};

}  // namespace

Solution solve(const Problem& p) {
  const int m = static_cast<int>(p.rows.size());
  const int n = p.num_vars;
  for (const auto& row : p.rows)
    if (static_cast<int>(row.size()) != n)
      throw LpError("lp: ragged constraint matrix");

  // Column layout.
  int nslack = 0;
  for (auto t : p.types)
    if (t == RowType::Le) ++nslack;
  const int nart = m;  // one artificial per row; unused ones never enter
  const int ncols = n + nslack + nart;

  Tableau t;
  t.m = m;
  t.ncols = ncols;
  t.a.assign(m, std::vector<Rat>(ncols + 1, 0));
  t.obj.assign(ncols, 0);
  t.basis.assign(m, -1);

  int slack_at = n;
  std::vector<int> art_col(m), slack_of(m, -1);
  for (int r = 0; r < m; ++r) {
    auto& row = t.a[r];
    for (int c = 0; c < n; ++c) row[c] = p.rows[r][c];
    row[ncols] = p.rhs[r];
    int slack_col = -1;
    if (p.types[r] == RowType::Le) {
      slack_col = slack_at++;
      row[slack_col] = 1;
      slack_of[r] = slack_col;
    }
    bool negated = false;
    if (row[ncols] < 0) {
      for (int c = 0; c <= ncols; ++c) row[c] = -row[c];
      negated = true;  // a negated slack cannot start basic
    }
    if (slack_col >= 0 && !negated) {
      t.basis[r] = slack_col;
      art_col[r] = -1;
    } else {
      const int ac = n + nslack + r;
      row[ac] = 1;
      t.basis[r] = ac;
      art_col[r] = ac;
    }
  }

  // Phase 1: maximize -(sum of artificials). Expressed over the nonbasic
  // columns of rows whose artificial starts basic.
  bool need_phase1 = false;
  for (int r = 0; r < m; ++r) {
    if (art_col[r] < 0) continue;
    need_phase1 = true;
    for (int c = 0; c < ncols; ++c)
      if (c != art_col[r]) t.obj[c] += t.a[r][c];
    t.objval -= t.a[r][ncols];
  }

  std::vector<bool> allowed(ncols, true);
  if (need_phase1) {
    while (true) {
      auto res = t.step(allowed);
      if (res == Tableau::StepResult::Optimal) break;
      if (res == Tableau::StepResult::Unbounded)
        throw LpError("lp: phase 1 unbounded (internal)");
    }
    if (t.objval < 0) {
      // Farkas duals off final reduced costs. Rows carrying an artificial
      // column e_r: y_r = -(1 + cbar[art_r]). Rows whose slack started basic
      // have an untouched all-zero artificial column; their slack column is
      // e_r instead, giving y_r = -cbar[slack_r]. cbar is 0 on basic columns.
      Solution sol;
      sol.status = Status::Infeasible;
      for (int r = 0; r < m; ++r) {
        bool nonzero;
        if (art_col[r] >= 0) {
          const Rat cbar = t.basis[r] == art_col[r] ? Rat(0) : t.obj[art_col[r]];
          nonzero = cbar != -1;
        } else {
          const int sc = slack_of[r];
          const Rat cbar = t.basis[r] == sc ? Rat(0) : t.obj[sc];
          nonzero = cbar != 0;
        }
        if (nonzero) sol.witness_rows.push_back(r);
      }
      return sol;
    }
    // Drive surviving artificials out of the basis; an all-zero row is a
    // redundant constraint and pivots on nothing (harmless at level 0).
    for (int r = 0; r < m; ++r) {
      if (t.basis[r] < n + nslack) continue;
      for (int c = 0; c < n + nslack; ++c) {
        if (t.a[r][c] != 0) {
          t.pivot(r, c);
          break;
        }
      }
    }
  }

  // Artificials are done; never let one re-enter.
  for (int r = 0; r < m; ++r) allowed[n + nslack + r] = false;

  // Phase 2 objective: express maximize c.x over the current basis.
  t.obj.assign(ncols, 0);
  t.objval = 0;
  if (!p.objective.empty()) {
    if (static_cast<int>(p.objective.size()) != n)
      throw LpError("lp: objective width does not match num_vars");
    for (int c = 0; c < n; ++c) t.obj[c] = p.objective[c];
    for (int r = 0; r < m; ++r) {
      const int b = t.basis[r];
      if (b < 0 || b >= n) continue;
      const Rat cb = p.objective[b];
      if (cb == 0) continue;
      for (int c = 0; c < ncols; ++c) t.obj[c] -= cb * t.a[r][c];
      t.objval += cb * t.a[r][ncols];
    }
    // Basic columns must read exactly zero for Bland's rule to be sound.
    for (int r = 0; r < m; ++r)
      if (t.basis[r] >= 0) t.obj[t.basis[r]] = 0;
    while (true) {
      auto res = t.step(allowed);
      if (res == Tableau::StepResult::Optimal) break;
      if (res == Tableau::StepResult::Unbounded) {
        Solution sol;
        sol.status = Status::Unbounded;
        return sol;
      }
    }
  }

  Solution sol;
  sol.status = Status::Optimal;
  sol.x.assign(n, 0);
  for (int r = 0; r < m; ++r)
    if (t.basis[r] >= 0 && t.basis[r] < n) sol.x[t.basis[r]] = t.a[r][ncols];
  sol.objective = t.objval;
  return sol;
}

}  // namespace bpsim::lp
