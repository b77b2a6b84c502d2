#include <doctest.h>

#include <algorithm>

#include "bpsim/lp.hpp"

using namespace bpsim::lp;

namespace {

Rat r(long num, long den = 1) { return Rat(num, den); }

}  // namespace

TEST_CASE("bounded optimum lands on the vertex") {
  Problem p;
  p.num_vars = 2;
  p.objective = {r(1), r(1)};
  p.add_row(RowType::Le, {r(1), r(0)}, r(2), "x<=2");
  p.add_row(RowType::Le, {r(0), r(1)}, r(3), "y<=3");

  const auto s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.objective == r(5));
  CHECK(s.x[0] == r(2));
  CHECK(s.x[1] == r(3));
}

TEST_CASE("equality rows bind exactly") {
  Problem p;
  p.num_vars = 2;
  p.objective = {r(1), r(0)};
  p.add_row(RowType::Eq, {r(1), r(1)}, r(1), "x+y=1");

  const auto s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.objective == r(1));
  CHECK(s.x[0] + s.x[1] == r(1));
}

TEST_CASE("rational arithmetic is exact") {
  Problem p;
  p.num_vars = 1;
  p.objective = {r(1)};
  p.add_row(RowType::Eq, {r(3)}, r(1), "3x=1");

  const auto s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.x[0] == r(1, 3));  // no float would pass this

  Problem q;
  q.num_vars = 2;
  q.objective = {r(7, 13), r(1, 9)};
  q.add_row(RowType::Le, {r(2, 3), r(1, 6)}, r(5, 4), "mix");
  q.add_row(RowType::Le, {r(0), r(1)}, r(3, 2), "cap");
  const auto t = solve(q);
  REQUIRE(t.status == Status::Optimal);
  // Hand solve: x pays (7/13)/(2/3) = 21/26 per unit of budget against y's
  // (1/9)/(1/6) = 2/3, so the whole 5/4 goes to x: x = 15/8, y = 0.
  CHECK(t.x[0] == r(15, 8));
  CHECK(t.x[1] == r(0));
  CHECK(t.objective == r(105, 104));
}

TEST_CASE("infeasibility names the clashing rows") {
  Problem p;
  p.num_vars = 1;
  p.add_row(RowType::Le, {r(-1)}, r(-5), "x>=5");
  p.add_row(RowType::Le, {r(1)}, r(1), "x<=1");

  const auto s = solve(p);
  REQUIRE(s.status == Status::Infeasible);
  REQUIRE_FALSE(s.witness_rows.empty());
  for (int row : s.witness_rows) {
    CHECK(row >= 0);
    CHECK(row < 2);
  }
  // Both bounds participate in the contradiction.
  CHECK(s.witness_rows.size() == 2);
}

TEST_CASE("unbounded ray is detected") {
  Problem p;
  p.num_vars = 2;
  p.objective = {r(1), r(0)};
  p.add_row(RowType::Le, {r(0), r(1)}, r(1), "y<=1");
  CHECK(solve(p).status == Status::Unbounded);
}

TEST_CASE("degenerate and redundant rows terminate") {
  Problem p;
  p.num_vars = 2;
  p.objective = {r(1), r(1)};
  // The same facet three times plus a redundant slack copy; Bland's rule
  // must still leave the cycle.
  p.add_row(RowType::Le, {r(1), r(1)}, r(1), "a");
  p.add_row(RowType::Le, {r(1), r(1)}, r(1), "b");
  p.add_row(RowType::Le, {r(2), r(2)}, r(2), "c");
  p.add_row(RowType::Le, {r(1), r(0)}, r(1), "d");

  const auto s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.objective == r(1));
}

TEST_CASE("feasibility-only problems skip the objective") {
  Problem p;
  p.num_vars = 2;
  p.add_row(RowType::Eq, {r(1), r(1)}, r(1), "sum");
  p.add_row(RowType::Le, {r(1), r(0)}, r(1, 2), "half");

  const auto s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.x[0] + s.x[1] == r(1));
  CHECK(s.x[0] <= r(1, 2));
}

TEST_CASE("negative rhs equality is reachable") {
  Problem p;
  p.num_vars = 1;
  p.objective = {r(0)};
  p.add_row(RowType::Eq, {r(-2)}, r(-1), "neg");
  const auto s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.x[0] == r(1, 2));
}
