#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "co2i/lp.hpp"
#include "lp_oracle.hpp"

using namespace co2i::lp;
using co2i::testing::enumerate_vertices;
using co2i::testing::random_boxed_lp;

namespace {

using Rows = std::vector<std::pair<int, double>>;

StandardFormLP box_lp() {
  // min x  s.t. -x <= 0, x <= 5
  LpBuilder b;
  b.add_col("x", 1.0);
  b.add_row("lower", RowSense::LessEqual, 0.0, {{0, -1.0}});
  b.add_row("upper", RowSense::LessEqual, 5.0, {{0, 1.0}});
  return b.build();
}

StandardFormLP square_lp(double cut = 1.5) {
  // min -x-y  s.t. x <= 1, y <= 1, x + y <= cut
  LpBuilder b;
  b.add_col("x", -1.0);
  b.add_col("y", -1.0);
  b.add_row("x_max", RowSense::LessEqual, 1.0, {{0, 1.0}});
  b.add_row("y_max", RowSense::LessEqual, 1.0, {{1, 1.0}});
  b.add_row("sum", RowSense::LessEqual, cut, {{0, 1.0}, {1, 1.0}});
  return b.build();
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}


void check_certified(const StandardFormLP& lp, const LPSolution& sol) {
  const auto c = certify(lp, sol);
  CHECK(c.primal_infeasibility <= 1e-7);
  CHECK(c.dual_residual <= 1e-7);
  CHECK(c.dual_sign_violation <= 1e-7);
  CHECK(c.complementary_slackness <= 1e-7);
  CHECK(c.duality_gap <= 1e-7 * std::max(1.0, std::abs(sol.objective)));
}

void check_farkas(const StandardFormLP& lp, const std::vector<double>& y) {
  REQUIRE(y.size() == static_cast<size_t>(lp.num_rows()));
  Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), lp.num_rows());
  Eigen::VectorXd aty = lp.A.transpose() * yv;
  CHECK(aty.lpNorm<Eigen::Infinity>() <= 1e-9);
  for (int i = 0; i < lp.num_rows(); ++i)
    if (lp.sense[i] == RowSense::LessEqual) CHECK(y[i] >= -1e-12);
  CHECK(dot(lp.rhs, y) < -1e-9);
}

}  // namespace

TEST_CASE("bound-active optimum") {
  auto lp = box_lp();
  auto sol = solve(lp);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(0.0));
  CHECK(sol.objective == doctest::Approx(0.0));
  check_certified(lp, sol);
  auto act = active_set(lp, sol);
  CHECK(act.rows == std::vector<int>{0});
  CHECK(sol.defining_rows == std::vector<int>{0});
}

TEST_CASE("two-variable polytope") {
  auto lp = square_lp();
  auto sol = solve(lp);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(-1.5));
  CHECK(enumerate_vertices(lp).objective == doctest::Approx(-1.5));
  check_certified(lp, sol);
}

TEST_CASE("contradictory bounds are infeasible with a Farkas certificate") {
  LpBuilder b;
  b.add_col("x", 1.0);
  b.add_row("a", RowSense::LessEqual, -1.0, {{0, 1.0}});
  b.add_row("b", RowSense::LessEqual, -1.0, {{0, -1.0}});
  auto lp = b.build();
  auto sol = solve(lp);
  REQUIRE(sol.status == SolveStatus::Infeasible);
  check_farkas(lp, sol.certificate);
}

TEST_CASE("infeasible general rows give a Farkas certificate") {
  LpBuilder b;
  b.add_col("x", 0.0);
  b.add_col("y", 0.0);
  b.add_row("x>=0", RowSense::LessEqual, 0.0, {{0, -1.0}});
  b.add_row("y>=0", RowSense::LessEqual, 0.0, {{1, -1.0}});
  b.add_row("sum<=1", RowSense::LessEqual, 1.0, {{0, 1.0}, {1, 1.0}});
  b.add_row("x-y=3", RowSense::Equal, 3.0, {{0, 1.0}, {1, -1.0}});
  b.add_row("x+2y>=2", RowSense::LessEqual, -2.0, {{0, -1.0}, {1, -2.0}});
  auto lp = b.build();
  auto sol = solve(lp);
  REQUIRE(sol.status == SolveStatus::Infeasible);
  check_farkas(lp, sol.certificate);
}

TEST_CASE("empty infeasible row") {
  LpBuilder b;
  b.add_col("x", 1.0);
  b.add_row("zero", RowSense::LessEqual, -1.0, {});
  auto lp = b.build();
  auto sol = solve(lp);
  REQUIRE(sol.status == SolveStatus::Infeasible);
  check_farkas(lp, sol.certificate);
}

TEST_CASE("unbounded with a ray") {
  LpBuilder b;
  b.add_col("x", -1.0);
  b.add_col("y", 0.0);
  b.add_row("x>=0", RowSense::LessEqual, 0.0, {{0, -1.0}});
  b.add_row("x-y<=1", RowSense::LessEqual, 1.0, {{0, 1.0}, {1, -1.0}});
  auto lp = b.build();
  auto sol = solve(lp);
  REQUIRE(sol.status == SolveStatus::Unbounded);
  const auto& d = sol.certificate;
  CHECK(dot(lp.cost, d) < 0.0);
  for (double v : lp.row_activity(d)) CHECK(v <= 1e-12);
}

TEST_CASE("equality rows are always active") {
  // min x + 2y  s.t. x + y = 2, x >= 0, y >= 0
  LpBuilder b;
  b.add_col("x", 1.0);
  b.add_col("y", 2.0);
  b.add_row("balance", RowSense::Equal, 2.0, {{0, 1.0}, {1, 1.0}});
  b.add_row("x>=0", RowSense::LessEqual, 0.0, {{0, -1.0}});
  b.add_row("y>=0", RowSense::LessEqual, 0.0, {{1, -1.0}});
  auto lp = b.build();
  auto sol = solve(lp);
  REQUIRE(sol.status == SolveStatus::Optimal);
  auto act = active_set(lp, sol);
  CHECK(std::find(act.rows.begin(), act.rows.end(), 0) != act.rows.end());
  CHECK(sol.x[0] == doctest::Approx(2.0));
  check_certified(lp, sol);

  // Zero-dual equality row stays in the set too.
  LpBuilder z;
  z.add_col("x", 1.0);
  z.add_col("y", 0.0);
  z.add_row("x>=1", RowSense::LessEqual, -1.0, {{0, -1.0}});
  z.add_row("link", RowSense::Equal, 0.0, {{0, 1.0}, {1, -1.0}});
  auto lpz = z.build();
  auto solz = solve(lpz);
  REQUIRE(solz.status == SolveStatus::Optimal);
  auto actz = active_set(lpz, solz);
  CHECK(std::find(actz.rows.begin(), actz.rows.end(), 1) != actz.rows.end());
}

TEST_CASE("degenerate vertex reports tight zero-dual rows") {
  // min -x - y  s.t. x <= 1, y <= 1, x + y <= 2: all three tight at (1,1).
  auto lp = square_lp(2.0);
  auto sol = solve(lp);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(1.0));
  CHECK(sol.x[1] == doctest::Approx(1.0));
  auto act = active_set(lp, sol);
  CHECK(act.rows.size() + act.tight_zero_dual.size() == 3);
  CHECK(act.rows.size() == 2);
  CHECK(act.tight_zero_dual.size() == 1);
  check_certified(lp, sol);
}

TEST_CASE("basis solve") {
  SUBCASE("zero perturbation") {
    auto lp = square_lp();
    auto sol = solve(lp);
    auto dx = basis_solve(lp, sol, {});
    CHECK(dx.norm() == 0.0);
  }
  SUBCASE("active lower bound") {
    LpBuilder b;
    b.add_col("x", 1.0);
    b.add_row("x>=d", RowSense::LessEqual, -3.0, {{0, -1.0}});
    auto lp = b.build();
    auto sol = solve(lp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    // Raising d by 1 lowers the rhs of -x <= -d by 1.
    auto dx = basis_solve(lp, sol, {{0, -1.0}});
    CHECK(dx[0] == doctest::Approx(1.0));
  }
  SUBCASE("objective change matches a re-solve") {
    auto lp = square_lp();
    auto sol = solve(lp);
    auto dx = basis_solve(lp, sol, {{2, 0.1}});
    double dobj = 0.0;
    for (int j = 0; j < 2; ++j) dobj += lp.cost[j] * dx[j];
    CHECK(dobj == doctest::Approx(-0.1));
    auto resolved = solve(square_lp(1.6));
    CHECK(resolved.objective - sol.objective == doctest::Approx(dobj));
  }
  SUBCASE("rows outside the defining system are rejected") {
    auto lp = box_lp();
    auto sol = solve(lp);
    CHECK_THROWS_AS(basis_solve(lp, sol, {{1, 1.0}}), std::invalid_argument);
  }
  SUBCASE("free column at a vertex-less optimum") {
    LpBuilder b;
    b.add_col("x", 1.0);
    b.add_col("y", 0.0);
    b.add_row("x>=0", RowSense::LessEqual, 0.0, {{0, -1.0}});
    auto lp = b.build();
    auto sol = solve(lp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK_THROWS_AS(BasisFactorization(lp, sol), SingularBasis);
  }
}

TEST_CASE("factorization is computed once for many right-hand sides") {
  auto lp = square_lp();
  auto sol = solve(lp);
  counters().reset();
  BasisFactorization f(lp, sol);
  for (int k = 0; k < 10; ++k) f.solve({{2, 0.01 * k}});
  CHECK(counters().basis_factorizations == 1);
}

TEST_CASE("random boxed LPs agree with vertex enumeration") {
  std::mt19937 rng(20240611);
  int infeasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 2;
    auto lp = random_boxed_lp(rng, n);
    auto oracle = enumerate_vertices(lp);
    auto sol = solve(lp);
    CAPTURE(trial);
    if (!oracle.feasible) {
      ++infeasible;
      REQUIRE(sol.status == SolveStatus::Infeasible);
      check_farkas(lp, sol.certificate);
      continue;
    }
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(oracle.objective).epsilon(1e-9));
    check_certified(lp, sol);
  }
  CHECK(infeasible > 0);
  CHECK(infeasible < 200);
}

TEST_CASE("basis solve stays consistent with re-solving for small perturbations") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> small(-1e-4, 1e-4);
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 40; ++trial) {
    auto lp = random_boxed_lp(rng, 3);
    auto sol = solve(lp);
    if (sol.status != SolveStatus::Optimal) continue;
    auto act = active_set(lp, sol);
    if (!act.tight_zero_dual.empty()) continue;  // degenerate, stability radius may be 0
    bool unique = true;
    for (double d : sol.duals) unique = unique && (d == 0.0 || std::abs(d) > 1e-6);
    if (!unique) continue;
    SparseRhs db;
    auto perturbed = lp;
    for (int i : sol.defining_rows) {
      const double v = small(rng);
      db.emplace_back(i, v);
      perturbed.rhs[i] += v;
    }
    Eigen::VectorXd dx = basis_solve(lp, sol, db);
    auto resolved = solve(perturbed);
    REQUIRE(resolved.status == SolveStatus::Optimal);
    std::vector<double> x1(sol.x);
    for (int j = 0; j < 3; ++j) x1[j] += dx[j];
    CHECK(dot(lp.cost, x1) == doctest::Approx(resolved.objective).epsilon(1e-9));
    ++checked;
  }
  CHECK(checked >= 20);
}

TEST_CASE("determinism and serial/parallel agreement") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    auto lp = random_boxed_lp(rng, 3);
    auto a = solve(lp);
    auto b = solve(lp);
    SolveOptions par;
    par.parallel_pivot = true;
    auto c = solve(lp, par);
    CHECK(a.x == b.x);
    CHECK(a.basis == b.basis);
    CHECK(a.x == c.x);
    CHECK(a.duals == c.duals);
    CHECK(a.basis == c.basis);
  }
}

TEST_CASE("iteration cap raises NumericalFailure") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto lp = random_boxed_lp(rng, 3);
    auto sol = solve(lp);
    if (sol.iterations < 2) continue;
    SolveOptions opt;
    opt.max_iterations = 1;
    CHECK_THROWS_AS(solve(lp, opt), NumericalFailure);
    return;
  }
  FAIL("no multi-iteration LP generated");
}

TEST_CASE("Bland's rule still reaches the optimum") {
  std::mt19937 rng(3);
  SolveOptions opt;
  opt.degenerate_streak_for_bland = 1;
  for (int trial = 0; trial < 50; ++trial) {
    auto lp = random_boxed_lp(rng, 3);
    auto oracle = enumerate_vertices(lp);
    auto sol = solve(lp, opt);
    if (!oracle.feasible) {
      CHECK(sol.status == SolveStatus::Infeasible);
      continue;
    }
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(oracle.objective).epsilon(1e-9));
  }
}

TEST_CASE("dimension mismatch is rejected") {
  auto lp = box_lp();
  lp.rhs.push_back(1.0);
  CHECK_THROWS_AS(solve(lp), std::logic_error);
}
