#include "doctest.h"
#include "lietoda/flows.hpp"

#include <random>

using namespace lietoda;
using Eigen::MatrixXd;

namespace {
double maxdiff(const MatrixXd& a, const MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

FlowSetup a_setup(int n, Grid2D g = Grid2D::centered()) {
  FlowSetup s;
  s.n = n;
  s.grid = g;
  s.minus = GradedLagrangian::standard(Side::minus, n, 1);
  s.plus = GradedLagrangian::standard(Side::plus, n, 1);
  return s;
}
}  // namespace

TEST_CASE("coefficient functions") {
  CHECK(CoeffFn::constant(2.5)(7.0) == 2.5);
  CHECK(CoeffFn::poly({1.0, 2.0, 3.0})(2.0) == doctest::Approx(17.0));
  CHECK(CoeffFn::exponential(2.0, -1.0)(1.0) == doctest::Approx(2.0 * std::exp(-1.0)));
  CHECK(CoeffFn::constant(1.0).is_constant(1.0));
  CHECK_FALSE(CoeffFn::poly({1.0, 0.1}).is_constant(1.0));
  auto c = CoeffFn::poly({0.2, 0.0, 0.3});
  auto back = CoeffFn::from_json(c.to_json());
  CHECK(back(0.7) == c(0.7));
  CHECK_THROWS_AS(CoeffFn::from_json({{"kind", "exp"}, {"params", {1.0}}}), ConfigError);
  CHECK_THROWS_AS(CoeffFn::from_json({{"kind", "sin"}, {"params", {1.0}}}), ConfigError);
}

TEST_CASE("standard generators and grade checks") {
  // minus grade 2 site 1 of A3: e_{3,1}
  MatrixXd g = standard_generator(Side::minus, 3, 2, 1);
  CHECK(g(2, 0) == 1.0);
  CHECK(g.cwiseAbs().sum() == 1.0);
  CHECK(standard_generator(Side::plus, 3, 2, 1) == g.transpose());
  MatrixXd H = principal_grading_defining(3);
  CHECK(maxdiff(H * g - g * H, -2.0 * g) == 0.0);

  auto L = GradedLagrangian::standard(Side::plus, 3, 2);
  CHECK(L.coefficient(1, 2, 0.3) == 1.0);
  CHECK(L.coefficient(2, 1, 0.3) == 1.0);
  CHECK(L.coefficient(2, 3, 0.3) == 0.0);
  CHECK(L.grade_is_constant(2, 1.0));
  L.check_grades();
  L.set(2, 1, CoeffFn::constant(0.0));
  CHECK_FALSE(L.grade_is_constant(2, 1.0));
  L.clear_coefficient(2, 1);
  CHECK(L.find(2, 1) == nullptr);

  GradedLagrangian bad(Side::plus, 2, 1);
  bad.add_raw({1, 1, standard_generator(Side::minus, 2, 1, 1), CoeffFn::constant(1.0)});
  CHECK_THROWS_AS(bad.check_grades(), ContractError);
  GradedLagrangian deep(Side::plus, 3, 1);
  deep.set(2, 1, CoeffFn::constant(1.0));
  CHECK_THROWS_AS(deep.check_grades(), ContractError);
  CHECK(GradedLagrangian::zero(Side::plus, 3).is_zero());
}

TEST_CASE("S-matrix flows against exponentials") {
  auto zero = GradedLagrangian::zero(Side::minus, 2);
  auto p0 = solve_smatrix(zero, -1.0, 0.01, 201, 100, MatrixXd::Identity(3, 3));
  for (auto& M : p0.M) CHECK(M == MatrixXd::Identity(3, 3));

  // A1 minus flow with constant X-: M-^{-1}(x) = I + x X-
  auto L1 = GradedLagrangian::standard(Side::minus, 1, 1);
  auto p1 = solve_smatrix(L1, -1.0, 0.01, 201, 100, MatrixXd::Identity(2, 2));
  MatrixXd F = standard_generator(Side::minus, 1, 1, 1);
  double e1 = 0;
  for (int k = 0; k < p1.size(); ++k) e1 = std::max(e1, maxdiff(p1.M[k], MatrixXd::Identity(2, 2) + p1.t(k) * F));
  CHECK(e1 < 1e-14);

  // A2 with X-_1 + X-_2
  auto L2 = GradedLagrangian::standard(Side::minus, 2, 1);
  auto p2 = solve_smatrix(L2, 0.0, 0.01, 101, 0, MatrixXd::Identity(3, 3));
  MatrixXd X = L2(0.0);
  double e2 = 0;
  for (int k = 0; k < p2.size(); ++k) e2 = std::max(e2, maxdiff(p2.M[k], matrix_exp(p2.t(k) * X)));
  CHECK(e2 < 1e-10);

  // plus side with a polynomial coefficient: composition of sub-intervals
  auto Lp = GradedLagrangian::standard(Side::plus, 3, 2);
  Lp.set(1, 2, CoeffFn::poly({1.0, 0.4, -0.3}));
  MatrixXd M0 = MatrixXd::Identity(4, 4);
  auto whole = solve_smatrix(Lp, -1.0, 0.01, 201, 0, M0);
  auto first = solve_smatrix(Lp, -1.0, 0.01, 101, 0, M0);
  auto second = solve_smatrix(Lp, 0.0, 0.01, 101, 0, first.M.back());
  CHECK(maxdiff(second.M.back(), whole.M.back()) < 1e-9);
  // anchoring in the middle reproduces the same path
  auto mid = solve_smatrix(Lp, -1.0, 0.01, 201, 100, whole.M[100]);
  CHECK(maxdiff(mid.M.front(), M0) < 1e-9);

  CHECK_THROWS_AS(solve_smatrix(L2, 0.0, 0.01, 10, 10, MatrixXd::Identity(3, 3)), std::invalid_argument);
}

TEST_CASE("kernel element") {
  auto s = a_setup(2, Grid2D::centered(21, 0.1));
  s.minus = GradedLagrangian::zero(Side::minus, 2);
  s.plus = GradedLagrangian::zero(Side::plus, 2);
  auto K0 = build_kernel(s);
  for (auto& k : K0.K) CHECK(k == MatrixXd::Identity(3, 3));

  // A1 closed form on the default grid
  auto a1 = build_kernel(a_setup(1));
  double e = 0;
  for (int ix = 0; ix < a1.grid.Nx; ++ix)
    for (int iy = 0; iy < a1.grid.Ny; ++iy)
      e = std::max(e, std::abs(a1.at(ix, iy)(0, 0) - (1 + a1.grid.x(ix) * a1.grid.y(iy))));
  CHECK(e < 1e-10);

  // A3 with polynomial coefficients: unimodular, and constant in x without a minus flow
  auto s3 = a_setup(3, Grid2D::centered(41, 0.05));
  s3.plus.set(0, 2, CoeffFn::poly({0.2, 0.5}));
  s3.minus.set(0, 1, CoeffFn::poly({0.0, 0.5}));
  auto K3 = build_kernel(s3);
  std::mt19937 rng(4);
  std::uniform_int_distribution<int> node(0, 40);
  double det = 0;
  for (int k = 0; k < 100; ++k) det = std::max(det, std::abs(K3.at(node(rng), node(rng)).determinant() - 1.0));
  CHECK(det < 1e-9);

  s3.minus = GradedLagrangian::zero(Side::minus, 3);
  auto Kp = build_kernel(s3);
  double var = 0;
  for (int ix = 0; ix < 41; ++ix) var = std::max(var, maxdiff(Kp.at(ix, 7), Kp.at(20, 7)));
  CHECK(var < 1e-14);

  // exact derivative data
  auto sd = a_setup(2, Grid2D::centered(21, 0.1));
  sd.with_derivatives = true;
  auto Kd = build_kernel(sd);
  REQUIRE(Kd.has_derivatives);
  const size_t at = 5 * 21 + 8;
  CHECK(maxdiff(Kd.Kxy[at], sd.plus(Kd.grid.y(8)) * Kd.K[at] * sd.minus(Kd.grid.x(5))) < 1e-13);
  double fd = (Kd.at(6, 8) - Kd.at(4, 8))(0, 0) / 0.2;
  CHECK(std::abs(fd - Kd.Kx[at](0, 0)) < 1e-2);
}

TEST_CASE("highest-weight matrix elements") {
  MatrixXd I3 = MatrixXd::Identity(3, 3);
  CHECK(matrix_element(I3, 2, 1, {}, {}) == 1.0);
  for (int j = 1; j <= 2; ++j) CHECK(matrix_element(I3, 2, j, {j}, {j}) == doctest::Approx(1.0));

  MatrixXd K = matrix_exp(standard_generator(Side::minus, 2, 1, 1));
  CHECK(matrix_element(K, 2, 1, {}, {}) == doctest::Approx(1.0));
  CHECK(matrix_element(K, 2, 1, {1}, {}) == doctest::Approx(1.0));

  // the defining ladder has depth 2: words of length 3 vanish, and X+_2 kills <1|
  CHECK(MatrixElement(2, 1, {1, 2, 1}, {}).vanishes());
  CHECK(MatrixElement(2, 1, {2}, {}).vanishes());
  CHECK_FALSE(MatrixElement(2, 1, {1, 2}, {}).vanishes());
  CHECK_THROWS_AS(MatrixElement(2, 3, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(MatrixElement(2, 1, {4}, {}), std::invalid_argument);

  // derivative along a curve by multilinearity
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  MatrixXd A(4, 4), B(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) A(i, j) = u(rng), B(i, j) = u(rng);
  MatrixElement me(3, 2, {2, 1}, {3});
  auto G = [&](double s) { return MatrixXd(matrix_exp(A + s * B)); };
  const double h = 1e-5;
  double fd = (me(G(h)) - me(G(-h))) / (2 * h);
  MatrixXd Gd = (G(h) - G(-h)) / (2 * h);
  CHECK(me.derivative(G(0), Gd) == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("compound matrices are multiplicative") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  MatrixXd A(4, 4), B(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) A(i, j) = u(rng), B(i, j) = u(rng);
  for (int j = 1; j <= 3; ++j) CHECK(maxdiff(compound(A * B, j), compound(A, j) * compound(B, j)) < 1e-13);
  CHECK(compound(A, 2).rows() == 6);
  CHECK(compound(A, 1) == A);
}

TEST_CASE("time flows") {
  auto space = GradedLagrangian::standard(Side::plus, 1, 1);
  auto none = GradedLagrangian::zero(Side::plus, 1);
  auto r0 = solve_timeflow(space, none, -0.5, 0.05, 21, 10, 0.0, 0.05, 11, 0, MatrixXd::Identity(2, 2));
  CHECK(r0.consistency.max_abs == 0.0);
  for (int iy = 0; iy < 21; ++iy)
    for (int it = 0; it < 11; ++it) CHECK(maxdiff(r0.at(iy, it), r0.at(iy, 0)) == 0.0);

  // commuting flows: M = exp((y + tbar) X+)
  auto r1 = solve_timeflow(space, space, -0.5, 0.05, 21, 10, -0.2, 0.05, 11, 4, MatrixXd::Identity(2, 2));
  CHECK(r1.consistency.max_abs < 1e-10);
  CHECK(r1.consistency.pass);
  MatrixXd E = standard_generator(Side::plus, 1, 1, 1);
  double e = 0;
  for (int iy = 0; iy < 21; ++iy)
    for (int it = 0; it < 11; ++it)
      e = std::max(e, maxdiff(r1.at(iy, it), matrix_exp((-0.5 + 0.05 * iy - 0.2 + 0.05 * it) * E)));
  CHECK(e < 1e-10);

  // non-commuting time flow is reported, not thrown
  auto space2 = GradedLagrangian::standard(Side::plus, 2, 1);
  auto time2 = GradedLagrangian::zero(Side::plus, 2);
  time2.set(1, 1, CoeffFn::poly({0.0, 1.0}));
  auto r2 = solve_timeflow(space2, time2, -0.5, 0.05, 21, 10, 0.0, 0.05, 11, 0, MatrixXd::Identity(3, 3));
  CHECK_FALSE(r2.consistency.pass);
}
