#include "doctest.h"
#include "lietoda/identities.hpp"
#include "lietoda/lattice.hpp"

#include <sstream>

using namespace lietoda;
using Eigen::MatrixXd;

namespace {
struct Run {
  FlowSetup s;
  KernelField K;
  TauField T;
};

FlowSetup setup(int n, int m1, int m2, Grid2D g, bool corner = true) {
  FlowSetup s;
  s.n = n;
  s.grid = g;
  s.minus = GradedLagrangian::standard(Side::minus, n, m1);
  s.plus = GradedLagrangian::standard(Side::plus, n, m2);
  if (corner) s.origin_x = g.x(0), s.origin_y = g.y(0);
  return s;
}

Run run(FlowSetup s, DerivativeMode mode, int depth) {
  s.with_derivatives = mode == DerivativeMode::exact;
  Run r{s, build_kernel(s), {}};
  r.T = compute_tau(r.K, depth, mode);
  return r;
}

// polynomial grade-0 data of the A2/A3 demos
void poly_grade0(FlowSetup& s) {
  if (s.n == 3) {
    s.minus.set(0, 2, CoeffFn::poly({0.1, 0.4}));
    s.plus.set(0, 1, CoeffFn::poly({0.0, -0.3, 0.2}));
    s.plus.set(0, 3, CoeffFn::constant(0.25));
    return;
  }
  s.minus.set(0, 1, CoeffFn::poly({0.0, 0.5}));
  s.plus.set(0, 2, CoeffFn::poly({0.2, 0.0, 0.3}));
}

double field_max(const Field2D& f, int ring = 2) {
  double m = 0;
  for (int ix = ring; ix < f.nx - ring; ++ix)
    for (int iy = ring; iy < f.ny - ring; ++iy)
      if (std::isfinite(f(ix, iy))) m = std::max(m, std::abs(f(ix, iy)));
  return m;
}
}  // namespace

TEST_CASE("unit kernel") {
  auto s = setup(3, 1, 1, Grid2D::centered(11, 0.1));
  s.minus = GradedLagrangian::zero(Side::minus, 3);
  s.plus = GradedLagrangian::zero(Side::plus, 3);
  auto r = run(s, DerivativeMode::finite_difference, 1);
  for (int i = 0; i <= 4; ++i)
    for (double v : r.T.tau(i).v) CHECK(v == 1.0);
  for (int i = 1; i <= 3; ++i)
    for (double v : r.T.theta(i).v) CHECK(v == doctest::Approx(1.0));
  // Toda needs unit grade-1 coefficients
  CHECK_THROWS_AS(toda_residual(r.T, s.minus, s.plus), ContractError);
}

TEST_CASE("A1 closed form") {
  auto r = run(setup(1, 1, 1, Grid2D::centered(), false), DerivativeMode::exact, 1);
  const Grid2D& g = r.K.grid;
  double e = 0, eth = 0;
  for (int ix = 0; ix < g.Nx; ix += 7)
    for (int iy = 0; iy < g.Ny; iy += 7) {
      double t = 1 + g.x(ix) * g.y(iy);
      e = std::max(e, std::abs(r.T.tau(1)(ix, iy) - t));
      if (std::abs(t) > 0.1) eth = std::max(eth, std::abs(r.T.theta(1)(ix, iy) * t * t - 1.0));
    }
  CHECK(e < 1e-10);
  CHECK(eth < 1e-9);
  // the two corners with xy = -1 are singular
  CHECK(r.T.singular_nodes.size() == 2);
  auto rep = toda_residual(r.T, r.s.minus, r.s.plus);
  CHECK(rep.pass);
  CHECK(rep.max_abs < 1e-6);

  // finite differences away from the zeros
  auto f = run(setup(1, 1, 1, Grid2D::centered(101, 0.01), false), DerivativeMode::finite_difference, 1);
  CHECK(toda_residual(f.T, f.s.minus, f.s.plus).max_abs < 1e-6);
}

TEST_CASE("orientation is pinned: the flipped minus flow breaks Toda") {
  auto s = setup(1, 1, 1, Grid2D::centered(41, 0.02), false);
  s.minus.set(1, 1, CoeffFn::constant(-1.0));
  auto r = run(s, DerivativeMode::finite_difference, 1);
  // tau = 1 - xy and the residual is -2 theta, not zero
  CHECK(r.T.tau(1)(40, 40) == doctest::Approx(1 - 0.16));
  CHECK(field_max(toda_fields(r.T)[0].field) > 1.0);
  CHECK_THROWS_AS(toda_residual(r.T, s.minus, s.plus), ContractError);
}

TEST_CASE("alpha fields are normalized matrix elements") {
  auto s = setup(3, 2, 2, Grid2D::centered(21, 0.05));
  auto r = run(s, DerivativeMode::exact, 2);
  for (int ix : {3, 11, 17})
    for (int iy : {2, 9, 18}) {
      const MatrixXd& K = r.K.at(ix, iy);
      for (int i = 1; i <= 3; ++i) {
        double tau = r.T.tau(i)(ix, iy);
        CHECK(tau == doctest::Approx(matrix_element(K, 3, i, {}, {})).epsilon(1e-12));
        for (int sg : {+1, -1})
          for (int m = 1; m <= 2; ++m) {
            auto tw = t_word(3, sg, m, i);
            auto rw = r_word(3, sg, m, i);
            double ra = tw ? matrix_element(K, 3, i, {}, *tw) / tau : 0.0;
            double rb = rw ? matrix_element(K, 3, i, *rw, {}) / tau : 0.0;
            CHECK(r.T.alpha(sg, m, i)(ix, iy) == doctest::Approx(ra).epsilon(1e-10));
            CHECK(r.T.alphabar(sg, m, i)(ix, iy) == doctest::Approx(rb).epsilon(1e-10));
          }
      }
    }
}

TEST_CASE("p fields against the two-term expansion") {
  auto s = setup(2, 2, 1, Grid2D::centered(11, 0.05));
  auto r = run(s, DerivativeMode::exact, 2);
  PFields P = compute_p(r.T, s.minus, s.plus);
  CHECK_FALSE(P.grade0);
  const MatrixXd& K = r.K.at(7, 4);
  double a2 = matrix_element(K, 2, 2, {}, {2}) / matrix_element(K, 2, 2, {}, {});
  double a1 = matrix_element(K, 2, 1, {}, {1}) / matrix_element(K, 2, 1, {}, {});
  // p^(1_1 = phi^1_1 + phi^2_1 alpha^{+1}_2, p^(1_2 = phi^1_2 - phi^2_1 alpha^{-1}_1
  CHECK(P.p(1, 1)(7, 4) == doctest::Approx(1.0 + a2).epsilon(1e-12));
  CHECK(P.p(1, 2)(7, 4) == doctest::Approx(1.0 - a1).epsilon(1e-12));
  // top level: the top coefficient, zero where the generator does not exist
  CHECK(P.p(2, 1)(7, 4) == 1.0);
  CHECK(P.p(2, 2)(7, 4) == 0.0);
  // m2 = 1: pbar^(1 is identically one
  for (double v : P.pbar(1, 2).v) CHECK(v == 1.0);
  CHECK(P.p(1, 0)(3, 3) == 0.0);
  CHECK(P.p(1, 3)(3, 3) == 0.0);

  // m1 = 3 needs alpha words of length 2
  auto s3 = setup(3, 3, 1, Grid2D::centered(11, 0.05));
  auto shallow = run(s3, DerivativeMode::exact, 1);
  CHECK_THROWS_AS(compute_p(shallow.T, s3.minus, s3.plus), ContractError);
}

TEST_CASE("Toda on A2 and A3 with polynomial flows, end sites included") {
  for (int n : {2, 3}) {
    auto s = setup(n, 1, 1, Grid2D::centered());
    poly_grade0(s);
    auto r = run(s, DerivativeMode::finite_difference, 1);
    CHECK(r.T.singular_nodes.empty());
    auto rep = toda_residual(r.T, s.minus, s.plus);
    CHECK(rep.max_abs < 1e-6);
    auto f = toda_fields(r.T);
    CHECK(field_max(f.front().field) < 1e-6);
    CHECK(field_max(f.back().field) < 1e-6);
    CHECK(field_max(f.front().field) > 0.0);
    auto ex = run(s, DerivativeMode::exact, 1);
    CHECK(toda_residual(ex.T, s.minus, s.plus).max_abs < 1e-11);
  }
}

TEST_CASE("halving the grid step shrinks the residual") {
  auto residual = [](int N, double h) {
    auto s = setup(2, 1, 1, Grid2D::centered(N, h));
    poly_grade0(s);
    auto r = run(s, DerivativeMode::finite_difference, 1);
    return toda_residual(r.T, s.minus, s.plus).max_abs;
  };
  double coarse = residual(51, 0.04), fine = residual(101, 0.02);
  CHECK(coarse / fine >= 3.5);
}

TEST_CASE("UToda(1,1) reduces to Toda field by field") {
  auto s = setup(3, 1, 1, Grid2D::centered(41, 0.025));
  poly_grade0(s);
  auto r = run(s, DerivativeMode::finite_difference, 1);
  PFields P = compute_p(r.T, s.minus, s.plus);
  ResidualFields u = utoda_fields(r.T, P), t = toda_fields(r.T), mixed;
  for (auto& f : u) {
    if (f.name.rfind("mixed", 0) == 0)
      mixed.push_back(f);
    else
      CHECK(field_max(f.field, 0) == 0.0);
  }
  CHECK(max_field_difference(mixed, t) < 1e-12);
}

TEST_CASE("UToda systems at round-off with exact derivatives") {
  struct Case {
    int n, m1, m2;
  };
  for (Case c : {Case{3, 1, 2}, Case{3, 2, 1}, Case{3, 2, 2}, Case{4, 2, 3}}) {
    CAPTURE(c.n);
    CAPTURE(c.m1);
    CAPTURE(c.m2);
    auto s = setup(c.n, c.m1, c.m2, Grid2D::centered(15, 0.03));
    s.minus.set(1, 1, CoeffFn::poly({1.0, 0.2}));
    s.plus.set(1, 2, CoeffFn::poly({1.1, -0.3}));
    s.plus.set(c.m2, 1, CoeffFn::poly({1.0, 0.1}));
    auto r = run(s, DerivativeMode::exact, std::max(c.m1, c.m2));
    PFields P = compute_p(r.T, s.minus, s.plus);
    CHECK(utoda_residual(r.T, P).max_abs < 1e-9);
    CHECK(alpha_derivative_residual(r.T, P, std::max(c.m1, c.m2)).max_abs < 1e-9);
  }
}

TEST_CASE("UToda(2,2) with finite differences") {
  auto s = setup(3, 2, 2, Grid2D::centered(201, 0.005));
  s.minus.set(1, 3, CoeffFn::poly({0.9, 0.0, 0.3}));
  s.plus.set(2, 1, CoeffFn::poly({1.0, 0.1}));
  auto r = run(s, DerivativeMode::finite_difference, 2);
  PFields P = compute_p(r.T, s.minus, s.plus);
  CHECK(utoda_residual(r.T, P).max_abs < 1e-6);
  CHECK(alpha_derivative_residual(r.T, P, 2).max_abs < 1e-5);
}

TEST_CASE("grade-0 terms are refused beyond depth one") {
  auto s = setup(3, 2, 2, Grid2D::centered(11, 0.05));
  s.plus.set(0, 1, CoeffFn::constant(0.3));
  auto r = run(s, DerivativeMode::exact, 2);
  PFields P = compute_p(r.T, s.minus, s.plus);
  CHECK(P.grade0);
  CHECK_THROWS_AS(utoda_fields(r.T, P), ContractError);
}

TEST_CASE("no plus flow: alpha does not depend on y") {
  auto s = setup(2, 2, 1, Grid2D::centered(21, 0.05));
  s.plus = GradedLagrangian::zero(Side::plus, 2);
  auto r = run(s, DerivativeMode::finite_difference, 2);
  for (int i = 1; i <= 2; ++i)
    for (int m = 1; m <= 2; ++m) CHECK(field_max(r.T.alpha_y(+1, m, i)) == 0.0);
}

TEST_CASE("GToda against UToda(2,2) and mixed patterns") {
  const CartanMatrix C = cartan_matrix(Series::A, 3);
  auto s = setup(3, 2, 2, Grid2D::centered(201, 0.005));
  s.minus.set(1, 2, CoeffFn::poly({1.0, 0.2}));
  auto r = run(s, DerivativeMode::finite_difference, 2);
  GTodaFields G = gtoda_fields(C, r.T, s.minus, s.plus);
  PFields P = compute_p(r.T, s.minus, s.plus);
  ResidualFields U = utoda_fields(r.T, P);
  double d = 0;
  for (int i = 1; i <= 3; ++i) {
    d = std::max(d, field_max(G.p1[i - 1] - P.p(1, i), 0));
    d = std::max(d, field_max(G.pbar1[i - 1] - P.pbar(1, i), 0));
    const std::string tag = "[" + std::to_string(i) + "]", rt = "[r=1,i=" + std::to_string(i) + "]";
    for (auto& g : G.residuals)
      for (auto& u : U)
        if ((g.name == "mixed" + tag && u.name == g.name) || (g.name == "p_y" + tag && u.name == "p_y" + rt) ||
            (g.name == "pbar_x" + tag && u.name == "pbar_x" + rt))
          d = std::max(d, field_max(g.field - u.field, 0));
  }
  CHECK(d < 1e-12);
  CHECK(gtoda_residual(C, r.T, s.minus, s.plus).max_abs < 1e-5);

  // the printed sign of the first-order equations fails: 2 p1_y - R is O(1)
  Field2D p1y = diff_y(G.p1[1], r.K.grid.hy);
  for (auto& g : G.residuals)
    if (g.name == "p_y[2]") CHECK(field_max(2.0 * p1y - g.field) > 1e-2);

  // s = (1, 0), sbar = (0, 1)
  auto sm = s;
  sm.minus.clear_coefficient(2, 2);
  sm.plus.clear_coefficient(2, 1);
  auto rm = run(sm, DerivativeMode::finite_difference, 2);
  CHECK(gtoda_residual(C, rm.T, sm.minus, sm.plus).max_abs < 1e-5);

  // all zero: Toda with a source
  auto sz = s;
  for (int i = 1; i <= 2; ++i) sz.minus.clear_coefficient(2, i), sz.plus.clear_coefficient(2, i);
  auto rz = run(sz, DerivativeMode::finite_difference, 2);
  CHECK(gtoda_residual(C, rz.T, sz.minus, sz.plus).max_abs < 1e-6);

  auto sb = s;
  sb.minus.set(2, 1, CoeffFn::constant(0.5));
  CHECK_THROWS_AS(gtoda_fields(C, r.T, sb.minus, sb.plus), std::invalid_argument);
  CHECK_THROWS_AS(gtoda_fields(cartan_matrix(Series::B, 3), r.T, s.minus, s.plus), std::invalid_argument);
}

TEST_CASE("field CSV round trip") {
  auto s = setup(2, 1, 1, Grid2D::centered(7, 0.1));
  auto r = run(s, DerivativeMode::finite_difference, 1);
  std::ostringstream os;
  write_field_csv(os, r.K.grid, {{1, &r.T.tau(1)}, {2, &r.T.tau(2)}});
  CHECK(os.str().rfind("site,ix,iy,x,y,value", 0) == 0);
  std::istringstream is(os.str());
  Grid2D g;
  auto back = read_field_csv(is, g);
  REQUIRE(back.size() == 2);
  CHECK(g.Nx == 7);
  CHECK(g.hx == doctest::Approx(0.1));
  CHECK(field_max(back[2] - r.T.tau(2), 0) < 1e-15);
}
