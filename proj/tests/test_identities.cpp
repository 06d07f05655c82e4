#include "doctest.h"
#include "lietoda/identities.hpp"

using namespace lietoda;
using Eigen::MatrixXd;

namespace {
MatrixXd X(Side s, int n, int i) { return standard_generator(s, n, 1, i); }

MatrixXd unimodular_diag(std::initializer_list<double> d) {
  Eigen::VectorXd v(static_cast<int>(d.size()) + 1);
  int k = 0;
  double prod = 1;
  for (double x : d) v(k++) = x, prod *= x;
  v(k) = 1.0 / prod;
  return v.asDiagonal();
}
}  // namespace

TEST_CASE("identities at the unit element") {
  for (int n = 1; n <= 4; ++n) {
    MatrixXd I = MatrixXd::Identity(n + 1, n + 1);
    for (int j = 1; j <= n; ++j) {
      CHECK(first_jacobi_residual(I, n, j).max_abs == 0.0);
      if (j < n) CHECK(second_jacobi_residual(I, n, j, j + 1).max_abs == 0.0);
    }
  }
}

TEST_CASE("explicit A2 elements") {
  MatrixXd G = matrix_exp(X(Side::minus, 2, 1)) * matrix_exp(X(Side::plus, 2, 1));
  for (int j = 1; j <= 2; ++j) CHECK(first_jacobi_residual(G, 2, j).max_abs < 1e-12);
  MatrixXd H = matrix_exp(X(Side::minus, 2, 1) + X(Side::minus, 2, 2));
  CHECK(second_jacobi_residual(H, 2, 1, 2).max_abs < 1e-12);
  CHECK(second_jacobi_residual(H, 2, 2, 1).max_abs < 1e-12);
  CHECK_THROWS_AS(second_jacobi_residual(H, 3, 1, 3), std::invalid_argument);
}

TEST_CASE("random group elements are unimodular and reproducible") {
  for (int n = 1; n <= 4; ++n) {
    auto a = random_group_element(n, 42);
    auto b = random_group_element(n, 42);
    CHECK(a.G == b.G);
    CHECK(std::abs(a.G.determinant() - 1.0) < 1e-9);
    for (int j = 2; j <= n; ++j) CHECK(std::abs(compound(a.G, j).determinant() - 1.0) < 1e-9);
  }
  CHECK_FALSE(random_group_element(3, 1).G == random_group_element(3, 2).G);
}

TEST_CASE("vanishing tau is a singular configuration") {
  MatrixXd G = MatrixXd::Identity(3, 3);
  G(0, 0) = 0, G(0, 1) = 1, G(1, 0) = -1, G(1, 1) = 0;
  try {
    first_jacobi_residual(G, 2, 2);
    FAIL("no exception");
  } catch (const SingularConfiguration& e) {
    CHECK(e.site == 1);
  }
}

TEST_CASE("torus action keeps the residuals small") {
  auto g = random_group_element(3, 7);
  MatrixXd G = unimodular_diag({1.7, 0.4, 2.2}) * g.G * unimodular_diag({0.6, 1.9, 0.8});
  for (int j = 1; j <= 3; ++j) {
    CHECK(first_jacobi_residual(G, 3, j).max_abs < 1e-9);
    if (j < 3) CHECK(second_jacobi_residual(G, 3, j, j + 1).max_abs < 1e-9);
  }
}

TEST_CASE("residuals grow linearly with a perturbation") {
  auto g = random_group_element(3, 11);
  auto perturbed = [&](double eps) {
    MatrixXd G = g.G;
    G(3, 3) += eps;  // moves det G off 1
    return first_jacobi_residual(G, 3, 3).max_abs;
  };
  double r6 = perturbed(1e-6), r5 = perturbed(1e-5);
  CHECK(r6 > 1e-9);
  CHECK(r5 / r6 == doctest::Approx(10.0).epsilon(0.2));
}

TEST_CASE("recurrence for Q functions") {
  auto g = random_group_element(3, 5);
  // a = b = 1 is the first identity at site i +- 1
  auto rec = recurrence_residual(g.G, 3, 2, 1, 1, +1);
  auto jac = first_jacobi_residual(g.G, 3, 3);
  CHECK(rec.max_abs < 1e-12);
  CHECK(jac.max_abs < 1e-12);
  CHECK(recurrence_residual(g.G, 3, 2, 1, 1, -1).max_abs < 1e-9);

  for (int n = 3; n <= 4; ++n) {
    auto h = random_group_element(n, 100 + n);
    for (int sign : {+1, -1})
      for (int i = 1; i <= n; ++i) {
        if (i + sign < 1 || i + sign > n) continue;
        for (int a = 1; a <= n; ++a)
          for (int b = 1; b <= n; ++b) CHECK(recurrence_residual(h.G, n, i, a, b, sign).max_abs < 1e-9);
      }
  }

  // empty words: Q_{0,b} is the plain lowering element, Q_{a,0} the raising one
  auto w = t_word(3, +1, 2, 1);
  REQUIRE(w);
  CHECK(*w == Word{2, 1});
  CHECK(q_function(g.G, 3, +1, 0, 2, 1) == doctest::Approx(matrix_element(g.G, 3, 1, {}, *w)));
  CHECK(q_function(g.G, 3, +1, 2, 0, 1) == doctest::Approx(matrix_element(g.G, 3, 1, {1, 2}, {})));
  CHECK(q_function(g.G, 3, +1, 0, 0, 2) == doctest::Approx(tau_of(g.G, 3, 2)));
  CHECK(q_function(g.G, 3, +1, 0, 0, 4) == 1.0);
  CHECK_FALSE(r_word(3, +1, 3, 2));
  CHECK(*r_word(3, -1, 2, 3) == Word{3, 2});
  CHECK_THROWS_AS(recurrence_residual(g.G, 3, 3, 1, 1, +1), std::invalid_argument);
}

TEST_CASE("seeded sweeps are deterministic") {
  SweepSettings s;
  s.max_rank = 3;
  s.samples = 20;
  s.seed = 9;
  auto a = jacobi_sweep(s);
  s.jobs = 3;
  auto b = jacobi_sweep(s);
  REQUIRE(a.size() == b.size());
  for (size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].to_json().dump() == b[k].to_json().dump());
    CHECK(a[k].pass);
  }
}
