#include "lietoda/identities.hpp"

#include <cmath>
#include <random>

namespace lietoda {

GroupElementSample random_group_element(int n, std::uint64_t seed, int factors) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> kind(0, 2), site(1, n);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const int N = n + 1;
  GroupElementSample s;
  s.n = n;
  s.seed = seed;
  s.G = Eigen::MatrixXd::Identity(N, N);
  for (int f = 0; f < factors; ++f) {
    int k = kind(rng), i = site(rng);
    double c = coef(rng);
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(N, N);
    if (k == 0) {
      Z(i - 1, i - 1) = 1.0;
      Z(i, i) = -1.0;
    } else if (k == 1) {
      Z(i - 1, i) = 1.0;
    } else {
      Z(i, i - 1) = 1.0;
    }
    s.G = s.G * matrix_exp(c * Z);
  }
  return s;
}

double tau_of(const Eigen::MatrixXd& G, int n, int i) {
  if (i == 0 || i == n + 1) return 1.0;
  if (i < 0 || i > n + 1) return 0.0;
  return G.topLeftCorner(i, i).determinant();
}

namespace {

double checked_tau(const Eigen::MatrixXd& G, int n, int i) {
  double t = tau_of(G, n, i);
  if (t == 0.0 || !std::isfinite(t))
    throw SingularConfiguration(i, "vanishing <" + std::to_string(i) + "|G|" + std::to_string(i) + ">");
  return t;
}

ResidualReport single(const std::string& name, double r, double tol, std::vector<int> where) {
  ResidualAccumulator acc(name, tol);
  acc.add(r, std::move(where));
  return acc.report();
}

}  // namespace

ResidualReport first_jacobi_residual(const Eigen::MatrixXd& G, int n, int j, double tol) {
  if (j < 1 || j > n) throw std::invalid_argument("first_jacobi_residual: j out of range");
  CartanMatrix K = cartan_matrix(Series::A, n);
  double a = matrix_element(G, n, j, {j}, {j});
  double b = matrix_element(G, n, j, {j}, {});
  double c = matrix_element(G, n, j, {}, {j});
  double d = matrix_element(G, n, j, {}, {});
  double rhs = 1.0;
  for (int i = 1; i <= n; ++i) {
    if (i == j || K(j, i) == 0) continue;
    rhs *= std::pow(checked_tau(G, n, i), -K(j, i));
  }
  return single("first_jacobi[n=" + std::to_string(n) + ",j=" + std::to_string(j) + "]", a * d - b * c - rhs,
                tol, {n, j});
}

ResidualReport second_jacobi_residual(const Eigen::MatrixXd& G, int n, int i, int j, double tol) {
  CartanMatrix K = cartan_matrix(Series::A, n);
  if (K(i, j) == 0 || i == j) throw std::invalid_argument("second_jacobi_residual: requires K_ij != 0, i != j");
  double tj = checked_tau(G, n, j), ti = checked_tau(G, n, i);
  double r = K(i, j) * matrix_element(G, n, j, {j, i}, {}) / tj +
             K(j, i) * matrix_element(G, n, i, {i, j}, {}) / ti +
             K(i, j) * K(j, i) * (matrix_element(G, n, j, {j}, {}) / tj) * (matrix_element(G, n, i, {i}, {}) / ti);
  return single("second_jacobi[n=" + std::to_string(n) + ",i=" + std::to_string(i) + ",j=" + std::to_string(j) + "]",
                r, tol, {i, j});
}

std::optional<Word> r_word(int n, int sign, int a, int i) {
  Word w;
  for (int l = 0; l < a; ++l) {
    int s = i + sign * l;
    if (s < 1 || s > n) return std::nullopt;
    w.push_back(s);
  }
  return w;
}

std::optional<Word> t_word(int n, int sign, int b, int i) {
  Word w;
  for (int l = b - 1; l >= 0; --l) {
    int s = i + sign * l;
    if (s < 1 || s > n) return std::nullopt;
    w.push_back(s);
  }
  return w;
}

double q_function(const Eigen::MatrixXd& G, int n, int sign, int a, int b, int k) {
  if (k < 1 || k > n) return (a == 0 && b == 0 && (k == 0 || k == n + 1)) ? 1.0 : 0.0;
  auto L = r_word(n, sign, a, k);
  auto R = t_word(n, sign, b, k);
  if (!L || !R) return 0.0;
  return matrix_element(G, n, k, *L, *R);
}

ResidualReport recurrence_residual(const Eigen::MatrixXd& G, int n, int i, int a, int b, int sign, double tol) {
  const int k1 = i + sign, k2 = i + 2 * sign;
  if (k1 < 1 || k1 > n) throw std::invalid_argument("recurrence_residual: site i+-1 must lie in 1..n");
  if (a < 1 || b < 1) throw std::invalid_argument("recurrence_residual: a, b >= 1");
  double t1 = checked_tau(G, n, k1);
  double ti = tau_of(G, n, i);
  double abar = q_function(G, n, sign, a, 0, k1) / t1;
  double alpha = q_function(G, n, sign, 0, b, k1) / t1;
  double lhs = q_function(G, n, sign, a, b, k1);
  double rhs = ti / t1 * q_function(G, n, sign, a - 1, b - 1, k2) + t1 * abar * alpha;
  return single("recurrence[i=" + std::to_string(i) + ",a=" + std::to_string(a) + ",b=" + std::to_string(b) +
                    (sign > 0 ? ",+]" : ",-]"),
                lhs - rhs, tol, {i, a, b});
}

std::vector<ResidualReport> jacobi_sweep(const SweepSettings& s) {
  struct Job {
    int n, j, i;  // i == 0: first identity
  };
  std::vector<Job> jobs;
  for (int n = 1; n <= s.max_rank; ++n)
    for (int j = 1; j <= n; ++j) {
      jobs.push_back({n, j, 0});
      for (int i : {j - 1, j + 1})
        if (i >= 1 && i <= n) jobs.push_back({n, j, i});
    }
  std::vector<ResidualReport> out(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), s.jobs, [&](int k) {
    const Job& jb = jobs[k];
    std::string name = jb.i == 0 ? "first_jacobi[n=" + std::to_string(jb.n) + ",j=" + std::to_string(jb.j) + "]"
                                 : "second_jacobi[n=" + std::to_string(jb.n) + ",i=" + std::to_string(jb.i) +
                                       ",j=" + std::to_string(jb.j) + "]";
    ResidualAccumulator acc(name, s.tol);
    long singular = 0;
    for (int m = 0; m < s.samples; ++m) {
      std::uint64_t seed = s.seed * 1000003ULL + static_cast<std::uint64_t>(jb.n) * 7919ULL + m;
      auto g = random_group_element(jb.n, seed);
      try {
        ResidualReport r = jb.i == 0 ? first_jacobi_residual(g.G, jb.n, jb.j, s.tol)
                                     : second_jacobi_residual(g.G, jb.n, jb.i, jb.j, s.tol);
        acc.add(r.max_abs, {m});
      } catch (const SingularConfiguration&) {
        ++singular;
        acc.skip();
      }
    }
    out[k] = acc.report();
    out[k].meta["samples"] = s.samples;
    out[k].meta["singular_samples"] = singular;
  });
  return out;
}

}  // namespace lietoda
