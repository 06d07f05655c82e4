#pragma once
// Jacobi identities for highest-weight matrix elements and the recurrence
// for Q functions.

#include "lietoda/flows.hpp"

#include <cstdint>

namespace lietoda {

struct SingularConfiguration : std::runtime_error {
  int site;
  SingularConfiguration(int i, const std::string& what) : std::runtime_error(what), site(i) {}
};

struct GroupElementSample {
  int n = 1;
  std::uint64_t seed = 0;
  Eigen::MatrixXd G;  // defining representation; other modules by compound()
};

// Product of `factors` exponentials exp(c Z), Z a random Chevalley
// generator (h_i, X+_i or X-_i), |c| <= 1. Reproducible from the seed.
GroupElementSample random_group_element(int n, std::uint64_t seed, int factors = 8);

// <i|G|i> with the fixed-end convention <0> = <n+1> = 1
double tau_of(const Eigen::MatrixXd& G, int n, int i);

ResidualReport first_jacobi_residual(const Eigen::MatrixXd& G, int n, int j, double tol = 1e-9);
ResidualReport second_jacobi_residual(const Eigen::MatrixXd& G, int n, int i, int j, double tol = 1e-9);

// word of R^{+-}_a(X+_i) = X+_i X+_{i+-1} ... ; empty optional when an index leaves 1..n
std::optional<Word> r_word(int n, int sign, int a, int i);
// word of T^{+-}_b(X-_i) = X-_{i+-(b-1)} ... X-_i
std::optional<Word> t_word(int n, int sign, int b, int i);

// Q^{+-}_{a,b;k} = <k| R_a(X+_k) G T_b(X-_k) |k>, fixed ends: Q_{0,0} at sites 0, n+1 is 1
double q_function(const Eigen::MatrixXd& G, int n, int sign, int a, int b, int k);

// residual of Q_{a,b;i+-1} - [<i>/<i+-1> Q_{a-1,b-1;i+-2} + <i+-1> abar^{+-a}_{i+-1} alpha^{+-b}_{i+-1}]
ResidualReport recurrence_residual(const Eigen::MatrixXd& G, int n, int i, int a, int b, int sign,
                                   double tol = 1e-9);

struct SweepSettings {
  int max_rank = 4;
  int samples = 100;
  std::uint64_t seed = 1;
  double tol = 1e-9;
  int jobs = 1;
};

// seeded sweeps over (n, j) (first) and adjacent (i, j) pairs (second)
std::vector<ResidualReport> jacobi_sweep(const SweepSettings& s);

}  // namespace lietoda
