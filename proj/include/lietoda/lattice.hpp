#pragma once
// Tau functions and derived lattice fields on a grid, and grid residuals of
// the Toda, UToda(m1,m2), UToda(k,1) and GToda(2,2;s,sbar) systems.

#include "lietoda/flows.hpp"

#include <array>
#include <iosfwd>

namespace lietoda {

enum class DerivativeMode { finite_difference, exact };
std::string mode_name(DerivativeMode m);

// Fields over sites i = 0..n+1 of an A_n chain. Out-of-range sites follow
// the fixed-end convention: <0> = <n+1> = 1, alpha^0 = 1, alpha^m = 0 (m > 0),
// theta = 0.
class TauField {
 public:
  Grid2D grid;
  int n = 1;
  int depth = 1;
  DerivativeMode mode = DerivativeMode::finite_difference;
  std::vector<std::array<int, 3>> singular_nodes;  // (site, ix, iy)
  Field2D excluded;  // 1 where residuals must not be counted

  const Field2D& tau(int i) const;
  const Field2D& theta(int i) const;
  // Theta^{+-p}_i = prod_{r=0..p} theta_{i+-r}
  Field2D Theta(int sign, int p, int i) const;
  // alpha^{+-m}_i = <i|K T+-_m(X-_i)|i>/<i>, alphabar^{+-m}_i = <i|R+-_m(X+_i) K|i>/<i>
  const Field2D& alpha(int sign, int m, int i) const;
  const Field2D& alphabar(int sign, int m, int i) const;
  const Field2D& alpha_y(int sign, int m, int i) const;
  const Field2D& alphabar_x(int sign, int m, int i) const;
  const Field2D& ln_tau_xy(int i) const;

  const Field2D& zeros() const { return zero_; }
  const Field2D& ones() const { return one_; }

 private:
  friend TauField compute_tau(const KernelField&, int, DerivativeMode, int);
  int slot(int sign, int m, int i) const { return ((sign > 0 ? 1 : 0) * depth + (m - 1)) * n + (i - 1); }
  std::vector<Field2D> tau_, theta_, lnxy_;
  std::vector<Field2D> alpha_, alphabar_, alpha_y_, alphabar_x_;
  Field2D zero_, one_;
};

// depth: largest word length m of the alpha fields. exact mode needs a
// kernel with derivative data.
TauField compute_tau(const KernelField& K, int depth, DerivativeMode mode, int jobs = 1);

class PFields {
 public:
  int n = 1, m1 = 1, m2 = 1;
  bool grade0 = false;  // some grade-0 coefficient present on either side
  // p^{(r}_i, pbar^{(r}_i; zero for r > m, and for i outside 1..n
  const Field2D& p(int r, int i) const;
  const Field2D& pbar(int r, int i) const;
  const Field2D& p_y(int r, int i) const;
  const Field2D& pbar_x(int r, int i) const;

 private:
  friend PFields compute_p(const TauField&, const GradedLagrangian&, const GradedLagrangian&);
  const Field2D& get(const std::vector<Field2D>& v, int m, int r, int i) const;
  std::vector<Field2D> p_, pbar_, p_y_, pbar_x_;
  Field2D zero_;
};

// m1 = minus.depth(), m2 = plus.depth(); throws ContractError if the tau
// field lacks the alpha depth
PFields compute_p(const TauField& tau, const GradedLagrangian& minus, const GradedLagrangian& plus);

struct NamedField {
  std::string name;
  Field2D field;
};
using ResidualFields = std::vector<NamedField>;

// max-abs/rms over all fields, with the tau exclusion mask applied (grown by
// the stencil ring in finite-difference mode)
ResidualReport summarize(const std::string& name, const ResidualFields& f, const TauField& tau, double tol);
// max |a - b| over corresponding fields (same names, finite nodes only)
double max_field_difference(const ResidualFields& a, const ResidualFields& b);

ResidualFields toda_fields(const TauField& tau);
ResidualReport toda_residual(const TauField& tau, const GradedLagrangian& minus, const GradedLagrangian& plus,
                             double tol = 1e-6);

// families "pbar_x", "mixed", "p_y"
// ContractError when depth >= 2 and grade-0 coefficients are present; the
// equations hold for flows with grades >= 1 only (gauge the Cartan part away)
ResidualFields utoda_fields(const TauField& tau, const PFields& p);
ResidualReport utoda_residual(const TauField& tau, const PFields& p, double tol = 1e-6);

// four derivative formulas, m = 1..max_m
ResidualFields alpha_derivative_fields(const TauField& tau, const PFields& p, int max_m);
ResidualReport alpha_derivative_residual(const TauField& tau, const PFields& p, int max_m, double tol = 1e-5);

// kernel over (x, tbar_k); requires p.m1 == 1, p.m2 == k
ResidualFields utoda_k1_fields(const TauField& tau, const PFields& p, int k);
ResidualReport utoda_k1_residual(const TauField& tau, const PFields& p, int k, double tol = 1e-5);

struct GTodaFields {
  std::vector<Field2D> p1, pbar1;  // sites 1..n (index i-1)
  ResidualFields residuals;        // "p_y", "pbar_x", "mixed"
};
// grade-2 coefficients of minus/plus are the 0/1 patterns s, sbar
// (phi^{-2}_{i+1,i} = s_i = -phi^{-2}_{i,i+1}); throws std::invalid_argument
// for a non-binary pattern or a non-A Cartan matrix
GTodaFields gtoda_fields(const CartanMatrix& K, const TauField& tau, const GradedLagrangian& minus,
                         const GradedLagrangian& plus);
ResidualReport gtoda_residual(const CartanMatrix& K, const TauField& tau, const GradedLagrangian& minus,
                              const GradedLagrangian& plus, double tol = 1e-5);

// CSV with columns site,ix,iy,x,y,value
void write_field_csv(std::ostream& os, const Grid2D& g, const std::vector<std::pair<int, const Field2D*>>& sites);
// inverse of write_field_csv; returns site -> field and fills the grid
std::map<int, Field2D> read_field_csv(std::istream& is, Grid2D& g);

}  // namespace lietoda
