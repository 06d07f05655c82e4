#pragma once
// Graded Lagrangians, S-matrix flows and the kernel element K = M+ M-^{-1}.

#include "lietoda/algebra.hpp"
#include "lietoda/numerics.hpp"

#include <map>
#include <optional>

namespace lietoda {

enum class Side { plus, minus };
std::string side_name(Side s);
Side parse_side(const std::string& s);

// scalar coefficient of one real argument
struct CoeffFn {
  enum class Kind { constant, poly, exp };
  Kind kind = Kind::constant;
  std::vector<double> params{1.0};  // const: {c}; poly: {c0, c1, ...}; exp: {A, b} -> A e^{b t}

  static CoeffFn constant(double c) { return {Kind::constant, {c}}; }
  static CoeffFn poly(std::vector<double> c) { return {Kind::poly, std::move(c)}; }
  static CoeffFn exponential(double A, double b) { return {Kind::exp, {A, b}}; }

  double operator()(double t) const;
  bool is_constant(double c) const;
  nlohmann::json to_json() const;
  static CoeffFn from_json(const nlohmann::json& j);  // throws ConfigError
};

struct LagrangianTerm {
  int grade = 1;  // absolute grade s >= 0
  int site = 1;   // site index i (first simple root of the word)
  Eigen::MatrixXd generator;  // defining-representation matrix
  CoeffFn coeff;
};

// L(t) = sum_s sum_i coeff_{s,i}(t) * (generator of grade +-s at site i)
class GradedLagrangian {
 public:
  GradedLagrangian() = default;
  GradedLagrangian(Side side, int n, int depth) : side_(side), n_(n), depth_(depth) {}

  Side side() const { return side_; }
  int n() const { return n_; }
  int depth() const { return depth_; }
  const std::vector<LagrangianTerm>& terms() const { return terms_; }

  // standard generator: minus grade s site i -> Y_i^{-s} = e_{i+s,i};
  // plus -> its transpose; grade 0 -> h_i
  void set(int grade, int site, CoeffFn c);
  void add_raw(LagrangianTerm t) { terms_.push_back(std::move(t)); }
  void clear_coefficient(int grade, int site);

  Eigen::MatrixXd operator()(double t) const;
  // coefficient phi^{grade}_{site}(t); 0 if absent
  double coefficient(int grade, int site, double t) const;
  const CoeffFn* find(int grade, int site) const;
  bool is_zero() const;

  // [H, L_s] = +-s L_s for every term, H the principal grading; throws
  // ContractError naming the offending block
  void check_grades() const;
  // all grade-`grade` coefficients are the constant c (absent counts as 0)
  bool grade_is_constant(int grade, double c) const;

  // defaults: grade 1 and the top grade are constant 1 at every site
  static GradedLagrangian standard(Side side, int n, int depth);
  static GradedLagrangian zero(Side side, int n) { return {side, n, 1}; }

 private:
  Side side_ = Side::plus;
  int n_ = 1;
  int depth_ = 1;
  std::vector<LagrangianTerm> terms_;
};

Eigen::MatrixXd standard_generator(Side side, int n, int grade, int site);
Eigen::MatrixXd principal_grading_defining(int n);

// Sampled solution of an S-matrix equation on a uniform axis.
struct FlowPath {
  double t0 = 0.0, h = 0.01;
  std::vector<Eigen::MatrixXd> M;     // plus: M+; minus: M-^{-1}
  double error_estimate = 0.0;
  double t(int k) const { return t0 + h * k; }
  int size() const { return static_cast<int>(M.size()); }
};

// Solves on the axis t0 + k h, k = 0..N-1, with M(t0 + anchor*h) = M0.
// plus: dM+/dt = L M+. minus: returns M-^{-1}, which solves d/dt = M-^{-1} L
// (companion equation of dM-/dt = -L M-).
FlowPath solve_smatrix(const GradedLagrangian& L, double t0, double h, int N, int anchor,
                       const Eigen::MatrixXd& M0, int substeps = 1);

struct KernelField {
  Grid2D grid;  // axis x = minus variable, axis y = plus variable (y or a time)
  int n = 1;
  GradedLagrangian minus, plus;
  std::vector<Eigen::MatrixXd> K;  // row-major over (ix, iy)
  // exact derivative data: dK/dx = K L-, dK/dy = L+ K, d2K/dxdy = L+ K L-
  bool has_derivatives = false;
  std::vector<Eigen::MatrixXd> Kx, Ky, Kxy;
  nlohmann::json meta = nlohmann::json::object();

  const Eigen::MatrixXd& at(int ix, int iy) const { return K[static_cast<size_t>(ix) * grid.Ny + iy]; }
};

KernelField kernel(const FlowPath& plus_path, const FlowPath& minus_path, const GradedLagrangian& plus,
                   const GradedLagrangian& minus, bool with_derivatives = false);

struct FlowSetup {
  int n = 1;
  Grid2D grid = Grid2D::centered();
  GradedLagrangian minus, plus;
  double origin_x = 0.0, origin_y = 0.0;  // flow anchor, snapped to the nearest node
  Eigen::MatrixXd Cplus, Cminus_inv;       // values at the anchor (identity if empty)
  int substeps = 1;
  bool with_derivatives = false;
};

KernelField build_kernel(const FlowSetup& s);

// A word is a list of simple-root indices. Left words of raising operators
// are applied to <j| in the given order (<j| X+_{a1} X+_{a2} ...), right
// words of lowering operators to |j> so that X-_{b_last} is adjacent to |j>.
using Word = std::vector<int>;

// <j| (prod X+) G (prod X-) |j> as a sparse sum of j x j minors of the
// defining-representation matrix G.
class MatrixElement {
 public:
  MatrixElement(int n, int j, const Word& left, const Word& right);
  double operator()(const Eigen::MatrixXd& G) const;
  // derivative along a curve G(s) given dG/ds (multilinearity of the minors)
  double derivative(const Eigen::MatrixXd& G, const Eigen::MatrixXd& Gd) const;
  // d2/dxdy given G, G_x, G_y, G_xy
  double mixed_derivative(const Eigen::MatrixXd& G, const Eigen::MatrixXd& Gx, const Eigen::MatrixXd& Gy,
                          const Eigen::MatrixXd& Gxy) const;
  bool vanishes() const { return terms_.empty(); }
  int rep() const { return j_; }

 private:
  struct Term {
    std::vector<int> rows, cols;
    double coef;
  };
  Eigen::MatrixXd block(const Eigen::MatrixXd& G, const Term& t) const;
  int j_;
  std::vector<Term> terms_;
};

double matrix_element(const Eigen::MatrixXd& G, int n, int j, const Word& left, const Word& right);

// compound (j-th exterior power) of a defining-representation matrix
Eigen::MatrixXd compound(const Eigen::MatrixXd& G, int j);

struct TimeflowResult {
  // M+ on the (y, tbar) grid, row-major over (iy, it)
  int Ny = 0, Nt = 0;
  std::vector<Eigen::MatrixXd> M;
  ResidualReport consistency;  // y-then-t against t-then-y
  const Eigen::MatrixXd& at(int iy, int it) const { return M[static_cast<size_t>(iy) * Nt + it]; }
};

// Integrates the time flow dM/dtbar = P(tbar) M from every point of the base
// path. The path-independence of the two integration orders is reported.
TimeflowResult solve_timeflow(const GradedLagrangian& space, const GradedLagrangian& time, double y0, double hy,
                              int Ny, int anchor_y, double t0, double ht, int Nt, int anchor_t,
                              const Eigen::MatrixXd& M0, double tol = 1e-6, int substeps = 1);

}  // namespace lietoda
