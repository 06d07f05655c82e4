#pragma once
// Grids, fields, residual statistics and the small numerical kernels shared
// by every module.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

namespace lietoda {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Grid2D {
  double x0 = -1.0, y0 = -1.0;
  double hx = 0.01, hy = 0.01;
  int Nx = 201, Ny = 201;

  double x(int ix) const { return x0 + hx * ix; }
  double y(int iy) const { return y0 + hy * iy; }
  void validate() const;  // throws std::invalid_argument

  // default 201 x 201, h = 0.01, centered at the origin
  static Grid2D centered(int N = 201, double h = 0.01);
  nlohmann::json to_json() const;
};

// Node values on a grid; NaN marks nodes without a valid value.
struct Field2D {
  int nx = 0, ny = 0;
  std::vector<double> v;

  Field2D() = default;
  Field2D(int nx_, int ny_, double fill = 0.0) : nx(nx_), ny(ny_), v(static_cast<size_t>(nx_) * ny_, fill) {}
  explicit Field2D(const Grid2D& g, double fill = 0.0) : Field2D(g.Nx, g.Ny, fill) {}

  double& operator()(int ix, int iy) { return v[static_cast<size_t>(ix) * ny + iy]; }
  double operator()(int ix, int iy) const { return v[static_cast<size_t>(ix) * ny + iy]; }

  template <class F>
  static Field2D map2(const Field2D& a, const Field2D& b, F f) {
    Field2D r(a.nx, a.ny);
    for (size_t k = 0; k < a.v.size(); ++k) r.v[k] = f(a.v[k], b.v[k]);
    return r;
  }
  template <class F>
  Field2D map(F f) const {
    Field2D r(nx, ny);
    for (size_t k = 0; k < v.size(); ++k) r.v[k] = f(v[k]);
    return r;
  }
};

Field2D operator+(const Field2D& a, const Field2D& b);
Field2D operator-(const Field2D& a, const Field2D& b);
Field2D operator*(const Field2D& a, const Field2D& b);
Field2D operator/(const Field2D& a, const Field2D& b);
Field2D operator*(double s, const Field2D& a);
Field2D log(const Field2D& a);

struct ResidualReport {
  std::string name;
  double max_abs = 0.0;
  double rms = 0.0;
  std::vector<int> argmax;
  double tol = 0.0;
  bool pass = true;
  long counted = 0;   // nodes that entered the statistics
  long excluded = 0;  // interior nodes skipped (non-finite / singular)
  nlohmann::json meta = nlohmann::json::object();

  nlohmann::json to_json() const;
};

// Accumulates max/rms over scalar samples with their node locations.
class ResidualAccumulator {
 public:
  explicit ResidualAccumulator(std::string name, double tol) : name_(std::move(name)), tol_(tol) {}
  void add(double r, std::vector<int> where);
  void skip() { ++excluded_; }
  void merge(const ResidualReport& r);
  ResidualReport report() const;

 private:
  std::string name_;
  double tol_;
  double max_ = 0.0, sumsq_ = 0.0;
  long n_ = 0, excluded_ = 0;
  std::vector<int> arg_;
  bool nonfinite_max_ = false;
};

// Residual statistics over nodes at least `ring` away from the boundary.
// Non-finite nodes are excluded and counted.
ResidualReport make_report(const std::string& name, const Field2D& residual, double tol, int ring = 2);
ResidualReport combine(const std::string& name, const std::vector<ResidualReport>& parts, double tol);

Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& A);

struct OdePath {
  std::vector<Eigen::MatrixXd> M;  // M[k] at t0 + k*h
  double error_estimate = 0.0;     // step-halving estimate at the end point, if requested
};

using MatrixFn = std::function<Eigen::MatrixXd(double)>;

// dM/dt = L(t) M, classical RK4 with `steps` uniform steps
OdePath ode_linear_integrate(const MatrixFn& L, double t0, double t1, int steps, const Eigen::MatrixXd& M0,
                             bool estimate_error = false);
// dM/dt = M L(t)
OdePath ode_linear_integrate_right(const MatrixFn& L, double t0, double t1, int steps,
                                   const Eigen::MatrixXd& M0);

// 5-point central stencils (4th order). Nodes closer than two points to the
// boundary, or whose stencil touches a non-finite value, come out NaN.
Field2D diff_x(const Field2D& f, double hx);
Field2D diff_y(const Field2D& f, double hy);
Field2D diff_yy(const Field2D& f, double hy);
Field2D mixed_second_derivative(const Field2D& f, const Grid2D& g);
std::vector<double> diff_1d(const std::vector<double>& f, double h);
std::vector<double> diff2_1d(const std::vector<double>& f, double h);
constexpr int kStencilRing = 2;

// Antiderivative of uniformly sampled f vanishing at `baseline`; piecewise
// cubic interpolation (4th order).
std::vector<double> cumulative_integral(const std::vector<double>& f, double h, int baseline = 0);

// Det_1..Det_k of the upper-left blocks (Det_0 = 1 is not included)
std::vector<double> leading_minors(const Eigen::MatrixXd& X);
double cofactor_determinant(const Eigen::MatrixXd& X);

// parallel loop over [0, n); jobs <= 1 runs inline
void parallel_for(int n, int jobs, const std::function<void(int)>& body);
int default_jobs();
void set_default_jobs(int jobs);

}  // namespace lietoda
