#pragma once
// Wronskian frames of the linear flow X_t = X^{(k)} + ..., Frobenius
// factors, nilpotent chain residuals, time-dependent tau functions and
// Davey-Stewartson soliton fields.

#include "lietoda/jet.hpp"
#include "lietoda/mappings.hpp"

namespace lietoda {

struct GenericityError : std::runtime_error {
  std::vector<double> where;
  GenericityError(const std::string& what, std::vector<double> w) : std::runtime_error(what), where(std::move(w)) {}
};

// Exponential basis X_q = exp(a_q y + a_q^k tbar + c_q). The x-side modes
// b_q, d_q are used when a frame drives a kernel (defaults: b = a, d = 0).
struct WronskianFrame {
  int k = 2;
  std::vector<double> modes, amps;
  std::vector<double> xmodes, xamps;

  int size() const { return static_cast<int>(modes.size()); }
  void validate() const;  // throws ConfigError
  double b(int q) const { return xmodes.empty() ? modes[q] : xmodes[q]; }
  double c(int q) const { return amps.empty() ? 0.0 : amps[q]; }
  double d(int q) const { return xamps.empty() ? 0.0 : xamps[q]; }
  double X(int q, double y, double t) const;
  Jet X_jet(int q, double y, double t, int py, int pt) const;

  // k = 2: {-1, 0.3, 1.1}; k = 3: {-1.2, -0.2, 0.5, 1.3}; amplitudes 0
  static WronskianFrame default_frame(int k);
  nlohmann::json to_json() const;
  static WronskianFrame from_json(const nlohmann::json& j);  // throws ConfigError
};

// A basis given by functions of (y, tbar) with constant coefficients
// A^{(s)}, s = 2..k, of X_t = X^{(k)} + A^{(2)} X^{(k-2)} + ... + A^{(k)} X.
struct SampledBasis {
  int k = 2;
  std::vector<double> A;  // A[s], indices 0 and 1 unused
  std::vector<std::function<double(double, double)>> fns;
  std::vector<std::string> labels;
};

// yt: axis x of the grid is y, axis y is tbar
ResidualReport linear_eq_residual(const WronskianFrame& f, const Grid2D& yt, double tol = 1e-10);
ResidualReport linear_eq_residual(const SampledBasis& b, const Grid2D& yt, double tol = 1e-5);

struct FrobeniusResult {
  std::vector<double> y;
  std::vector<std::vector<double>> phi;            // phi_1..phi_m
  std::vector<std::vector<double>> minors;         // Det_1..Det_m of the Wronskian matrix
  std::vector<std::vector<double>> ratios;         // Det_{i+1}/Det_i, i = 1..m-1
  std::vector<std::vector<double>> reconstructed;  // X_q from nested integrals of the phi's
  double roundtrip_error = 0.0;
};

// phi_i = W_i W_{i-2} / W_{i-1}^2 along y at fixed tbar; the reconstruction
// integrates from index `baseline`
FrobeniusResult frobenius_factors(const WronskianFrame& f, double tbar, double y0, double h, int N,
                                  int baseline = 0);

// Zero-curvature chain of the unipotent frame with first row (1, X_1/a_1, ...):
// pi^{(1}_i' = dG_i/dt, pi^{(s}_i' = G_i pi^{(s-1}_{i+1} - pi^{(s-1}_i G_{i+s-1},
// top (G_i...G_{i+k-1})' = G_i pi^{(k-1}_{i+1} - pi^{(k-1}_i G_{i+k-1}.
// Local form via jets; nonlocal form via cumulative quadrature along y.
ResidualReport nilpotent_chain_residual(const WronskianFrame& f, const Grid2D& yt, double tol);

// Upper-triangular U with U_{r,q} = prod_{s<r} (a_q - a_s)
Eigen::MatrixXd vandermonde_frame(const std::vector<double>& a);

struct TimeTauSetup {
  WronskianFrame frame;
  int n = 2;                // frame.size() must equal n + 1
  Grid2D grid;              // axis x: the non-time variable; axis y: tbar
  double fixed = 0.0;       // value of the remaining variable (y, or x when mirrored)
  Side time_side = Side::plus;  // minus: mirrored construction on the x side
  DerivativeMode mode = DerivativeMode::finite_difference;
  int substeps = 1;
};

struct TimeTauResult {
  KernelField kernel;
  TauField tau;
  PFields p;
  GradedLagrangian minus, plus;
  ResidualReport pipeline;  // numerical flows against the closed form
  double min_minor = 0.0;   // smallest leading minor over the grid (positivity scan)
};

// plus: K(x, tbar) = M+(y, tbar) M-^{-1}(x) with M+ = exp(y Lambda_D + tbar Lambda_D^k) C+, whose
// leading minors are Det_i of the Wronskian matrix up to the unimodular gauge
TimeTauResult time_dependent_tau(const TimeTauSetup& s);
// time slice at tbar: depth-1 flows Lambda_D - trace/(n+1) on both sides
// (unit grade 1, grade 0 present), a static Toda kernel
KernelField frozen_time_kernel(const WronskianFrame& f, const Grid2D& g, double tbar, bool with_derivatives = false);
// Lagrangian Lambda_D^power of the construction (transposed on the minus
// side). gauged: diagonal removed by the Cartan gauge, so the grade-g
// coefficient at site i is (Lambda_D^p)_{i,i+g} exp(t (a_{i+g}^p - a_i^p));
// otherwise constant coefficients with the traceless diagonal as grade 0.
GradedLagrangian frame_lagrangian(Side side, const std::vector<double>& modes, int power, bool gauged);

// GL tau functions at a point; tbar = -t
struct DSSoliton {
  WronskianFrame frame;
  int n = 1;
  int site = 1;
  std::array<double, 2> uv(double x, double y, double t) const;
  std::vector<double> taus(double x, double y, double t) const;  // <0>..<n+1>
};

DSSoliton ds_soliton(const WronskianFrame& f, int site);
// sample u, v on grid x [x] y over t = t0 + it*ht
std::pair<SpaceTimeField, SpaceTimeField> sample_ds(const DSSoliton& s, const Grid2D& g, double t0, double ht, int Nt);
// max |u(x,y,tbar) - u(x, y - c tbar, 0)| (and v) for the speed c = -a^{k-1} of a one-mode frame
ResidualReport ds_translation_check(const DSSoliton& s, const Grid2D& g, double tbar_max, int Nt, double tol = 1e-4);

}  // namespace lietoda
