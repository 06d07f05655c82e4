#include "lietoda/flows.hpp"

#include <cmath>
#include <mutex>

namespace lietoda {

std::string side_name(Side s) { return s == Side::plus ? "plus" : "minus"; }

Side parse_side(const std::string& s) {
  if (s == "plus" || s == "+") return Side::plus;
  if (s == "minus" || s == "-") return Side::minus;
  throw ConfigError("side must be 'plus' or 'minus', got '" + s + "'");
}

double CoeffFn::operator()(double t) const {
  switch (kind) {
    case Kind::constant: return params.empty() ? 0.0 : params[0];
    case Kind::poly: {
      double r = 0.0;
      for (auto it = params.rbegin(); it != params.rend(); ++it) r = r * t + *it;
      return r;
    }
    case Kind::exp: return params.at(0) * std::exp(params.at(1) * t);
  }
  return 0.0;
}

bool CoeffFn::is_constant(double c) const {
  switch (kind) {
    case Kind::constant: return (params.empty() ? 0.0 : params[0]) == c;
    case Kind::poly:
      for (size_t k = 1; k < params.size(); ++k)
        if (params[k] != 0.0) return false;
      return (params.empty() ? 0.0 : params[0]) == c;
    case Kind::exp: return (params.at(1) == 0.0 && params.at(0) == c) || (params.at(0) == 0.0 && c == 0.0);
  }
  return false;
}

nlohmann::json CoeffFn::to_json() const {
  const char* k = kind == Kind::constant ? "const" : kind == Kind::poly ? "poly" : "exp";
  return {{"kind", k}, {"params", params}};
}

CoeffFn CoeffFn::from_json(const nlohmann::json& j) {
  CoeffFn c;
  std::string kind = j.at("kind").get<std::string>();
  c.params = j.at("params").get<std::vector<double>>();
  if (kind == "const") {
    c.kind = Kind::constant;
    if (c.params.size() != 1) throw ConfigError("const coefficient takes exactly one parameter");
  } else if (kind == "poly") {
    c.kind = Kind::poly;
    if (c.params.empty()) throw ConfigError("poly coefficient needs at least one parameter");
  } else if (kind == "exp") {
    c.kind = Kind::exp;
    if (c.params.size() != 2) throw ConfigError("exp coefficient takes parameters [A, b]");
  } else {
    throw ConfigError("unknown coefficient kind '" + kind + "'");
  }
  return c;
}

Eigen::MatrixXd standard_generator(Side side, int n, int grade, int site) {
  const int N = n + 1;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(N, N);
  if (grade == 0) {
    if (site < 1 || site > n) throw std::invalid_argument("Cartan site out of range");
    g(site - 1, site - 1) = 1.0;
    g(site, site) = -1.0;
    return g;
  }
  if (grade < 0 || site < 1 || site + grade - 1 > n)
    throw std::invalid_argument("graded generator (grade " + std::to_string(grade) + ", site " +
                                std::to_string(site) + ") out of range for A_" + std::to_string(n));
  // nested commutator of lowering operators collapses to one unit matrix
  if (side == Side::minus)
    g(site + grade - 1, site - 1) = 1.0;
  else
    g(site - 1, site + grade - 1) = 1.0;
  return g;
}

Eigen::MatrixXd principal_grading_defining(int n) {
  return principal_grading(fundamental_rep(n, 1)).to_double();
}

void GradedLagrangian::set(int grade, int site, CoeffFn c) {
  clear_coefficient(grade, site);
  terms_.push_back({grade, site, standard_generator(side_, n_, grade, site), std::move(c)});
}

void GradedLagrangian::clear_coefficient(int grade, int site) {
  std::erase_if(terms_, [&](const LagrangianTerm& t) { return t.grade == grade && t.site == site; });
}

Eigen::MatrixXd GradedLagrangian::operator()(double t) const {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n_ + 1, n_ + 1);
  for (const auto& term : terms_) L += term.coeff(t) * term.generator;
  return L;
}

const CoeffFn* GradedLagrangian::find(int grade, int site) const {
  for (const auto& t : terms_)
    if (t.grade == grade && t.site == site) return &t.coeff;
  return nullptr;
}

double GradedLagrangian::coefficient(int grade, int site, double t) const {
  const CoeffFn* c = find(grade, site);
  return c ? (*c)(t) : 0.0;
}

bool GradedLagrangian::is_zero() const {
  for (const auto& t : terms_)
    if (!t.coeff.is_constant(0.0)) return false;
  return true;
}

bool GradedLagrangian::grade_is_constant(int grade, double c) const {
  for (int i = 1; i + grade - 1 <= n_; ++i) {
    const CoeffFn* f = find(grade, i);
    if (f ? !f->is_constant(c) : c != 0.0) return false;
  }
  return true;
}

void GradedLagrangian::check_grades() const {
  Eigen::MatrixXd H = principal_grading_defining(n_);
  const double sgn = side_ == Side::plus ? 1.0 : -1.0;
  for (const auto& t : terms_) {
    Eigen::MatrixXd c = H * t.generator - t.generator * H - sgn * t.grade * t.generator;
    if (c.cwiseAbs().maxCoeff() > 1e-12)
      throw ContractError("grade-structure violation in " + side_name(side_) + " Lagrangian block of grade " +
                          std::to_string(t.grade) + " at site " + std::to_string(t.site));
    if (t.grade > depth_)
      throw ContractError("grade " + std::to_string(t.grade) + " exceeds the Lagrangian depth " +
                          std::to_string(depth_));
  }
}

GradedLagrangian GradedLagrangian::standard(Side side, int n, int depth) {
  GradedLagrangian L(side, n, depth);
  for (int i = 1; i <= n; ++i) L.set(1, i, CoeffFn::constant(1.0));
  if (depth > 1)
    for (int i = 1; i + depth - 1 <= n; ++i) L.set(depth, i, CoeffFn::constant(1.0));
  return L;
}

FlowPath solve_smatrix(const GradedLagrangian& L, double t0, double h, int N, int anchor,
                       const Eigen::MatrixXd& M0, int substeps) {
  if (N < 1 || anchor < 0 || anchor >= N) throw std::invalid_argument("solve_smatrix: bad axis");
  if (substeps < 1) throw std::invalid_argument("solve_smatrix: substeps must be >= 1");
  L.check_grades();
  FlowPath p;
  p.t0 = t0;
  p.h = h;
  p.M.resize(N);
  p.M[anchor] = M0;
  MatrixFn f = [&L](double t) { return L(t); };
  const double ta = t0 + anchor * h;
  auto run = [&](int count, double dir) {
    if (count <= 0) return;
    double t1 = ta + dir * h * count;
    OdePath o = L.side() == Side::plus ? ode_linear_integrate(f, ta, t1, count * substeps, M0, true)
                                       : ode_linear_integrate_right(f, ta, t1, count * substeps, M0);
    for (int k = 1; k <= count; ++k) p.M[anchor + static_cast<int>(dir) * k] = o.M[static_cast<size_t>(k) * substeps];
    p.error_estimate = std::max(p.error_estimate, o.error_estimate);
  };
  run(N - 1 - anchor, 1.0);
  run(anchor, -1.0);
  return p;
}

KernelField kernel(const FlowPath& plus_path, const FlowPath& minus_path, const GradedLagrangian& plus,
                   const GradedLagrangian& minus, bool with_derivatives) {
  if (plus.n() != minus.n()) throw std::invalid_argument("kernel: paths belong to different algebras");
  if (plus_path.M.empty() || minus_path.M.empty() || plus_path.M[0].rows() != minus_path.M[0].rows())
    throw std::invalid_argument("kernel: mismatched representation sets");
  KernelField kf;
  kf.n = plus.n();
  kf.plus = plus;
  kf.minus = minus;
  kf.grid.x0 = minus_path.t0;
  kf.grid.hx = minus_path.h;
  kf.grid.Nx = minus_path.size();
  kf.grid.y0 = plus_path.t0;
  kf.grid.hy = plus_path.h;
  kf.grid.Ny = plus_path.size();
  const int Nx = kf.grid.Nx, Ny = kf.grid.Ny;
  kf.K.resize(static_cast<size_t>(Nx) * Ny);
  if (with_derivatives) {
    kf.has_derivatives = true;
    kf.Kx.resize(kf.K.size());
    kf.Ky.resize(kf.K.size());
    kf.Kxy.resize(kf.K.size());
  }
  for (int ix = 0; ix < Nx; ++ix) {
    Eigen::MatrixXd Lm = with_derivatives ? minus(kf.grid.x(ix)) : Eigen::MatrixXd();
    for (int iy = 0; iy < Ny; ++iy) {
      size_t k = static_cast<size_t>(ix) * Ny + iy;
      kf.K[k] = plus_path.M[iy] * minus_path.M[ix];
      if (with_derivatives) {
        Eigen::MatrixXd Lp = plus(kf.grid.y(iy));
        kf.Kx[k] = kf.K[k] * Lm;
        kf.Ky[k] = Lp * kf.K[k];
        kf.Kxy[k] = Lp * kf.Kx[k];
      }
    }
  }
  kf.meta["plus_error_estimate"] = plus_path.error_estimate;
  return kf;
}

namespace {

int nearest(double x0, double h, int N, double x) {
  int k = static_cast<int>(std::lround((x - x0) / h));
  return std::clamp(k, 0, N - 1);
}

}  // namespace

KernelField build_kernel(const FlowSetup& s) {
  s.grid.validate();
  const int N = s.n + 1;
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);
  int ax = nearest(s.grid.x0, s.grid.hx, s.grid.Nx, s.origin_x);
  int ay = nearest(s.grid.y0, s.grid.hy, s.grid.Ny, s.origin_y);
  FlowPath pm = solve_smatrix(s.minus, s.grid.x0, s.grid.hx, s.grid.Nx, ax,
                              s.Cminus_inv.size() ? s.Cminus_inv : I, s.substeps);
  FlowPath pp = solve_smatrix(s.plus, s.grid.y0, s.grid.hy, s.grid.Ny, ay, s.Cplus.size() ? s.Cplus : I,
                              s.substeps);
  KernelField kf = kernel(pp, pm, s.plus, s.minus, s.with_derivatives);
  kf.meta["anchor"] = {ax, ay};
  return kf;
}

namespace {

struct RepCache {
  std::mutex mu;
  std::map<std::pair<int, int>, std::shared_ptr<FundamentalRep>> reps;
  std::shared_ptr<FundamentalRep> get(int n, int j) {
    std::lock_guard<std::mutex> lock(mu);
    auto& r = reps[{n, j}];
    if (!r) r = std::make_shared<FundamentalRep>(fundamental_rep(n, j));
    return r;
  }
};

RepCache& rep_cache() {
  static RepCache c;
  return c;
}

double det_small(const Eigen::MatrixXd& m) {
  switch (m.rows()) {
    case 0: return 1.0;
    case 1: return m(0, 0);
    case 2: return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    case 3:
      return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
             m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    default: return m.partialPivLu().determinant();
  }
}

}  // namespace

MatrixElement::MatrixElement(int n, int j, const Word& left, const Word& right) : j_(j) {
  if (j < 1 || j > n) throw std::invalid_argument("matrix_element: representation index out of range");
  for (int a : left)
    if (a < 1 || a > n) throw std::invalid_argument("matrix_element: raising index out of range");
  for (int b : right)
    if (b < 1 || b > n) throw std::invalid_argument("matrix_element: lowering index out of range");
  auto rep = rep_cache().get(n, j);
  const int d = rep->dim;
  // u^T = <j| X+_{a1} X+_{a2} ...  and  w = X-_{b1} X-_{b2} ... |j>
  RMatrix u(1, d), w(d, 1);
  u(0, rep->hw_index) = 1;
  w(rep->hw_index, 0) = 1;
  for (int a : left) u = u * rep->e(a);
  for (auto it = right.rbegin(); it != right.rend(); ++it) w = rep->f(*it) * w;
  for (int s = 0; s < d; ++s) {
    if (u(0, s) == 0) continue;
    for (int t = 0; t < d; ++t) {
      if (w(t, 0) == 0) continue;
      terms_.push_back({rep->basis[s], rep->basis[t], (u(0, s) * w(t, 0)).convert_to<double>()});
    }
  }
}

double MatrixElement::operator()(const Eigen::MatrixXd& G) const {
  double v = 0.0;
  Eigen::MatrixXd sub(j_, j_);
  for (const auto& term : terms_) {
    for (int a = 0; a < j_; ++a)
      for (int b = 0; b < j_; ++b) sub(a, b) = G(term.rows[a], term.cols[b]);
    v += term.coef * det_small(sub);
  }
  return v;
}

Eigen::MatrixXd MatrixElement::block(const Eigen::MatrixXd& G, const Term& t) const {
  Eigen::MatrixXd sub(j_, j_);
  for (int a = 0; a < j_; ++a)
    for (int b = 0; b < j_; ++b) sub(a, b) = G(t.rows[a], t.cols[b]);
  return sub;
}

double MatrixElement::derivative(const Eigen::MatrixXd& G, const Eigen::MatrixXd& Gd) const {
  double v = 0.0;
  for (const auto& term : terms_) {
    Eigen::MatrixXd A = block(G, term), D = block(Gd, term);
    for (int c = 0; c < j_; ++c) {
      Eigen::MatrixXd B = A;
      B.col(c) = D.col(c);
      v += term.coef * det_small(B);
    }
  }
  return v;
}

double MatrixElement::mixed_derivative(const Eigen::MatrixXd& G, const Eigen::MatrixXd& Gx,
                                       const Eigen::MatrixXd& Gy, const Eigen::MatrixXd& Gxy) const {
  double v = 0.0;
  for (const auto& term : terms_) {
    Eigen::MatrixXd A = block(G, term), X = block(Gx, term), Y = block(Gy, term), XY = block(Gxy, term);
    for (int c = 0; c < j_; ++c) {
      Eigen::MatrixXd B = A;
      B.col(c) = XY.col(c);
      v += term.coef * det_small(B);
      for (int c2 = 0; c2 < j_; ++c2) {
        if (c2 == c) continue;
        B = A;
        B.col(c) = X.col(c);
        B.col(c2) = Y.col(c2);
        v += term.coef * det_small(B);
      }
    }
  }
  return v;
}

double matrix_element(const Eigen::MatrixXd& G, int n, int j, const Word& left, const Word& right) {
  return MatrixElement(n, j, left, right)(G);
}

Eigen::MatrixXd compound(const Eigen::MatrixXd& G, int j) {
  const int n = static_cast<int>(G.rows()) - 1;
  auto rep = rep_cache().get(n, j);
  const int d = rep->dim;
  Eigen::MatrixXd C(d, d);
  Eigen::MatrixXd sub(j, j);
  for (int s = 0; s < d; ++s)
    for (int t = 0; t < d; ++t) {
      for (int a = 0; a < j; ++a)
        for (int b = 0; b < j; ++b) sub(a, b) = G(rep->basis[s][a], rep->basis[t][b]);
      C(s, t) = det_small(sub);
    }
  return C;
}

TimeflowResult solve_timeflow(const GradedLagrangian& space, const GradedLagrangian& time, double y0, double hy,
                              int Ny, int anchor_y, double t0, double ht, int Nt, int anchor_t,
                              const Eigen::MatrixXd& M0, double tol, int substeps) {
  time.check_grades();
  TimeflowResult r;
  r.Ny = Ny;
  r.Nt = Nt;
  r.M.resize(static_cast<size_t>(Ny) * Nt);
  // y first at the anchor time, then time at every y
  FlowPath base = solve_smatrix(space, y0, hy, Ny, anchor_y, M0, substeps);
  for (int iy = 0; iy < Ny; ++iy) {
    FlowPath tp = solve_smatrix(time, t0, ht, Nt, anchor_t, base.M[iy], substeps);
    for (int it = 0; it < Nt; ++it) r.M[static_cast<size_t>(iy) * Nt + it] = tp.M[it];
  }
  // time first at the anchor y, then y at every time
  FlowPath tbase = solve_smatrix(time, t0, ht, Nt, anchor_t, M0, substeps);
  ResidualAccumulator acc("timeflow_consistency", tol);
  for (int it = 0; it < Nt; ++it) {
    FlowPath yp = solve_smatrix(space, y0, hy, Ny, anchor_y, tbase.M[it], substeps);
    for (int iy = 0; iy < Ny; ++iy) {
      const Eigen::MatrixXd& a = r.M[static_cast<size_t>(iy) * Nt + it];
      double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
      acc.add((a - yp.M[iy]).cwiseAbs().maxCoeff() / scale, {iy, it});
    }
  }
  r.consistency = acc.report();
  return r;
}

}  // namespace lietoda
