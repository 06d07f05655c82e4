#include "lietoda/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>

namespace lietoda {

void Grid2D::validate() const {
  if (!(hx > 0) || !(hy > 0)) throw std::invalid_argument("grid steps must be positive");
  if (Nx < 5 || Ny < 5) throw std::invalid_argument("grid needs at least 5 points per axis");
}

Grid2D Grid2D::centered(int N, double h) {
  Grid2D g;
  g.Nx = g.Ny = N;
  g.hx = g.hy = h;
  g.x0 = g.y0 = -h * (N - 1) / 2.0;
  return g;
}

nlohmann::json Grid2D::to_json() const {
  return {{"x0", x0}, {"y0", y0}, {"hx", hx}, {"hy", hy}, {"Nx", Nx}, {"Ny", Ny}};
}

Field2D operator+(const Field2D& a, const Field2D& b) { return Field2D::map2(a, b, std::plus<>()); }
Field2D operator-(const Field2D& a, const Field2D& b) { return Field2D::map2(a, b, std::minus<>()); }
Field2D operator*(const Field2D& a, const Field2D& b) { return Field2D::map2(a, b, std::multiplies<>()); }
Field2D operator/(const Field2D& a, const Field2D& b) { return Field2D::map2(a, b, std::divides<>()); }
Field2D operator*(double s, const Field2D& a) {
  return a.map([s](double x) { return s * x; });
}
Field2D log(const Field2D& a) {
  return a.map([](double x) { return x > 0 ? std::log(x) : kNaN; });
}

nlohmann::json ResidualReport::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["max_abs"] = std::isfinite(max_abs) ? nlohmann::json(max_abs) : nlohmann::json("inf");
  j["rms"] = std::isfinite(rms) ? nlohmann::json(rms) : nlohmann::json("inf");
  j["argmax"] = argmax;
  j["tol"] = tol;
  j["pass"] = pass;
  j["counted"] = counted;
  j["excluded"] = excluded;
  if (!meta.empty()) j["meta"] = meta;
  return j;
}

void ResidualAccumulator::add(double r, std::vector<int> where) {
  if (!std::isfinite(r)) {
    ++excluded_;
    return;
  }
  double a = std::fabs(r);
  sumsq_ += a * a;
  ++n_;
  if (a > max_ || arg_.empty()) {
    max_ = std::max(max_, a);
    if (a >= max_) arg_ = std::move(where);
  }
}

void ResidualAccumulator::merge(const ResidualReport& r) {
  if (r.counted == 0) {
    excluded_ += r.excluded;
    return;
  }
  if (r.max_abs > max_ || arg_.empty()) {
    max_ = std::max(max_, r.max_abs);
    arg_ = r.argmax;
  }
  sumsq_ += r.rms * r.rms * static_cast<double>(r.counted);
  n_ += r.counted;
  excluded_ += r.excluded;
  if (!std::isfinite(r.max_abs)) nonfinite_max_ = true;
}

ResidualReport ResidualAccumulator::report() const {
  ResidualReport r;
  r.name = name_;
  r.max_abs = nonfinite_max_ ? std::numeric_limits<double>::infinity() : max_;
  r.rms = n_ ? std::sqrt(sumsq_ / static_cast<double>(n_)) : 0.0;
  r.argmax = arg_;
  r.tol = tol_;
  r.counted = n_;
  r.excluded = excluded_;
  r.pass = r.max_abs <= tol_;
  return r;
}

ResidualReport make_report(const std::string& name, const Field2D& residual, double tol, int ring) {
  ResidualAccumulator acc(name, tol);
  for (int ix = ring; ix < residual.nx - ring; ++ix)
    for (int iy = ring; iy < residual.ny - ring; ++iy) acc.add(residual(ix, iy), {ix, iy});
  return acc.report();
}

ResidualReport combine(const std::string& name, const std::vector<ResidualReport>& parts, double tol) {
  ResidualAccumulator acc(name, tol);
  for (const auto& p : parts) acc.merge(p);
  ResidualReport r = acc.report();
  nlohmann::json sub = nlohmann::json::array();
  for (const auto& p : parts) sub.push_back({{"name", p.name}, {"max_abs", p.max_abs}});
  r.meta["parts"] = sub;
  return r;
}

// Scaling and squaring with the degree-13 Pade approximant.
Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("matrix_exp: matrix must be square");
  const int n = static_cast<int>(A.rows());
  if (n == 0) return A;
  static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                             1187353796428800.0,  129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,       1323241920.0,
                             40840800.0,          960960.0,            16380.0,
                             182.0,               1.0};
  const double theta13 = 5.371920351148152;
  double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
  Eigen::MatrixXd As = A / std::ldexp(1.0, s);
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd A2 = As * As, A4 = A2 * A2, A6 = A4 * A2;
  Eigen::MatrixXd U = As * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
  Eigen::MatrixXd V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
  Eigen::MatrixXd R = (V - U).partialPivLu().solve(V + U);
  for (int k = 0; k < s; ++k) R = R * R;
  return R;
}

namespace {

Eigen::MatrixXd rk4_step(const MatrixFn& L, double t, double h, const Eigen::MatrixXd& M) {
  Eigen::MatrixXd Lm = L(t + 0.5 * h);
  Eigen::MatrixXd k1 = L(t) * M;
  Eigen::MatrixXd k2 = Lm * (M + 0.5 * h * k1);
  Eigen::MatrixXd k3 = Lm * (M + 0.5 * h * k2);
  Eigen::MatrixXd k4 = L(t + h) * (M + h * k3);
  return M + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

OdePath ode_linear_integrate(const MatrixFn& L, double t0, double t1, int steps, const Eigen::MatrixXd& M0,
                             bool estimate_error) {
  if (steps < 1) throw std::invalid_argument("ode_linear_integrate: steps must be >= 1");
  OdePath out;
  out.M.reserve(steps + 1);
  out.M.push_back(M0);
  const double h = (t1 - t0) / steps;
  Eigen::MatrixXd M = M0;
  for (int k = 0; k < steps; ++k) {
    M = rk4_step(L, t0 + k * h, h, M);
    out.M.push_back(M);
  }
  if (estimate_error) {
    Eigen::MatrixXd Mh = M0;
    for (int k = 0; k < 2 * steps; ++k) Mh = rk4_step(L, t0 + k * h / 2, h / 2, Mh);
    // Richardson: error of the coarse solution ~ (16/15)|coarse - fine|
    out.error_estimate = (M - Mh).cwiseAbs().maxCoeff() * 16.0 / 15.0;
  }
  return out;
}

OdePath ode_linear_integrate_right(const MatrixFn& L, double t0, double t1, int steps,
                                   const Eigen::MatrixXd& M0) {
  MatrixFn Lt = [&L](double t) -> Eigen::MatrixXd { return L(t).transpose(); };
  OdePath p = ode_linear_integrate(Lt, t0, t1, steps, M0.transpose());
  for (auto& m : p.M) m.transposeInPlace();
  return p;
}

namespace {

inline double d1(double fm2, double fm1, double fp1, double fp2, double h) {
  return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
}
inline double d2(double fm2, double fm1, double f0, double fp1, double fp2, double h) {
  return (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
}

}  // namespace

Field2D diff_x(const Field2D& f, double hx) {
  Field2D r(f.nx, f.ny, kNaN);
  for (int ix = 2; ix < f.nx - 2; ++ix)
    for (int iy = 0; iy < f.ny; ++iy) r(ix, iy) = d1(f(ix - 2, iy), f(ix - 1, iy), f(ix + 1, iy), f(ix + 2, iy), hx);
  return r;
}

Field2D diff_y(const Field2D& f, double hy) {
  Field2D r(f.nx, f.ny, kNaN);
  for (int ix = 0; ix < f.nx; ++ix)
    for (int iy = 2; iy < f.ny - 2; ++iy) r(ix, iy) = d1(f(ix, iy - 2), f(ix, iy - 1), f(ix, iy + 1), f(ix, iy + 2), hy);
  return r;
}

Field2D diff_yy(const Field2D& f, double hy) {
  Field2D r(f.nx, f.ny, kNaN);
  for (int ix = 0; ix < f.nx; ++ix)
    for (int iy = 2; iy < f.ny - 2; ++iy)
      r(ix, iy) = d2(f(ix, iy - 2), f(ix, iy - 1), f(ix, iy), f(ix, iy + 1), f(ix, iy + 2), hy);
  return r;
}

Field2D mixed_second_derivative(const Field2D& f, const Grid2D& g) {
  if (f.nx < 5 || f.ny < 5) throw std::invalid_argument("mixed_second_derivative: grid too small");
  if (f.nx != g.Nx || f.ny != g.Ny) throw std::invalid_argument("mixed_second_derivative: field/grid mismatch");
  return diff_x(diff_y(f, g.hy), g.hx);
}

std::vector<double> diff_1d(const std::vector<double>& f, double h) {
  const int n = static_cast<int>(f.size());
  std::vector<double> r(n, kNaN);
  for (int i = 2; i < n - 2; ++i) r[i] = d1(f[i - 2], f[i - 1], f[i + 1], f[i + 2], h);
  return r;
}

std::vector<double> diff2_1d(const std::vector<double>& f, double h) {
  const int n = static_cast<int>(f.size());
  std::vector<double> r(n, kNaN);
  for (int i = 2; i < n - 2; ++i) r[i] = d2(f[i - 2], f[i - 1], f[i], f[i + 1], f[i + 2], h);
  return r;
}

std::vector<double> cumulative_integral(const std::vector<double>& f, double h, int baseline) {
  const int n = static_cast<int>(f.size());
  if (n == 0) return {};
  if (baseline < 0 || baseline >= n) throw std::invalid_argument("cumulative_integral: baseline out of range");
  // integral over [x_j, x_{j+1}]
  std::vector<double> seg(std::max(0, n - 1));
  for (int j = 0; j + 1 < n; ++j) {
    if (n < 4) {
      seg[j] = 0.5 * h * (f[j] + f[j + 1]);
    } else if (j == 0) {
      seg[j] = h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]);
    } else if (j == n - 2) {
      seg[j] = h / 24.0 * (f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] + 9.0 * f[n - 1]);
    } else {
      seg[j] = h / 24.0 * (-f[j - 1] + 13.0 * f[j] + 13.0 * f[j + 1] - f[j + 2]);
    }
  }
  std::vector<double> F(n, 0.0);
  for (int j = baseline + 1; j < n; ++j) F[j] = F[j - 1] + seg[j - 1];
  for (int j = baseline - 1; j >= 0; --j) F[j] = F[j + 1] - seg[j];
  return F;
}

std::vector<double> leading_minors(const Eigen::MatrixXd& X) {
  if (X.rows() != X.cols()) throw std::invalid_argument("leading_minors: matrix must be square");
  const int k = static_cast<int>(X.rows());
  std::vector<double> d(k);
  for (int i = 1; i <= k; ++i) d[i - 1] = X.topLeftCorner(i, i).partialPivLu().determinant();
  return d;
}

double cofactor_determinant(const Eigen::MatrixXd& X) {
  const int n = static_cast<int>(X.rows());
  if (n == 0) return 1.0;
  if (n == 1) return X(0, 0);
  double det = 0.0;
  for (int c = 0; c < n; ++c) {
    if (X(0, c) == 0.0) continue;
    Eigen::MatrixXd minor(n - 1, n - 1);
    for (int r = 1; r < n; ++r)
      for (int cc = 0, m = 0; cc < n; ++cc)
        if (cc != c) minor(r - 1, m++) = X(r, cc);
    det += ((c % 2) ? -1.0 : 1.0) * X(0, c) * cofactor_determinant(minor);
  }
  return det;
}

namespace {
int g_jobs = 1;
}

int default_jobs() { return g_jobs; }
void set_default_jobs(int jobs) { g_jobs = std::max(1, jobs); }

void parallel_for(int n, int jobs, const std::function<void(int)>& body) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(jobs, n); ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) body(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace lietoda
