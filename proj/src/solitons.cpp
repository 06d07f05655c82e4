#include "lietoda/solitons.hpp"

#include <cmath>

namespace lietoda {

void WronskianFrame::validate() const {
  if (k < 1) throw ConfigError("frame: k must be >= 1");
  if (modes.empty()) throw ConfigError("frame: at least one mode is required");
  if (!amps.empty() && amps.size() != modes.size()) throw ConfigError("frame: amps must match modes in length");
  if (!xmodes.empty() && xmodes.size() != modes.size()) throw ConfigError("frame: xmodes must match modes in length");
  if (!xamps.empty() && xamps.size() != modes.size()) throw ConfigError("frame: xamps must match modes in length");
}

double WronskianFrame::X(int q, double y, double t) const {
  const double a = modes[q];
  return std::exp(a * y + std::pow(a, k) * t + c(q));
}

Jet WronskianFrame::X_jet(int q, double y, double t, int py, int pt) const {
  const double a = modes[q];
  return exp_linear(a, std::pow(a, k), c(q), y, t, py, pt);
}

WronskianFrame WronskianFrame::default_frame(int k) {
  WronskianFrame f;
  f.k = k;
  if (k == 2)
    f.modes = {-1.0, 0.3, 1.1};
  else if (k == 3)
    f.modes = {-1.2, -0.2, 0.5, 1.3};
  else
    throw std::invalid_argument("default_frame: only k = 2 and k = 3 have defaults");
  f.amps.assign(f.modes.size(), 0.0);
  return f;
}

nlohmann::json WronskianFrame::to_json() const {
  nlohmann::json j = {{"k", k}, {"modes", modes}, {"amps", amps}};
  if (!xmodes.empty()) j["xmodes"] = xmodes;
  if (!xamps.empty()) j["xamps"] = xamps;
  return j;
}

WronskianFrame WronskianFrame::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("frame: expected an object");
  WronskianFrame f;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    auto nums = [&](std::vector<double>& out) {
      if (!it->is_array()) throw ConfigError("frame/" + key + ": expected an array of numbers");
      for (const auto& v : *it) {
        if (!v.is_number()) throw ConfigError("frame/" + key + ": expected an array of numbers");
        out.push_back(v.get<double>());
      }
    };
    if (key == "k") {
      if (!it->is_number_integer()) throw ConfigError("frame/k: expected an integer");
      f.k = it->get<int>();
    } else if (key == "modes") {
      nums(f.modes);
    } else if (key == "amps") {
      nums(f.amps);
    } else if (key == "xmodes") {
      nums(f.xmodes);
    } else if (key == "xamps") {
      nums(f.xamps);
    } else {
      throw ConfigError("frame/" + key + ": unknown key");
    }
  }
  if (f.amps.empty()) f.amps.assign(f.modes.size(), 0.0);
  f.validate();
  return f;
}

ResidualReport linear_eq_residual(const WronskianFrame& f, const Grid2D& yt, double tol) {
  f.validate();
  ResidualAccumulator acc("linear_equation[k=" + std::to_string(f.k) + "]", tol);
  for (int q = 0; q < f.size(); ++q)
    for (int iy = 0; iy < yt.Nx; ++iy)
      for (int it = 0; it < yt.Ny; ++it) {
        Jet X = f.X_jet(q, yt.x(iy), yt.y(it), f.k, 1);
        acc.add(X.derivative(0, 1) - X.derivative(f.k, 0), {q, iy, it});
      }
  return acc.report();
}

ResidualReport linear_eq_residual(const SampledBasis& b, const Grid2D& yt, double tol) {
  if (b.k < 1 || static_cast<int>(b.A.size()) > b.k + 1) throw std::invalid_argument("linear_eq_residual: bad A");
  std::vector<ResidualReport> parts;
  for (size_t q = 0; q < b.fns.size(); ++q) {
    Field2D X(yt);
    for (int iy = 0; iy < yt.Nx; ++iy)
      for (int it = 0; it < yt.Ny; ++it) X(iy, it) = b.fns[q](yt.x(iy), yt.y(it));
    std::vector<Field2D> D{X};  // D[p] = d^p X / dy^p
    for (int p = 1; p <= b.k; ++p) D.push_back(diff_x(D.back(), yt.hx));
    Field2D r = diff_y(X, yt.hy) - D[b.k];
    for (int s = 2; s < static_cast<int>(b.A.size()); ++s)
      if (b.A[s] != 0.0) r = r - b.A[s] * D[b.k - s];
    parts.push_back(make_report(q < b.labels.size() ? b.labels[q] : "X" + std::to_string(q + 1), r, tol,
                                kStencilRing * b.k));
  }
  return combine("linear_equation_sampled[k=" + std::to_string(b.k) + "]", parts, tol);
}

namespace {

std::vector<std::vector<Jet>> wronskian_jets(const WronskianFrame& f, double y, double t, int py, int pt) {
  const int m = f.size();
  std::vector<std::vector<Jet>> W(m, std::vector<Jet>(m));
  for (int q = 0; q < m; ++q) {
    Jet X = f.X_jet(q, y, t, py, pt);
    double ap = 1.0;
    for (int p = 0; p < m; ++p) {
      W[p][q] = ap * X;
      ap *= f.modes[q];
    }
  }
  return W;
}

template <class T>
std::vector<T> frobenius_from_minors(const std::vector<T>& W) {
  std::vector<T> phi;
  for (size_t i = 0; i < W.size(); ++i) {
    if (i == 0)
      phi.push_back(W[0]);
    else if (i == 1)
      phi.push_back(W[1] / (W[0] * W[0]));
    else
      phi.push_back(W[i] * W[i - 2] / (W[i - 1] * W[i - 1]));
  }
  return phi;
}

}  // namespace

FrobeniusResult frobenius_factors(const WronskianFrame& f, double tbar, double y0, double h, int N, int baseline) {
  f.validate();
  if (N < 4 || baseline < 0 || baseline >= N) throw std::invalid_argument("frobenius_factors: bad axis");
  const int m = f.size();
  FrobeniusResult R;
  R.phi.assign(m, std::vector<double>(N));
  R.minors.assign(m, std::vector<double>(N));
  R.ratios.assign(std::max(0, m - 1), std::vector<double>(N));
  for (int j = 0; j < N; ++j) {
    const double y = y0 + h * j;
    R.y.push_back(y);
    Eigen::MatrixXd W(m, m);
    for (int q = 0; q < m; ++q) {
      double ap = 1.0, X = f.X(q, y, tbar);
      for (int p = 0; p < m; ++p) {
        W(p, q) = ap * X;
        ap *= f.modes[q];
      }
    }
    std::vector<double> d = leading_minors(W);
    for (int i = 0; i < m; ++i) {
      if (d[i] == 0.0 || !std::isfinite(d[i]) || (j > 0 && (d[i] > 0) != (R.minors[i][0] > 0)))
        throw GenericityError("Wronskian minor Det_" + std::to_string(i + 1) + " vanishes near y = " +
                                  std::to_string(y) + ", tbar = " + std::to_string(tbar),
                              {y, tbar});
      R.minors[i][j] = d[i];
    }
    std::vector<double> ph = frobenius_from_minors(d);
    for (int i = 0; i < m; ++i) R.phi[i][j] = ph[i];
    for (int i = 0; i + 1 < m; ++i) R.ratios[i][j] = d[i + 1] / d[i];
  }
  // values of f_q^{(j)} = (f_q^{(j-1)})' / phi_j, f_q^{(1)} = X_q / phi_1, at the baseline
  const double yb = R.y[baseline];
  auto Wj = wronskian_jets(f, yb, tbar, m + 1, 0);
  std::vector<Jet> phij = frobenius_from_minors(jet_leading_minors(Wj));
  R.reconstructed.assign(m, std::vector<double>(N));
  for (int q = 0; q < m; ++q) {
    std::vector<double> base(q + 2, 0.0);  // base[j] = f_q^{(j)}(yb)
    Jet fj = f.X_jet(q, yb, tbar, m + 1, 0) / phij[0];
    base[1] = fj.value();
    for (int j = 2; j <= q + 1; ++j) {
      fj = fj.dy() / phij[j - 1];
      base[j] = fj.value();
    }
    std::vector<double> g(N, 1.0);  // f_q^{(q+1)} = 1
    for (int j = q + 1; j >= 2; --j) {
      std::vector<double> integrand(N);
      for (int s = 0; s < N; ++s) integrand[s] = R.phi[j - 1][s] * g[s];
      std::vector<double> F = cumulative_integral(integrand, h, baseline);
      for (int s = 0; s < N; ++s) g[s] = base[j - 1] + F[s];
    }
    for (int s = 0; s < N; ++s) {
      R.reconstructed[q][s] = R.phi[0][s] * g[s];
      R.roundtrip_error = std::max(R.roundtrip_error, std::abs(R.reconstructed[q][s] - f.X(q, R.y[s], tbar)));
    }
  }
  return R;
}

namespace {

struct ChainNode {
  std::vector<double> G, Gt;                // sites 1..m (index i-1)
  std::vector<std::vector<double>> pi, piy;  // pi[s][i-1], s = 1..k
  std::vector<double> topy;                  // (G_i...G_{i+k-1})'
  double structure = 0.0;                    // grades above k, L shape, top product
  double frobenius = 0.0;                    // |G_i - phi_i|
};

ChainNode chain_node(const WronskianFrame& f, double y, double t) {
  const int m = f.size(), N = m + 1, k = f.k;
  const int py = m + 3, pt = 2;
  std::vector<std::vector<Jet>> M(N, std::vector<Jet>(N, Jet(py, pt, 0.0)));
  M[0][0] = Jet(py, pt, 1.0);
  for (int q = 1; q < N; ++q) {
    const double a = f.modes[q - 1];
    if (a == 0.0) throw GenericityError("nilpotent chain: zero mode has no exponential antiderivative", {y, t});
    M[0][q] = (1.0 / a) * f.X_jet(q - 1, y, t, py, pt);
  }
  std::vector<Jet> G(N);  // G[r], r = 1..m
  for (int r = 1; r < N; ++r) {
    G[r] = M[r - 1][r].dy();
    if (G[r].value() == 0.0) throw GenericityError("nilpotent chain: vanishing G_" + std::to_string(r), {y, t});
    for (int j = 0; j < N; ++j) M[r][j] = M[r - 1][j].dy() / G[r];
  }
  // inverse of the unit upper-triangular M
  std::vector<std::vector<Jet>> Mi(N, std::vector<Jet>(N, Jet(py, pt, 0.0)));
  for (int i = N - 1; i >= 0; --i) {
    Mi[i][i] = Jet(py, pt, 1.0);
    for (int j = i + 1; j < N; ++j) {
      Jet s(py, pt, 0.0);
      for (int l = i + 1; l <= j; ++l) s += M[i][l] * Mi[l][j];
      Mi[i][j] = -s;
    }
  }
  auto product = [&](const std::vector<std::vector<Jet>>& A) {
    std::vector<std::vector<Jet>> R(N, std::vector<Jet>(N));
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        Jet s = A[i][0] * Mi[0][j];
        for (int l = 1; l < N; ++l) s += A[i][l] * Mi[l][j];
        R[i][j] = s;
      }
    return R;
  };
  std::vector<std::vector<Jet>> Mt(N, std::vector<Jet>(N)), My(N, std::vector<Jet>(N));
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      Mt[i][j] = M[i][j].dt();
      My[i][j] = M[i][j].dy();
    }
  auto P = product(Mt), L = product(My);

  ChainNode c;
  for (int i = 1; i <= m; ++i) {
    c.G.push_back(G[i].value());
    c.Gt.push_back(G[i].dt().value());
  }
  c.pi.assign(k + 1, std::vector<double>(m, 0.0));
  c.piy = c.pi;
  for (int s = 1; s <= k; ++s)
    for (int i = 1; i + s <= N; ++i) {
      c.pi[s][i - 1] = P[i - 1][i - 1 + s].value();
      c.piy[s][i - 1] = P[i - 1][i - 1 + s].dy().value();
    }
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      if (j - i > k || j <= i) c.structure = std::max(c.structure, std::abs(P[i][j].value()));
      double want = (j == i + 1) ? G[i + 1].value() : 0.0;
      c.structure = std::max(c.structure, std::abs(L[i][j].value() - want));
    }
  for (int i = 1; i + k <= N; ++i) {
    Jet prod = G[i];
    for (int l = 1; l < k; ++l) prod = prod * G[i + l];
    c.structure = std::max(c.structure, std::abs(prod.value() - c.pi[k][i - 1]));
    c.topy.push_back(prod.dy().value());
  }
  // Frobenius factors of the frame itself
  std::vector<double> W = leading_minors([&] {
    Eigen::MatrixXd A(m, m);
    for (int q = 0; q < m; ++q) {
      double ap = 1.0, X = f.X(q, y, t);
      for (int p = 0; p < m; ++p) {
        A(p, q) = ap * X;
        ap *= f.modes[q];
      }
    }
    return A;
  }());
  std::vector<double> phi = frobenius_from_minors(W);
  for (int i = 0; i < m; ++i) c.frobenius = std::max(c.frobenius, std::abs(c.G[i] - phi[i]) / std::max(1.0, std::abs(phi[i])));
  return c;
}

}  // namespace

ResidualReport nilpotent_chain_residual(const WronskianFrame& f, const Grid2D& yt, double tol) {
  f.validate();
  const int m = f.size(), N = m + 1, k = f.k;
  if (k < 2) throw std::invalid_argument("nilpotent_chain_residual: k must be >= 2");
  std::vector<ChainNode> nodes(static_cast<size_t>(yt.Nx) * yt.Ny);
  for (int iy = 0; iy < yt.Nx; ++iy)
    for (int it = 0; it < yt.Ny; ++it) nodes[static_cast<size_t>(iy) * yt.Ny + it] = chain_node(f, yt.x(iy), yt.y(it));
  auto at = [&](int iy, int it) -> const ChainNode& { return nodes[static_cast<size_t>(iy) * yt.Ny + it]; };

  ResidualAccumulator local("local", tol), nonlocal("nonlocal", tol), structure("structure", tol),
      frob("frobenius_identification", tol);
  double printed = 0.0;
  for (int iy = 0; iy < yt.Nx; ++iy)
    for (int it = 0; it < yt.Ny; ++it) {
      const ChainNode& c = at(iy, it);
      structure.add(c.structure, {iy, it});
      frob.add(c.frobenius, {iy, it});
      for (int i = 1; i <= m; ++i) local.add(c.piy[1][i - 1] - c.Gt[i - 1], {1, i, iy, it});
      for (int s = 2; s < k; ++s)
        for (int i = 1; i + s <= N; ++i)
          local.add(c.piy[s][i - 1] - (c.G[i - 1] * c.pi[s - 1][i] - c.pi[s - 1][i - 1] * c.G[i + s - 2]),
                    {s, i, iy, it});
      for (int i = 1; i + k <= N; ++i) {
        double rhs = c.G[i - 1] * c.pi[k - 1][i] - c.pi[k - 1][i - 1] * c.G[i + k - 2];
        local.add(c.topy[i - 1] - rhs, {k, i, iy, it});
        printed = std::max(printed, std::abs(c.topy[i - 1] + rhs));
      }
    }
  // nonlocal: integrate along y from the first node, constants from the baseline values
  for (int it = 0; it < yt.Ny; ++it) {
    std::vector<std::vector<std::vector<double>>> Pi(k, std::vector<std::vector<double>>(m + 1));
    auto line = [&](auto get) {
      std::vector<double> v(yt.Nx);
      for (int iy = 0; iy < yt.Nx; ++iy) v[iy] = get(at(iy, it));
      return v;
    };
    for (int s = 1; s < k; ++s)
      for (int i = 1; i + s <= N; ++i) {
        std::vector<double> src(yt.Nx);
        for (int iy = 0; iy < yt.Nx; ++iy) {
          const ChainNode& c = at(iy, it);
          src[iy] = s == 1 ? c.Gt[i - 1] : c.G[i - 1] * Pi[s - 1][i + 1][iy] - Pi[s - 1][i][iy] * c.G[i + s - 2];
        }
        std::vector<double> F = cumulative_integral(src, yt.hx, 0);
        const double c0 = at(0, it).pi[s][i - 1];
        Pi[s][i].resize(yt.Nx);
        for (int iy = 0; iy < yt.Nx; ++iy) {
          Pi[s][i][iy] = c0 + F[iy];
          nonlocal.add(Pi[s][i][iy] - at(iy, it).pi[s][i - 1], {s, i, iy, it});
        }
      }
    for (int i = 1; i + k <= N; ++i) {
      std::vector<double> topy = line([&](const ChainNode& c) { return c.topy[i - 1]; });
      for (int iy = 0; iy < yt.Nx; ++iy) {
        const ChainNode& c = at(iy, it);
        double rhs = c.G[i - 1] * Pi[k - 1][i + 1][iy] - Pi[k - 1][i][iy] * c.G[i + k - 2];
        nonlocal.add(topy[iy] - rhs, {k, i, iy, it});
      }
    }
  }
  ResidualReport r = combine("nilpotent_chain[k=" + std::to_string(k) + ",m=" + std::to_string(m) + "]",
                             {local.report(), nonlocal.report(), structure.report(), frob.report()}, tol);
  r.meta["printed_sign_max"] = printed;
  r.meta["sites"] = m;
  return r;
}

Eigen::MatrixXd vandermonde_frame(const std::vector<double>& a) {
  const int N = static_cast<int>(a.size());
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(N, N);
  for (int q = 0; q < N; ++q) {
    double p = 1.0;
    for (int r = 0; r < N; ++r) {
      U(r, q) = p;
      p *= a[q] - a[r];
    }
  }
  return U;
}

GradedLagrangian frame_lagrangian(Side side, const std::vector<double>& modes, int power, bool gauged) {
  const int N = static_cast<int>(modes.size()), n = N - 1;
  if (n < 1) throw std::invalid_argument("frame_lagrangian: need at least two modes");
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    D(i, i) = modes[i];
    if (i + 1 < N) D(i, i + 1) = 1.0;
  }
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(N, N);
  for (int p = 0; p < power; ++p) P = P * D;
  GradedLagrangian L(side, n, power);
  for (int g = 1; g <= power; ++g)
    for (int i = 1; i + g <= N; ++i) {
      const double c = P(i - 1, i - 1 + g);
      if (gauged)
        L.set(g, i, CoeffFn::exponential(c, P(i - 1 + g, i - 1 + g) - P(i - 1, i - 1)));
      else
        L.set(g, i, CoeffFn::constant(c));
    }
  if (gauged) return L;
  const double kappa = P.trace() / N;
  double c = 0.0;
  for (int i = 1; i <= n; ++i) {
    c += P(i - 1, i - 1) - kappa;
    if (c != 0.0) L.set(0, i, CoeffFn::constant(c));
  }
  return L;
}

namespace {

double sum_pow(const std::vector<double>& a, int p) {
  double s = 0.0;
  for (double v : a) s += std::pow(v, p);
  return s;
}

std::vector<double> xmodes_of(const WronskianFrame& f) {
  std::vector<double> b(f.size());
  for (int q = 0; q < f.size(); ++q) b[q] = f.b(q);
  return b;
}

ResidualReport compare_path(const std::string& name, const std::vector<Eigen::MatrixXd>& got,
                            const std::function<Eigen::MatrixXd(int)>& want, double tol) {
  ResidualAccumulator acc(name, tol);
  for (size_t k = 0; k < got.size(); ++k) {
    Eigen::MatrixXd w = want(static_cast<int>(k));
    acc.add((got[k] - w).cwiseAbs().maxCoeff() / std::max(1.0, w.cwiseAbs().maxCoeff()), {static_cast<int>(k)});
  }
  return acc.report();
}

// Closed forms of the frame flows. Unimodular versions carry the central
// factor; gauged versions also drop exp(y a_r + t a_r^p) per row (column).
struct FrameForms {
  const WronskianFrame& f;
  int N, tp_plus, tp_minus;
  std::vector<double> a, b;
  Eigen::MatrixXd Ua, Ub;
  double csum = 0.0, dsum = 0.0;

  FrameForms(const WronskianFrame& fr, int tpp, int tpm)
      : f(fr), N(fr.size()), tp_plus(tpp), tp_minus(tpm), a(fr.modes), b(xmodes_of(fr)) {
    Ua = vandermonde_frame(a);
    Ub = vandermonde_frame(b);
    for (int q = 0; q < N; ++q) {
      csum += f.c(q);
      dsum += f.d(q);
    }
  }
  double ex(const std::vector<double>& m, int r, double s, double t, int tp) const {
    return m[r] * s + (tp ? std::pow(m[r], tp) * t : 0.0);
  }
  double mean(const std::vector<double>& m, double s, double t, int tp) const {
    return (sum_pow(m, 1) * s + (tp ? sum_pow(m, tp) * t : 0.0)) / N;
  }
  Eigen::MatrixXd plus(double y, double t, bool gauged) const {
    Eigen::VectorXd X(N);
    for (int q = 0; q < N; ++q) X(q) = std::exp(ex(a, q, y, t, tp_plus) + f.c(q));
    const double g = std::exp(-mean(a, y, t, tp_plus) - csum / N) / std::pow(Ua.determinant(), 1.0 / N);
    Eigen::MatrixXd M = g * Ua * X.asDiagonal();
    if (gauged)
      for (int r = 0; r < N; ++r) M.row(r) *= std::exp(-ex(a, r, y, t, tp_plus) + mean(a, y, t, tp_plus));
    return M;
  }
  Eigen::MatrixXd minus_inv(double x, double t, bool gauged) const {
    Eigen::VectorXd Y(N);
    for (int q = 0; q < N; ++q) Y(q) = std::exp(ex(b, q, x, t, tp_minus) + f.d(q));
    const double g = std::exp(-mean(b, x, t, tp_minus) - dsum / N) / std::pow(Ub.determinant(), 1.0 / N);
    Eigen::MatrixXd M = g * Y.asDiagonal() * Ub.transpose();
    if (gauged)
      for (int r = 0; r < N; ++r) M.col(r) *= std::exp(-ex(b, r, x, t, tp_minus) + mean(b, x, t, tp_minus));
    return M;
  }
};

}  // namespace

KernelField frozen_time_kernel(const WronskianFrame& f, const Grid2D& g, double tbar, bool with_derivatives) {
  f.validate();
  g.validate();
  const FrameForms F(f, f.k, 0);
  GradedLagrangian plus = frame_lagrangian(Side::plus, F.a, 1, false);
  GradedLagrangian minus = frame_lagrangian(Side::minus, F.b, 1, false);
  const int ax = g.Nx / 2, ay = g.Ny / 2;
  FlowPath pp = solve_smatrix(plus, g.y0, g.hy, g.Ny, ay, F.plus(g.y(ay), tbar, false));
  FlowPath pm = solve_smatrix(minus, g.x0, g.hx, g.Nx, ax, F.minus_inv(g.x(ax), 0.0, false));
  KernelField K = kernel(pp, pm, plus, minus, with_derivatives);
  K.meta["tbar"] = tbar;
  return K;
}

TimeTauResult time_dependent_tau(const TimeTauSetup& s) {
  const WronskianFrame& f = s.frame;
  f.validate();
  const int n = s.n, N = n + 1, k = f.k;
  if (f.size() != N)
    throw std::invalid_argument("time_dependent_tau: frame has " + std::to_string(f.size()) + " modes, A_" +
                                std::to_string(n) + " needs " + std::to_string(N));
  s.grid.validate();
  const Grid2D& g = s.grid;
  const std::vector<double> a = f.modes, b = xmodes_of(f);
  for (int q = 1; q < N; ++q)
    if (!(a[q] > a[q - 1]) || !(b[q] > b[q - 1]))
      throw std::invalid_argument("time_dependent_tau: modes and xmodes must be strictly increasing");
  const bool mirrored = s.time_side == Side::minus;
  const FrameForms F(f, mirrored ? 0 : k, mirrored ? k : 0);
  auto Mplus = [&](double y, double t) { return F.plus(y, t, false); };
  auto Mminv = [&](double x, double t) { return F.minus_inv(x, t, false); };
  auto Gplus = [&](double y, double t) { return F.plus(y, t, true); };
  auto Gminv = [&](double x, double t) { return F.minus_inv(x, t, true); };

  TimeTauResult R;
  const int half = 5;
  std::vector<ResidualReport> parts;
  FlowPath plus_path, minus_path;
  if (!mirrored) {
    // axis x = x, axis y = tbar; two-parameter flow in (y, tbar) checked against the closed form
    GradedLagrangian space = frame_lagrangian(Side::plus, a, 1, false), time = frame_lagrangian(Side::plus, a, k, false);
    const int at = g.Ny / 2;
    const double ys = s.fixed - half * g.hy;
    TimeflowResult tf = solve_timeflow(space, time, ys, g.hy, 2 * half + 1, half, g.y0, g.hy, g.Ny, at,
                                       Mplus(s.fixed, g.y(at)), 1e-8, s.substeps);
    parts.push_back(compare_path("timeflow_vs_closed_form", tf.M,
                                 [&](int q) { return Mplus(ys + g.hy * (q / g.Ny), g.y(q % g.Ny)); }, 1e-8));
    parts.push_back(tf.consistency);
    R.plus = frame_lagrangian(Side::plus, a, k, true);
    R.minus = frame_lagrangian(Side::minus, b, 1, true);
    plus_path = solve_smatrix(R.plus, g.y0, g.hy, g.Ny, at, Gplus(s.fixed, g.y(at)), s.substeps);
    parts.push_back(compare_path("plus_flow_vs_closed_form", plus_path.M,
                                 [&](int q) { return Gplus(s.fixed, g.y(q)); }, 1e-8));
    const int ax = g.Nx / 2;
    minus_path = solve_smatrix(R.minus, g.x0, g.hx, g.Nx, ax, Gminv(g.x(ax), 0.0), s.substeps);
    parts.push_back(compare_path("minus_flow_vs_closed_form", minus_path.M,
                                 [&](int q) { return Gminv(g.x(q), 0.0); }, 1e-8));
  } else {
    // axis x = t (time on the x side), axis y = y
    GradedLagrangian space = frame_lagrangian(Side::minus, b, 1, false), time = frame_lagrangian(Side::minus, b, k, false);
    const int at = g.Nx / 2;
    const double xs = s.fixed - half * g.hx;
    TimeflowResult tf = solve_timeflow(space, time, xs, g.hx, 2 * half + 1, half, g.x0, g.hx, g.Nx, at,
                                       Mminv(s.fixed, g.x(at)), 1e-8, s.substeps);
    parts.push_back(compare_path("timeflow_vs_closed_form", tf.M,
                                 [&](int q) { return Mminv(xs + g.hx * (q / g.Nx), g.x(q % g.Nx)); }, 1e-8));
    parts.push_back(tf.consistency);
    R.minus = frame_lagrangian(Side::minus, b, k, true);
    R.plus = frame_lagrangian(Side::plus, a, 1, true);
    minus_path = solve_smatrix(R.minus, g.x0, g.hx, g.Nx, at, Gminv(s.fixed, g.x(at)), s.substeps);
    parts.push_back(compare_path("minus_flow_vs_closed_form", minus_path.M,
                                 [&](int q) { return Gminv(s.fixed, g.x(q)); }, 1e-8));
    const int ay = g.Ny / 2;
    plus_path = solve_smatrix(R.plus, g.y0, g.hy, g.Ny, ay, Gplus(g.y(ay), 0.0), s.substeps);
    parts.push_back(compare_path("plus_flow_vs_closed_form", plus_path.M,
                                 [&](int q) { return Gplus(g.y(q), 0.0); }, 1e-8));
  }
  R.pipeline = combine("time_dependent_tau_pipeline", parts, 1e-8);
  R.pipeline.meta["mirrored"] = mirrored;
  R.kernel = kernel(plus_path, minus_path, R.plus, R.minus, s.mode == DerivativeMode::exact);
  R.tau = compute_tau(R.kernel, std::max(1, k - 1), s.mode);
  R.p = compute_p(R.tau, R.minus, R.plus);
  R.min_minor = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= n; ++i)
    for (double v : R.tau.tau(i).v) R.min_minor = std::min(R.min_minor, v);
  return R;
}

std::vector<double> DSSoliton::taus(double x, double y, double t) const {
  const int N = n + 1;
  const double tbar = -t;
  std::vector<double> a = frame.modes, b = xmodes_of(frame);
  Eigen::VectorXd XY(N);
  for (int q = 0; q < N; ++q)
    XY(q) = std::exp(a[q] * y + std::pow(a[q], frame.k) * tbar + frame.c(q) + b[q] * x + frame.d(q));
  Eigen::MatrixXd K = vandermonde_frame(a) * XY.asDiagonal() * vandermonde_frame(b).transpose();
  std::vector<double> d = leading_minors(K);
  std::vector<double> out{1.0};
  out.insert(out.end(), d.begin(), d.end());
  return out;
}

std::array<double, 2> DSSoliton::uv(double x, double y, double t) const {
  std::vector<double> T = taus(x, y, t);
  return {T[site - 1] / T[site], T[site + 1] / T[site]};
}

DSSoliton ds_soliton(const WronskianFrame& f, int site) {
  f.validate();
  DSSoliton s;
  s.frame = f;
  if (s.frame.amps.empty()) s.frame.amps.assign(f.modes.size(), 0.0);
  s.n = f.size() - 1;
  if (s.n < 1) throw std::invalid_argument("ds_soliton: frame needs at least two modes");
  if (site < 1 || site > s.n) throw std::invalid_argument("ds_soliton: site out of range");
  s.site = site;
  return s;
}

std::pair<SpaceTimeField, SpaceTimeField> sample_ds(const DSSoliton& s, const Grid2D& g, double t0, double ht,
                                                    int Nt) {
  SpaceTimeField u, v;
  u.grid = v.grid = g;
  u.t0 = v.t0 = t0;
  u.ht = v.ht = ht;
  for (int it = 0; it < Nt; ++it) {
    Field2D U(g), V(g);
    for (int ix = 0; ix < g.Nx; ++ix)
      for (int iy = 0; iy < g.Ny; ++iy) {
        auto p = s.uv(g.x(ix), g.y(iy), t0 + ht * it);
        U(ix, iy) = p[0];
        V(ix, iy) = p[1];
      }
    u.slices.push_back(std::move(U));
    v.slices.push_back(std::move(V));
  }
  return {std::move(u), std::move(v)};
}

ResidualReport ds_translation_check(const DSSoliton& s, const Grid2D& g, double tbar_max, int Nt, double tol) {
  int nonzero = -1, count = 0;
  for (int q = 0; q < s.frame.size(); ++q)
    if (s.frame.modes[q] != 0.0) {
      nonzero = q;
      ++count;
    }
  if (count != 1) throw std::invalid_argument("ds_translation_check: needs a one-mode frame");
  const double a = s.frame.modes[nonzero];
  const double c = -std::pow(a, s.frame.k - 1);
  ResidualAccumulator acc("ds_translation", tol);
  for (int it = 0; it < Nt; ++it) {
    const double tbar = Nt > 1 ? tbar_max * it / (Nt - 1) : 0.0;
    for (int ix = 0; ix < g.Nx; ++ix)
      for (int iy = 0; iy < g.Ny; ++iy) {
        auto p = s.uv(g.x(ix), g.y(iy), -tbar);
        auto q = s.uv(g.x(ix), g.y(iy) - c * tbar, 0.0);
        acc.add(std::max(std::abs(p[0] - q[0]), std::abs(p[1] - q[1])), {ix, iy, it});
      }
  }
  ResidualReport r = acc.report();
  r.meta["speed"] = c;
  return r;
}

}  // namespace lietoda
