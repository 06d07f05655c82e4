#include "lietoda/lattice.hpp"

#include "lietoda/identities.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace lietoda {

std::string mode_name(DerivativeMode m) { return m == DerivativeMode::exact ? "exact" : "finite_difference"; }

const Field2D& TauField::tau(int i) const {
  if (i < 0 || i > n + 1) return zero_;
  return tau_[i];
}

const Field2D& TauField::theta(int i) const {
  if (i < 1 || i > n) return zero_;
  return theta_[i - 1];
}

Field2D TauField::Theta(int sign, int p, int i) const {
  Field2D r = one_;
  for (int l = 0; l <= p; ++l) r = r * theta(i + sign * l);
  return r;
}

const Field2D& TauField::alpha(int sign, int m, int i) const {
  if (m < 0) return zero_;
  if (m == 0) return one_;
  if (m > depth) throw ContractError("alpha depth " + std::to_string(m) + " not computed");
  if (i < 1 || i > n) return zero_;
  return alpha_[slot(sign, m, i)];
}

const Field2D& TauField::alphabar(int sign, int m, int i) const {
  if (m < 0) return zero_;
  if (m == 0) return one_;
  if (m > depth) throw ContractError("alphabar depth " + std::to_string(m) + " not computed");
  if (i < 1 || i > n) return zero_;
  return alphabar_[slot(sign, m, i)];
}

const Field2D& TauField::alpha_y(int sign, int m, int i) const {
  if (m <= 0 || i < 1 || i > n) return zero_;
  if (m > depth) throw ContractError("alpha depth " + std::to_string(m) + " not computed");
  return alpha_y_[slot(sign, m, i)];
}

const Field2D& TauField::alphabar_x(int sign, int m, int i) const {
  if (m <= 0 || i < 1 || i > n) return zero_;
  if (m > depth) throw ContractError("alphabar depth " + std::to_string(m) + " not computed");
  return alphabar_x_[slot(sign, m, i)];
}

const Field2D& TauField::ln_tau_xy(int i) const {
  if (i < 1 || i > n) return zero_;
  return lnxy_[i - 1];
}

TauField compute_tau(const KernelField& K, int depth, DerivativeMode mode, int jobs) {
  if (depth < 1) throw std::invalid_argument("compute_tau: depth must be >= 1");
  const bool exact = mode == DerivativeMode::exact;
  if (exact && !K.has_derivatives) throw ContractError("compute_tau: exact mode needs kernel derivative data");
  const Grid2D& g = K.grid;
  const int n = K.n, Nx = g.Nx, Ny = g.Ny;
  TauField T;
  T.grid = g;
  T.n = n;
  T.depth = depth;
  T.mode = mode;
  T.zero_ = Field2D(g, 0.0);
  T.one_ = Field2D(g, 1.0);
  T.excluded = Field2D(g, 0.0);
  T.tau_.assign(n + 2, T.one_);

  // one slot per (sign, m, i); nullopt where the word leaves the chain
  const int slots = 2 * depth * n;
  std::vector<std::optional<MatrixElement>> aw(slots), bw(slots);
  for (int sg : {-1, 1})
    for (int m = 1; m <= depth; ++m)
      for (int i = 1; i <= n; ++i) {
        int k = T.slot(sg, m, i);
        if (auto w = t_word(n, sg, m, i)) aw[k].emplace(n, i, Word{}, *w);
        if (auto w = r_word(n, sg, m, i)) bw[k].emplace(n, i, *w, Word{});
      }
  std::vector<MatrixElement> tw;
  for (int i = 1; i <= n; ++i) tw.emplace_back(n, i, Word{}, Word{});

  T.alpha_.assign(slots, T.zero_);
  T.alphabar_.assign(slots, T.zero_);
  T.alpha_y_.assign(slots, T.zero_);
  T.alphabar_x_.assign(slots, T.zero_);
  std::vector<Field2D> tx, ty, txy;
  if (exact) {
    tx.assign(n, T.zero_);
    ty.assign(n, T.zero_);
    txy.assign(n, T.zero_);
  }

  parallel_for(Nx, jobs, [&](int ix) {
    for (int iy = 0; iy < Ny; ++iy) {
      size_t node = static_cast<size_t>(ix) * Ny + iy;
      const Eigen::MatrixXd& G = K.K[node];
      for (int i = 1; i <= n; ++i) {
        T.tau_[i](ix, iy) = tw[i - 1](G);
        if (exact) {
          tx[i - 1](ix, iy) = tw[i - 1].derivative(G, K.Kx[node]);
          ty[i - 1](ix, iy) = tw[i - 1].derivative(G, K.Ky[node]);
          txy[i - 1](ix, iy) = tw[i - 1].mixed_derivative(G, K.Kx[node], K.Ky[node], K.Kxy[node]);
        }
      }
      for (int k = 0; k < slots; ++k) {
        const int i = k % n + 1;
        const double t = T.tau_[i](ix, iy);
        if (aw[k]) {
          double a = (*aw[k])(G) / t;
          T.alpha_[k](ix, iy) = a;
          if (exact) T.alpha_y_[k](ix, iy) = ((*aw[k]).derivative(G, K.Ky[node]) - a * ty[i - 1](ix, iy)) / t;
        }
        if (bw[k]) {
          double b = (*bw[k])(G) / t;
          T.alphabar_[k](ix, iy) = b;
          if (exact) T.alphabar_x_[k](ix, iy) = ((*bw[k]).derivative(G, K.Kx[node]) - b * tx[i - 1](ix, iy)) / t;
        }
      }
    }
  });

  // singular locus: zero, non-finite, or sign different from the central node
  const int cx = Nx / 2, cy = Ny / 2;
  for (int i = 1; i <= n; ++i) {
    const double ref = T.tau_[i](cx, cy);
    for (int ix = 0; ix < Nx; ++ix)
      for (int iy = 0; iy < Ny; ++iy) {
        double t = T.tau_[i](ix, iy);
        if (t == 0.0 || !std::isfinite(t) || (t > 0) != (ref > 0)) {
          T.singular_nodes.push_back({i, ix, iy});
          T.excluded(ix, iy) = 1.0;
        }
      }
  }

  T.theta_.resize(n);
  T.lnxy_.resize(n);
  for (int i = 1; i <= n; ++i) {
    T.theta_[i - 1] = T.tau_[i - 1] * T.tau_[i + 1] / (T.tau_[i] * T.tau_[i]);
    if (exact) {
      const Field2D& t = T.tau_[i];
      T.lnxy_[i - 1] = txy[i - 1] / t - tx[i - 1] * ty[i - 1] / (t * t);
    } else {
      Field2D lt = T.tau_[i].map([](double v) { return v == 0.0 ? kNaN : std::log(std::abs(v)); });
      T.lnxy_[i - 1] = mixed_second_derivative(lt, g);
    }
  }
  if (!exact)
    for (int k = 0; k < slots; ++k) {
      if (aw[k]) T.alpha_y_[k] = diff_y(T.alpha_[k], g.hy);
      if (bw[k]) T.alphabar_x_[k] = diff_x(T.alphabar_[k], g.hx);
    }
  return T;
}

const Field2D& PFields::get(const std::vector<Field2D>& v, int m, int r, int i) const {
  if (r < 1 || r > m || i < 1 || i > n) return zero_;
  return v[static_cast<size_t>(r - 1) * n + (i - 1)];
}

const Field2D& PFields::p(int r, int i) const { return get(p_, m1, r, i); }
const Field2D& PFields::pbar(int r, int i) const { return get(pbar_, m2, r, i); }
const Field2D& PFields::p_y(int r, int i) const { return get(p_y_, m1, r, i); }
const Field2D& PFields::pbar_x(int r, int i) const { return get(pbar_x_, m2, r, i); }

namespace {

// coefficient field of a Lagrangian: phi^g_i along x (minus) or y (plus)
Field2D coefficient_field(const GradedLagrangian& L, int grade, int site, const Grid2D& g) {
  Field2D f(g, 0.0);
  const CoeffFn* c = L.find(grade, site);
  if (!c) return f;
  for (int ix = 0; ix < g.Nx; ++ix)
    for (int iy = 0; iy < g.Ny; ++iy) f(ix, iy) = (*c)(L.side() == Side::minus ? g.x(ix) : g.y(iy));
  return f;
}

// sum_{n=1..m} sum_{s<n} (-1)^s phi^n_{i-s} A^{-s}_{i-1} A^{+(n-s-r)}_{i+r}
// together with its derivative (dA the derivative of the A fields)
template <class Get, class GetD>
void p_sum(const TauField& T, const GradedLagrangian& L, int m, int r, int i, Get A, GetD dA, Field2D& out,
           Field2D& dout) {
  out = T.zeros();
  dout = T.zeros();
  for (int nn = 1; nn <= m; ++nn)
    for (int s = 0; s < nn; ++s) {
      const int site = i - s;
      if (!L.find(nn, site)) continue;
      const int e = nn - s - r;
      if (e < 0) continue;
      Field2D c = coefficient_field(L, nn, site, T.grid);
      if (s % 2) c = -1.0 * c;
      const Field2D &a1 = A(-1, s, i - 1), &a2 = A(+1, e, i + r);
      out = out + c * a1 * a2;
      dout = dout + c * (dA(-1, s, i - 1) * a2 + a1 * dA(+1, e, i + r));
    }
}

}  // namespace

PFields compute_p(const TauField& T, const GradedLagrangian& minus, const GradedLagrangian& plus) {
  PFields P;
  P.n = T.n;
  P.m1 = minus.depth();
  P.m2 = plus.depth();
  if (std::max(P.m1, P.m2) - 1 > T.depth)
    throw ContractError("compute_p: tau field depth " + std::to_string(T.depth) + " is below the required " +
                        std::to_string(std::max(P.m1, P.m2) - 1));
  P.zero_ = T.zeros();
  const int n = T.n;
  for (int i = 1; i <= n; ++i)
    if (minus.find(0, i) || plus.find(0, i)) P.grade0 = true;
  auto A = [&](int sg, int m, int i) -> const Field2D& { return T.alpha(sg, m, i); };
  auto dA = [&](int sg, int m, int i) -> const Field2D& { return T.alpha_y(sg, m, i); };
  auto B = [&](int sg, int m, int i) -> const Field2D& { return T.alphabar(sg, m, i); };
  auto dB = [&](int sg, int m, int i) -> const Field2D& { return T.alphabar_x(sg, m, i); };
  P.p_.resize(static_cast<size_t>(P.m1) * n);
  P.p_y_.resize(P.p_.size());
  P.pbar_.resize(static_cast<size_t>(P.m2) * n);
  P.pbar_x_.resize(P.pbar_.size());
  for (int r = 1; r <= P.m1; ++r)
    for (int i = 1; i <= n; ++i) {
      size_t k = static_cast<size_t>(r - 1) * n + (i - 1);
      p_sum(T, minus, P.m1, r, i, A, dA, P.p_[k], P.p_y_[k]);
    }
  for (int r = 1; r <= P.m2; ++r)
    for (int i = 1; i <= n; ++i) {
      size_t k = static_cast<size_t>(r - 1) * n + (i - 1);
      p_sum(T, plus, P.m2, r, i, B, dB, P.pbar_[k], P.pbar_x_[k]);
    }
  return P;
}

ResidualReport summarize(const std::string& name, const ResidualFields& f, const TauField& tau, double tol) {
  Field2D mask = tau.excluded;
  if (tau.mode == DerivativeMode::finite_difference && !tau.singular_nodes.empty()) {
    Field2D grown = mask;
    for (int ix = 0; ix < mask.nx; ++ix)
      for (int iy = 0; iy < mask.ny; ++iy) {
        if (mask(ix, iy) == 0.0) continue;
        for (int dx = -kStencilRing; dx <= kStencilRing; ++dx)
          for (int dy = -kStencilRing; dy <= kStencilRing; ++dy) {
            int a = ix + dx, b = iy + dy;
            if (a >= 0 && a < mask.nx && b >= 0 && b < mask.ny) grown(a, b) = 1.0;
          }
      }
    mask = grown;
  }
  std::vector<ResidualReport> parts;
  for (const auto& nf : f) {
    Field2D r = Field2D::map2(nf.field, mask, [](double v, double m) { return m != 0.0 ? kNaN : v; });
    parts.push_back(make_report(nf.name, r, tol, kStencilRing));
  }
  ResidualReport rep = combine(name, parts, tol);
  rep.meta["derivatives"] = mode_name(tau.mode);
  rep.meta["singular_nodes"] = static_cast<long>(tau.singular_nodes.size());
  return rep;
}

double max_field_difference(const ResidualFields& a, const ResidualFields& b) {
  if (a.size() != b.size()) throw std::invalid_argument("max_field_difference: field lists differ");
  double m = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    if (a[k].name != b[k].name) throw std::invalid_argument("max_field_difference: " + a[k].name + " vs " + b[k].name);
    const auto &u = a[k].field.v, &w = b[k].field.v;
    for (size_t q = 0; q < u.size(); ++q)
      if (std::isfinite(u[q]) && std::isfinite(w[q])) m = std::max(m, std::abs(u[q] - w[q]));
  }
  return m;
}

ResidualFields toda_fields(const TauField& tau) {
  ResidualFields out;
  for (int i = 1; i <= tau.n; ++i)
    out.push_back({"mixed[" + std::to_string(i) + "]", tau.ln_tau_xy(i) - tau.theta(i)});
  return out;
}

ResidualReport toda_residual(const TauField& tau, const GradedLagrangian& minus, const GradedLagrangian& plus,
                             double tol) {
  if (minus.depth() != 1 || plus.depth() != 1)
    throw ContractError("toda_residual: needs depth-1 flows on both sides");
  if (!minus.grade_is_constant(1, 1.0) || !plus.grade_is_constant(1, 1.0))
    throw ContractError("toda_residual: grade-1 coefficients must all equal 1");
  return summarize("toda[n=" + std::to_string(tau.n) + "]", toda_fields(tau), tau, tol);
}

ResidualFields utoda_fields(const TauField& T, const PFields& P) {
  const int n = T.n, m1 = P.m1, m2 = P.m2;
  if (P.grade0 && std::max(m1, m2) >= 2)
    throw ContractError("utoda: grade-0 coefficients with depth >= 2 are not covered; gauge them into the higher grades");
  ResidualFields out;
  for (int i = 1; i <= n; ++i) {
    for (int r = 1; r <= m2; ++r) {
      Field2D rhs = T.zeros();
      for (int q = 1; q <= m2 - r; ++q)
        rhs = rhs + T.Theta(+1, q - 1, i + r) * P.p(q, i + r) * P.pbar(q + r, i) -
              T.Theta(-1, q - 1, i - 1) * P.p(q, i - q) * P.pbar(q + r, i - q);
      out.push_back({"pbar_x[r=" + std::to_string(r) + ",i=" + std::to_string(i) + "]", P.pbar_x(r, i) - rhs});
    }
    Field2D rhs = T.zeros();
    const int cap = std::min(m1, m2) - 1;
    for (int pp = 0; pp <= cap; ++pp)
      for (int qq = 0; pp + qq <= cap; ++qq)
        rhs = rhs + T.Theta(-1, pp, i) * T.Theta(+1, qq, i) * P.p(pp + qq + 1, i - pp) * P.pbar(pp + qq + 1, i - pp);
    out.push_back({"mixed[" + std::to_string(i) + "]", T.ln_tau_xy(i) - rhs / T.theta(i)});
    for (int r = 1; r <= m1; ++r) {
      Field2D rhs2 = T.zeros();
      for (int q = 1; q <= m1 - r; ++q)
        rhs2 = rhs2 + T.Theta(+1, q - 1, i + r) * P.pbar(q, i + r) * P.p(q + r, i) -
               T.Theta(-1, q - 1, i - 1) * P.pbar(q, i - q) * P.p(q + r, i - q);
      out.push_back({"p_y[r=" + std::to_string(r) + ",i=" + std::to_string(i) + "]", P.p_y(r, i) - rhs2});
    }
  }
  return out;
}

ResidualReport utoda_residual(const TauField& tau, const PFields& p, double tol) {
  ResidualReport r = summarize("utoda[" + std::to_string(p.m1) + "," + std::to_string(p.m2) + "]",
                               utoda_fields(tau, p), tau, tol);
  r.meta["bound"] = "stated";
  return r;
}

ResidualFields alpha_derivative_fields(const TauField& T, const PFields& P, int max_m) {
  if (max_m > T.depth) throw ContractError("alpha_derivative_fields: depth " + std::to_string(max_m) + " not computed");
  ResidualFields out;
  for (int i = 1; i <= T.n; ++i)
    for (int m = 1; m <= max_m; ++m) {
      Field2D bp = T.zeros(), bm = T.zeros(), ap = T.zeros(), am = T.zeros();
      for (int q = 0; q < m; ++q) {
        const double sg = q % 2 ? -1.0 : 1.0;
        bp = bp + T.Theta(+1, q, i) * P.p(q + 1, i) * T.alphabar(+1, m - 1 - q, i + q + 1);
        bm = bm + sg * (T.Theta(-1, q, i) * P.p(q + 1, i - q) * T.alphabar(-1, m - 1 - q, i - q - 1));
        ap = ap + T.Theta(+1, q, i) * P.pbar(q + 1, i) * T.alpha(+1, m - 1 - q, i + q + 1);
        am = am + sg * (T.Theta(-1, q, i) * P.pbar(q + 1, i - q) * T.alpha(-1, m - 1 - q, i - q - 1));
      }
      const std::string tag = "[m=" + std::to_string(m) + ",i=" + std::to_string(i) + "]";
      out.push_back({"alphabar+_x" + tag, T.alphabar_x(+1, m, i) - bp});
      out.push_back({"alphabar-_x" + tag, T.alphabar_x(-1, m, i) - bm});
      out.push_back({"alpha+_y" + tag, T.alpha_y(+1, m, i) - ap});
      out.push_back({"alpha-_y" + tag, T.alpha_y(-1, m, i) - am});
    }
  return out;
}

ResidualReport alpha_derivative_residual(const TauField& tau, const PFields& p, int max_m, double tol) {
  return summarize("alpha_derivatives[m<=" + std::to_string(max_m) + "]", alpha_derivative_fields(tau, p, max_m),
                   tau, tol);
}

ResidualFields utoda_k1_fields(const TauField& T, const PFields& P, int k) {
  if (P.m1 != 1 || P.m2 != k)
    throw ContractError("utoda_k1: expects depth 1 in x and depth " + std::to_string(k) + " in the time flow");
  ResidualFields all = utoda_fields(T, P), out;
  for (auto& f : all)
    if (f.name.rfind("p_y", 0) != 0) out.push_back(std::move(f));
  return out;
}

ResidualReport utoda_k1_residual(const TauField& tau, const PFields& p, int k, double tol) {
  return summarize("utoda_k1[k=" + std::to_string(k) + "]", utoda_k1_fields(tau, p, k), tau, tol);
}

namespace {

// phi^{+-2}_{j,i} from the binary pattern: s_i at (i+1, i), -s_i at (i, i+1)
double phi2(const std::vector<double>& s, int j, int i) {
  const int m = static_cast<int>(s.size());
  if (j == i + 1 && i >= 1 && i <= m) return s[i - 1];
  if (j == i - 1 && j >= 1 && j <= m) return -s[j - 1];
  return 0.0;
}

std::vector<double> binary_pattern(const GradedLagrangian& L) {
  std::vector<double> s;
  for (int i = 1; i + 1 <= L.n(); ++i) {
    const CoeffFn* c = L.find(2, i);
    double v = 0.0;
    if (c) {
      if (c->is_constant(0.0)) v = 0.0;
      else if (c->is_constant(1.0)) v = 1.0;
      else
        throw std::invalid_argument("gtoda: grade-2 " + side_name(L.side()) + " coefficient at site " +
                                    std::to_string(i) + " is not 0 or 1");
    }
    s.push_back(v);
  }
  return s;
}

}  // namespace

GTodaFields gtoda_fields(const CartanMatrix& K, const TauField& T, const GradedLagrangian& minus,
                         const GradedLagrangian& plus) {
  if (K.series != Series::A || K.rank != T.n)
    throw std::invalid_argument("gtoda: needs the A-series Cartan matrix of rank " + std::to_string(T.n));
  if (minus.depth() != 2 || plus.depth() != 2) throw ContractError("gtoda: needs depth-2 flows on both sides");
  const int n = T.n;
  const std::vector<double> s = binary_pattern(minus), sb = binary_pattern(plus);
  // theta_i from the Cartan product prod_j <j>^{-K_ij}
  std::vector<Field2D> th(n + 2, T.zeros());
  for (int i = 1; i <= n; ++i) {
    Field2D t = T.ones();
    for (int j = 1; j <= n; ++j) {
      const int e = -K(i, j);
      if (e == 0) continue;
      Field2D pw = T.tau(j).map([e](double v) { return std::pow(v, e); });
      t = t * pw;
    }
    th[i] = t;
  }
  auto nb = [&](int i) {
    std::vector<int> v;
    for (int j : {i - 1, i + 1})
      if (j >= 1 && j <= n) v.push_back(j);
    return v;
  };
  GTodaFields G;
  G.p1.resize(n);
  G.pbar1.resize(n);
  std::vector<Field2D> p1y(n), pb1x(n);
  for (int i = 1; i <= n; ++i) {
    Field2D p = coefficient_field(minus, 1, i, T.grid), pb = coefficient_field(plus, 1, i, T.grid);
    Field2D py = T.zeros(), pbx = T.zeros();
    for (int j : nb(i)) {
      const double cm = K(j, i) * phi2(s, j, i), cp = K(j, i) * phi2(sb, j, i);
      if (cm != 0.0) {
        p = p - cm * T.alpha(+1, 1, j);
        py = py - cm * T.alpha_y(+1, 1, j);
      }
      if (cp != 0.0) {
        pb = pb - cp * T.alphabar(+1, 1, j);
        pbx = pbx - cp * T.alphabar_x(+1, 1, j);
      }
    }
    G.p1[i - 1] = p;
    G.pbar1[i - 1] = pb;
    p1y[i - 1] = py;
    pb1x[i - 1] = pbx;
  }
  for (int i = 1; i <= n; ++i) {
    Field2D ry = T.zeros(), rx = T.zeros(), corr = T.zeros();
    for (int j : nb(i)) {
      const double cm = K(j, i) * phi2(s, j, i), cp = K(j, i) * phi2(sb, j, i);
      ry = ry - cm * (th[j] * G.pbar1[j - 1]);
      rx = rx - cp * (th[j] * G.p1[j - 1]);
      corr = corr + (K(j, i) * phi2(s, j, i) * phi2(sb, j, i)) * th[j];
    }
    const std::string tag = "[" + std::to_string(i) + "]";
    G.residuals.push_back({"p_y" + tag, p1y[i - 1] - ry});
    G.residuals.push_back({"pbar_x" + tag, pb1x[i - 1] - rx});
    G.residuals.push_back(
        {"mixed" + tag, T.ln_tau_xy(i) - (th[i] * G.p1[i - 1] * G.pbar1[i - 1] - th[i] * corr)});
  }
  return G;
}

ResidualReport gtoda_residual(const CartanMatrix& K, const TauField& tau, const GradedLagrangian& minus,
                              const GradedLagrangian& plus, double tol) {
  GTodaFields G = gtoda_fields(K, tau, minus, plus);
  ResidualReport r = summarize("gtoda[n=" + std::to_string(tau.n) + "]", G.residuals, tau, tol);
  nlohmann::json pat = {{"minus", binary_pattern(minus)}, {"plus", binary_pattern(plus)}};
  r.meta["pattern"] = pat;
  return r;
}

void write_field_csv(std::ostream& os, const Grid2D& g, const std::vector<std::pair<int, const Field2D*>>& sites) {
  os << "site,ix,iy,x,y,value\n";
  char buf[128];
  for (const auto& [site, f] : sites)
    for (int ix = 0; ix < g.Nx; ++ix)
      for (int iy = 0; iy < g.Ny; ++iy) {
        std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g,%.17g,%.17g\n", site, ix, iy, g.x(ix), g.y(iy), (*f)(ix, iy));
        os << buf;
      }
}

std::map<int, Field2D> read_field_csv(std::istream& is, Grid2D& g) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("site,ix,iy,x,y,value", 0) != 0)
    throw ConfigError("field CSV: missing header site,ix,iy,x,y,value");
  struct Row {
    int site, ix, iy;
    double x, y, v;
  };
  std::vector<Row> rows;
  int nx = 0, ny = 0;
  double xmin = 0, ymin = 0, x1 = 0, y1 = 0;
  bool hx = false, hy = false;
  long lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    Row r{};
    std::string vs;
    if (!(ss >> r.site >> r.ix >> r.iy >> r.x >> r.y >> vs))
      throw ConfigError("field CSV: malformed line " + std::to_string(lineno));
    r.v = vs == "nan" || vs == "-nan" ? kNaN : std::stod(vs);
    if (r.ix < 0 || r.iy < 0) throw ConfigError("field CSV: negative index on line " + std::to_string(lineno));
    nx = std::max(nx, r.ix + 1);
    ny = std::max(ny, r.iy + 1);
    if (r.ix == 0) xmin = r.x;
    if (r.iy == 0) ymin = r.y;
    if (r.ix == 1) { x1 = r.x; hx = true; }
    if (r.iy == 1) { y1 = r.y; hy = true; }
    rows.push_back(r);
  }
  g.Nx = nx;
  g.Ny = ny;
  g.x0 = xmin;
  g.y0 = ymin;
  g.hx = hx ? x1 - xmin : 1.0;
  g.hy = hy ? y1 - ymin : 1.0;
  std::map<int, Field2D> out;
  for (const auto& r : rows) {
    auto it = out.find(r.site);
    if (it == out.end()) it = out.emplace(r.site, Field2D(nx, ny, kNaN)).first;
    it->second(r.ix, r.iy) = r.v;
  }
  return out;
}

}  // namespace lietoda
