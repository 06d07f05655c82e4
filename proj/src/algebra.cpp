#include "lietoda/algebra.hpp"

#include <algorithm>

namespace lietoda {

Series parse_series(const std::string& s) {
  if (s == "A") return Series::A;
  if (s == "B") return Series::B;
  if (s == "C") return Series::C;
  if (s == "D") return Series::D;
  if (s == "G2" || s == "G") return Series::G2;
  throw ConfigError("unknown series '" + s + "'");
}

std::string series_name(Series s) {
  switch (s) {
    case Series::A: return "A";
    case Series::B: return "B";
    case Series::C: return "C";
    case Series::D: return "D";
    case Series::G2: return "G2";
  }
  return "?";
}

CartanMatrix cartan_matrix(Series series, int rank) {
  int minimum = 1;
  switch (series) {
    case Series::A: minimum = 1; break;
    case Series::B:
    case Series::C: minimum = 2; break;
    case Series::D: minimum = 3; break;
    case Series::G2: minimum = 2; break;
  }
  if (rank < minimum || (series == Series::G2 && rank != 2))
    throw ConfigError("rank " + std::to_string(rank) + " is not valid for series " + series_name(series));

  CartanMatrix c;
  c.series = series;
  c.rank = rank;
  c.K.assign(rank, std::vector<int>(rank, 0));
  auto& K = c.K;
  for (int i = 0; i < rank; ++i) K[i][i] = 2;
  // chain part shared by A, B, C and the first r-1 nodes of D
  int chain = series == Series::D ? rank - 1 : rank;
  for (int i = 0; i + 1 < chain; ++i) K[i][i + 1] = K[i + 1][i] = -1;
  // K_ij = 2(a_i,a_j)/(a_i,a_i)
  switch (series) {
    case Series::A: break;
    case Series::B: K[rank - 1][rank - 2] = -2; break;
    case Series::C: K[rank - 2][rank - 1] = -2; break;
    case Series::D:
      K[rank - 1][rank - 3] = K[rank - 3][rank - 1] = -1;
      if (rank == 3) K[rank - 1][rank - 2] = K[rank - 2][rank - 1] = 0;
      break;
    case Series::G2:
      K[0][1] = -3;
      K[1][0] = -1;
      break;
  }
  return c;
}

RMatrix to_rmatrix(const CartanMatrix& K) {
  RMatrix m(K.rank, K.rank);
  for (int i = 0; i < K.rank; ++i)
    for (int j = 0; j < K.rank; ++j) m(i, j) = K.K[i][j];
  return m;
}

RMatrix cartan_inverse(const CartanMatrix& K) {
  const int r = K.rank;
  RMatrix a = to_rmatrix(K);
  RMatrix inv = RMatrix::identity(r);
  for (int col = 0; col < r; ++col) {
    int piv = col;
    while (piv < r && a(piv, col) == 0) ++piv;
    if (piv == r) throw ContractError("singular Cartan matrix");
    if (piv != col)
      for (int k = 0; k < r; ++k) {
        std::swap(a(piv, k), a(col, k));
        std::swap(inv(piv, k), inv(col, k));
      }
    Rational d = a(col, col);
    for (int k = 0; k < r; ++k) {
      a(col, k) /= d;
      inv(col, k) /= d;
    }
    for (int row = 0; row < r; ++row) {
      if (row == col || a(row, col) == 0) continue;
      Rational f = a(row, col);
      for (int k = 0; k < r; ++k) {
        a(row, k) -= f * a(col, k);
        inv(row, k) -= f * inv(col, k);
      }
    }
  }
  return inv;
}

namespace {

void subsets(int n, int k, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (int i = start; i < n; ++i) {
    cur.push_back(i);
    subsets(n, k, i + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

RMatrix FundamentalRep::gl_unit(int a, int b) const {
  RMatrix m(dim, dim);
  for (int col = 0; col < dim; ++col) {
    const auto& s = basis[col];
    auto pb = std::find(s.begin(), s.end(), b);
    if (pb == s.end()) continue;
    if (a == b) {
      m(col, col) = 1;
      continue;
    }
    if (std::find(s.begin(), s.end(), a) != s.end()) continue;
    // replace b by a in place, then sort; sign from the transpositions needed
    std::vector<int> t = s;
    t[pb - s.begin()] = a;
    int sign = 1;
    for (int x : s)
      if (x != b && ((x > std::min(a, b)) && (x < std::max(a, b)))) sign = -sign;
    std::sort(t.begin(), t.end());
    int row = static_cast<int>(std::lower_bound(basis.begin(), basis.end(), t) - basis.begin());
    m(row, col) = sign;
  }
  return m;
}

FundamentalRep fundamental_rep(int n, int j) {
  if (n < 1) throw std::invalid_argument("fundamental_rep: n must be positive");
  if (j < 1 || j > n) throw std::invalid_argument("fundamental_rep: j out of range 1.." + std::to_string(n));
  FundamentalRep r;
  r.n = n;
  r.j = j;
  std::vector<int> cur;
  subsets(n + 1, j, 0, cur, r.basis);
  r.dim = static_cast<int>(r.basis.size());
  std::vector<int> top(j);
  for (int k = 0; k < j; ++k) top[k] = k;
  r.hw_index = static_cast<int>(std::find(r.basis.begin(), r.basis.end(), top) - r.basis.begin());
  for (int i = 0; i < n; ++i) {
    r.E.push_back(r.gl_unit(i, i + 1));
    r.F.push_back(r.gl_unit(i + 1, i));
    r.H.push_back(r.gl_unit(i, i) - r.gl_unit(i + 1, i + 1));
  }
  return r;
}

RMatrix grading_operator(const FundamentalRep& rep, const std::vector<int>& c) {
  if (static_cast<int>(c.size()) != rep.n)
    throw std::invalid_argument("grading_operator: column length must equal the rank");
  RMatrix kinv = cartan_inverse(cartan_matrix(Series::A, rep.n));
  RMatrix H(rep.dim, rep.dim);
  for (int i = 0; i < rep.n; ++i) {
    Rational w = 0;
    for (int k = 0; k < rep.n; ++k) w += kinv(i, k) * c[k];
    if (w != 0) H = H + rep.H[i] * w;
  }
  return H;
}

RMatrix principal_grading(const FundamentalRep& rep) {
  return grading_operator(rep, std::vector<int>(rep.n, 1));
}

std::vector<RMatrix> graded_generators(const FundamentalRep& rep, int m, int sign) {
  std::vector<RMatrix> out;
  if (m < 1 || m > rep.n) return out;
  const auto& X = sign > 0 ? rep.E : rep.F;
  for (int i = 1; i + m - 1 <= rep.n; ++i) {
    RMatrix y = X[i - 1];
    for (int l = i + 1; l <= i + m - 1; ++l) y = commutator(X[l - 1], y);
    out.push_back(std::move(y));
  }
  return out;
}

ChevalleyResidual verify_chevalley(const FundamentalRep& rep) {
  ChevalleyResidual res;
  auto track = [&](const RMatrix& m, const std::string& name) {
    for (int a = 0; a < m.rows(); ++a)
      for (int b = 0; b < m.cols(); ++b) {
        Rational v = m(a, b) < 0 ? Rational(-m(a, b)) : m(a, b);
        if (v > res.max_abs) {
          res.max_abs = v;
          res.worst = name;
        }
      }
  };
  const int n = rep.n;
  CartanMatrix K = cartan_matrix(Series::A, n);
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) {
      std::string ij = std::to_string(i) + "," + std::to_string(j);
      track(commutator(rep.h(i), rep.h(j)), "[h,h](" + ij + ")");
      track(commutator(rep.h(i), rep.e(j)) - rep.e(j) * Rational(K(i, j)), "[h,X+](" + ij + ")");
      track(commutator(rep.h(i), rep.f(j)) + rep.f(j) * Rational(K(i, j)), "[h,X-](" + ij + ")");
      RMatrix rhs = i == j ? rep.h(j) : RMatrix(rep.dim, rep.dim);
      track(commutator(rep.e(i), rep.f(j)) - rhs, "[X+,X-](" + ij + ")");
    }
  // highest vector: X+_i|j> = 0, h_i|j> = delta_ij |j>, <j|j> = 1
  RMatrix v(rep.dim, 1);
  v(rep.hw_index, 0) = 1;
  for (int i = 1; i <= n; ++i) {
    track(rep.e(i) * v, "X+|hw>(" + std::to_string(i) + ")");
    track(rep.h(i) * v - v * Rational(i == rep.j ? 1 : 0), "h|hw>(" + std::to_string(i) + ")");
  }
  return res;
}

namespace {

nlohmann::json mat_json(const RMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int a = 0; a < m.rows(); ++a) {
    nlohmann::json row = nlohmann::json::array();
    for (int b = 0; b < m.cols(); ++b) row.push_back(to_string(m(a, b)));
    rows.push_back(row);
  }
  return rows;
}

RMatrix mat_from_json(const nlohmann::json& j) {
  int r = static_cast<int>(j.size());
  int c = r ? static_cast<int>(j[0].size()) : 0;
  RMatrix m(r, c);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < c; ++b) m(a, b) = parse_rational(j[a][b].get<std::string>());
  return m;
}

}  // namespace

nlohmann::json rep_to_json(const FundamentalRep& rep) {
  nlohmann::json j;
  j["series"] = "A";
  j["n"] = rep.n;
  j["j"] = rep.j;
  j["dim"] = rep.dim;
  j["hw_index"] = rep.hw_index;
  j["basis"] = rep.basis;
  nlohmann::json m;
  for (int i = 0; i < rep.n; ++i) {
    std::string s = std::to_string(i + 1);
    m["h" + s] = mat_json(rep.H[i]);
    m["E" + s] = mat_json(rep.E[i]);
    m["F" + s] = mat_json(rep.F[i]);
  }
  j["matrices"] = m;
  return j;
}

FundamentalRep rep_from_json(const nlohmann::json& j) {
  if (j.value("series", "A") != "A") throw ConfigError("only series A representations can be loaded");
  FundamentalRep rep;
  rep.n = j.at("n").get<int>();
  rep.j = j.at("j").get<int>();
  rep.dim = j.at("dim").get<int>();
  rep.hw_index = j.at("hw_index").get<int>();
  rep.basis = j.at("basis").get<std::vector<std::vector<int>>>();
  const auto& m = j.at("matrices");
  for (int i = 0; i < rep.n; ++i) {
    std::string s = std::to_string(i + 1);
    rep.H.push_back(mat_from_json(m.at("h" + s)));
    rep.E.push_back(mat_from_json(m.at("E" + s)));
    rep.F.push_back(mat_from_json(m.at("F" + s)));
  }
  return rep;
}

}  // namespace lietoda
