#pragma once
// Cartan data, principal gradings and fundamental modules of A_n.

#include "lietoda/rational.hpp"

#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

namespace lietoda {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

enum class Series { A, B, C, D, G2 };

Series parse_series(const std::string& s);
std::string series_name(Series s);

struct CartanMatrix {
  Series series = Series::A;
  int rank = 0;
  std::vector<std::vector<int>> K;  // 0-based storage, K[i][j] = K_{i+1,j+1}

  // 1-based access; out of range sites give 0
  int operator()(int i, int j) const {
    if (i < 1 || j < 1 || i > rank || j > rank) return 0;
    return K[i - 1][j - 1];
  }
};

CartanMatrix cartan_matrix(Series series, int rank);
RMatrix cartan_inverse(const CartanMatrix& K);
RMatrix to_rmatrix(const CartanMatrix& K);

// The j-th fundamental module of A_n realized as the exterior power of the
// defining module. Basis: increasing index tuples in lexicographic order.
struct FundamentalRep {
  int n = 0;
  int j = 0;
  int dim = 0;
  std::vector<std::vector<int>> basis;  // 0-based defining indices, sorted
  std::vector<RMatrix> H, E, F;         // index 0 is h_1 / X+_1 / X-_1
  int hw_index = 0;

  const RMatrix& h(int i) const { return H.at(i - 1); }
  const RMatrix& e(int i) const { return E.at(i - 1); }
  const RMatrix& f(int i) const { return F.at(i - 1); }
  // action of the unit matrix e_{ab} (0-based) of gl(n+1) as a derivation
  RMatrix gl_unit(int a, int b) const;
};

FundamentalRep fundamental_rep(int n, int j);

// H = sum_i (K^{-1} c)_i h_i; c is a 0/1 column
RMatrix grading_operator(const FundamentalRep& rep, const std::vector<int>& c);
RMatrix principal_grading(const FundamentalRep& rep);

// Y_i^{+m} = [X+_{i+m-1},[...,[X+_{i+1},X+_i]]], sites i = 1..n-m+1; empty for m > n
std::vector<RMatrix> graded_generators(const FundamentalRep& rep, int m, int sign);

struct ChevalleyResidual {
  Rational max_abs = 0;   // exact
  std::string worst;      // relation name with the largest residual
  double value() const { return max_abs.convert_to<double>(); }
};

ChevalleyResidual verify_chevalley(const FundamentalRep& rep);

nlohmann::json rep_to_json(const FundamentalRep& rep);
FundamentalRep rep_from_json(const nlohmann::json& j);

}  // namespace lietoda
