#include "lietoda/rational.hpp"

#include <stdexcept>

namespace lietoda {

RMatrix RMatrix::identity(int n) {
  RMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

RMatrix RMatrix::operator+(const RMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("RMatrix: shape mismatch");
  RMatrix r(*this);
  for (size_t k = 0; k < a_.size(); ++k) r.a_[k] += o.a_[k];
  return r;
}

RMatrix RMatrix::operator-(const RMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("RMatrix: shape mismatch");
  RMatrix r(*this);
  for (size_t k = 0; k < a_.size(); ++k) r.a_[k] -= o.a_[k];
  return r;
}

RMatrix RMatrix::operator*(const RMatrix& o) const {
  if (cols_ != o.rows_) throw std::invalid_argument("RMatrix: shape mismatch");
  RMatrix r(rows_, o.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = 0; k < cols_; ++k) {
      const Rational& aik = (*this)(i, k);
      if (aik == 0) continue;
      for (int j = 0; j < o.cols_; ++j)
        if (o(k, j) != 0) r(i, j) += aik * o(k, j);
    }
  return r;
}

RMatrix RMatrix::operator*(const Rational& s) const {
  RMatrix r(*this);
  for (auto& x : r.a_) x *= s;
  return r;
}

bool RMatrix::operator==(const RMatrix& o) const {
  return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
}

bool RMatrix::is_zero() const {
  for (const auto& x : a_)
    if (x != 0) return false;
  return true;
}

double RMatrix::max_abs() const {
  Rational m = 0;
  for (const auto& x : a_) {
    Rational ax = x < 0 ? Rational(-x) : x;
    if (ax > m) m = ax;
  }
  return m.convert_to<double>();
}

Eigen::MatrixXd RMatrix::to_double() const {
  Eigen::MatrixXd m(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).convert_to<double>();
  return m;
}

RMatrix commutator(const RMatrix& a, const RMatrix& b) { return a * b - b * a; }

std::string to_string(const Rational& r) {
  auto num = boost::multiprecision::numerator(r);
  auto den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  using boost::multiprecision::cpp_int;
  if (slash == std::string::npos) return Rational(cpp_int(s));
  return Rational(cpp_int(s.substr(0, slash)), cpp_int(s.substr(slash + 1)));
}

}  // namespace lietoda
