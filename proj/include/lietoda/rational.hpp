#pragma once
// Dense matrices over exact rationals.

#include <boost/multiprecision/cpp_int.hpp>
#include <Eigen/Dense>
#include <string>
#include <vector>

namespace lietoda {

using Rational = boost::multiprecision::cpp_rational;

class RMatrix {
 public:
  RMatrix() = default;
  RMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {}

  static RMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  Rational& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  const Rational& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  RMatrix operator+(const RMatrix& o) const;
  RMatrix operator-(const RMatrix& o) const;
  RMatrix operator*(const RMatrix& o) const;
  RMatrix operator*(const Rational& s) const;
  bool operator==(const RMatrix& o) const;

  bool is_zero() const;
  // largest |entry| as a double
  double max_abs() const;
  Eigen::MatrixXd to_double() const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<Rational> a_;
};

RMatrix commutator(const RMatrix& a, const RMatrix& b);
// "p/q" or "p"
std::string to_string(const Rational& r);
Rational parse_rational(const std::string& s);

}  // namespace lietoda
