#pragma once
// Truncated bivariate Taylor series in (y, t) about a point. Coefficient
// (a, b) multiplies dy^a dt^b; orders are truncated independently, which is
// closed under multiplication. Used where residuals must reach round-off.

#include <vector>

namespace lietoda {

class Jet {
 public:
  Jet() = default;
  Jet(int py, int pt, double value = 0.0);

  int py() const { return py_; }
  int pt() const { return pt_; }
  double value() const { return c_.empty() ? 0.0 : c_[0]; }
  double coeff(int a, int b) const { return a <= py_ && b <= pt_ ? c_[idx(a, b)] : 0.0; }
  double& coeff(int a, int b) { return c_[idx(a, b)]; }
  // d^a/dy^a d^b/dt^b at the expansion point
  double derivative(int a, int b) const;

  Jet dy() const;
  Jet dt() const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(double s);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(const Jet& a);
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator+(Jet a, double s);
  friend Jet operator-(Jet a, double s) { return a + (-s); }

  Jet truncated(int py, int pt) const;

 private:
  int idx(int a, int b) const { return a * (pt_ + 1) + b; }
  int py_ = 0, pt_ = 0;
  std::vector<double> c_ = std::vector<double>(1, 0.0);
};

// exp(a y + b t + c) expanded at (y, t)
Jet exp_linear(double a, double b, double c, double y, double t, int py, int pt);

// leading minors of a square matrix of jets (Gaussian elimination without
// pivoting; callers guarantee non-vanishing leading minors)
std::vector<Jet> jet_leading_minors(std::vector<std::vector<Jet>> m);

}  // namespace lietoda
