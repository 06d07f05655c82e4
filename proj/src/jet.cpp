#include "lietoda/jet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lietoda {

Jet::Jet(int py, int pt, double value) : py_(py), pt_(pt), c_(static_cast<size_t>(py + 1) * (pt + 1), 0.0) {
  if (py < 0 || pt < 0) throw std::invalid_argument("Jet: negative order");
  c_[0] = value;
}

double Jet::derivative(int a, int b) const {
  double f = 1.0;
  for (int k = 2; k <= a; ++k) f *= k;
  for (int k = 2; k <= b; ++k) f *= k;
  return coeff(a, b) * f;
}

Jet Jet::dy() const {
  if (py_ == 0) throw std::logic_error("Jet::dy: order exhausted");
  Jet r(py_ - 1, pt_);
  for (int a = 0; a < py_; ++a)
    for (int b = 0; b <= pt_; ++b) r.coeff(a, b) = (a + 1) * coeff(a + 1, b);
  return r;
}

Jet Jet::dt() const {
  if (pt_ == 0) throw std::logic_error("Jet::dt: order exhausted");
  Jet r(py_, pt_ - 1);
  for (int a = 0; a <= py_; ++a)
    for (int b = 0; b < pt_; ++b) r.coeff(a, b) = (b + 1) * coeff(a, b + 1);
  return r;
}

Jet Jet::truncated(int py, int pt) const {
  py = std::min(py, py_);
  pt = std::min(pt, pt_);
  Jet r(py, pt);
  for (int a = 0; a <= py; ++a)
    for (int b = 0; b <= pt; ++b) r.coeff(a, b) = coeff(a, b);
  return r;
}

namespace {

// bring both operands to the common (smaller) order
void align(Jet& a, Jet& b) {
  int py = std::min(a.py(), b.py()), pt = std::min(a.pt(), b.pt());
  if (a.py() != py || a.pt() != pt) a = a.truncated(py, pt);
  if (b.py() != py || b.pt() != pt) b = b.truncated(py, pt);
}

}  // namespace

Jet& Jet::operator+=(const Jet& o) {
  Jet b = o;
  align(*this, b);
  for (size_t k = 0; k < c_.size(); ++k) c_[k] += b.c_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  Jet b = o;
  align(*this, b);
  for (size_t k = 0; k < c_.size(); ++k) c_[k] -= b.c_[k];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (auto& x : c_) x *= s;
  return *this;
}

Jet operator-(const Jet& a) {
  Jet r = a;
  r *= -1.0;
  return r;
}

Jet operator+(Jet a, double s) {
  a.c_[0] += s;
  return a;
}

Jet operator*(const Jet& x, const Jet& y) {
  Jet a = x, b = y;
  align(a, b);
  Jet r(a.py(), a.pt());
  for (int a1 = 0; a1 <= a.py(); ++a1)
    for (int b1 = 0; b1 <= a.pt(); ++b1) {
      double u = a.coeff(a1, b1);
      if (u == 0.0) continue;
      for (int a2 = 0; a1 + a2 <= a.py(); ++a2)
        for (int b2 = 0; b1 + b2 <= a.pt(); ++b2) r.coeff(a1 + a2, b1 + b2) += u * b.coeff(a2, b2);
    }
  return r;
}

Jet operator/(const Jet& x, const Jet& y) {
  Jet a = x, b = y;
  align(a, b);
  const double b0 = b.coeff(0, 0);
  if (b0 == 0.0) throw std::domain_error("Jet: division by a jet with zero value");
  // q * b = a, solved in increasing (a, b) order
  Jet q(a.py(), a.pt());
  for (int i = 0; i <= a.py(); ++i)
    for (int j = 0; j <= a.pt(); ++j) {
      double s = a.coeff(i, j);
      for (int i2 = 0; i2 <= i; ++i2)
        for (int j2 = 0; j2 <= j; ++j2) {
          if (i2 == 0 && j2 == 0) continue;
          s -= b.coeff(i2, j2) * q.coeff(i - i2, j - j2);
        }
      q.coeff(i, j) = s / b0;
    }
  return q;
}

Jet exp_linear(double a, double b, double c, double y, double t, int py, int pt) {
  Jet r(py, pt);
  const double e = std::exp(a * y + b * t + c);
  double fa = 1.0;
  for (int i = 0; i <= py; ++i) {
    if (i > 0) fa *= a / i;
    double fb = 1.0;
    for (int j = 0; j <= pt; ++j) {
      if (j > 0) fb *= b / j;
      r.coeff(i, j) = e * fa * fb;
    }
  }
  return r;
}

std::vector<Jet> jet_leading_minors(std::vector<std::vector<Jet>> m) {
  const int n = static_cast<int>(m.size());
  std::vector<Jet> out;
  if (n == 0) return out;
  Jet det = m[0][0];
  out.push_back(det);
  for (int k = 0; k < n; ++k) {
    if (k > 0) {
      det = det * m[k][k];
      out.push_back(det);
    }
    if (k + 1 == n) break;
    if (m[k][k].value() == 0.0) throw std::domain_error("jet_leading_minors: vanishing leading minor");
    for (int r = k + 1; r < n; ++r) {
      Jet f = m[r][k] / m[k][k];
      for (int c = k; c < n; ++c) m[r][c] -= f * m[k][c];
    }
  }
  return out;
}

}  // namespace lietoda
