#include "bbcrop/reduced.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace bbcrop {

namespace {
constexpr double kPi = std::numbers::pi;
}

Vec6 ReducedModel::deriv(const Vec6& s, double A, double psi) const {
  const Vec3 n(std::cos(psi), std::sin(psi), 0.0);
  const double w = 2 * kPi * A;
  Vec3 d1 = w * n.cross(head(s));
  Vec3 d2 = w * n.cross(tail(s));
  const double x1 = s[0], y1 = s[1], x2 = s[3], y2 = s[4];
  const double wo = 2 * kPi * offset;
  d1[0] += -kPi * J * y2 - kPi * kc * x2 - kPi * ka * x1 - wo * y1;
  d1[1] += kPi * J * x2 - kPi * kc * y2 - kPi * ka * y1 + wo * x1;
  d2[0] += -kPi * J * y1 - kPi * kc * x1 - kPi * ka * x2 - wo * y2;
  d2[1] += kPi * J * x1 - kPi * kc * y1 - kPi * ka * y2 + wo * x2;
  Vec6 out;
  out << d1, d2;
  return out;
}

Vec6 ReducedModel::free_evolve(const Vec6& s, double t) const {
  using cd = std::complex<double>;
  const cd l1(s[0], s[1]);
  const cd l2(s[3], s[4]);
  const cd a(-kPi * ka, 2 * kPi * offset);
  const cd b(-kPi * kc, kPi * J);
  const cd sum = (l1 + l2) * std::exp((a + b) * t);
  const cd dif = (l1 - l2) * std::exp((a - b) * t);
  const cd n1 = 0.5 * (sum + dif);
  const cd n2 = 0.5 * (sum - dif);
  Vec6 out;
  out << n1.real(), n1.imag(), s[2], n2.real(), n2.imag(), s[5];
  return out;
}

Vec3 rotate(const Vec3& v, const Vec3& axis, double angle) {
  const Vec3 k = axis.normalized();
  const double c = std::cos(angle), sn = std::sin(angle);
  return v * c + k.cross(v) * sn + k * k.dot(v) * (1 - c);
}

Vec6 rotate_pair(const Vec6& s, const Vec3& axis, double angle) {
  Vec6 out;
  out << rotate(head(s), axis, angle), rotate(tail(s), axis, angle);
  return out;
}

}  // namespace bbcrop
