#include "impedlab/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace impedlab {

namespace {

constexpr double kPi = std::numbers::pi;

// Downward recurrence needs to start well past both the requested order and
// the argument, otherwise the dominant-solution contamination is visible.
int miller_start(int nmax, double x, int order_cap) {
  const double base = std::max<double>(nmax, std::ceil(x));
  const int heuristic = static_cast<int>(base + 15.0 + std::sqrt(40.0 * std::max(base, 1.0)));
  return std::max(order_cap + 15, heuristic);
}

}  // namespace

SphericalBesselTable spherical_bessel_table(int nmax, double x, int order_cap) {
  require(x > 0 && std::isfinite(x), ErrorCode::ArgumentOutOfRange, "spherical Bessel: x must be > 0");
  require(nmax >= 0 && nmax <= order_cap, ErrorCode::ArgumentOutOfRange,
          "spherical Bessel: order " + std::to_string(nmax) + " above cap " + std::to_string(order_cap));

  const int top = nmax + 1;  // one extra order for the derivatives
  Eigen::VectorXd j(top + 1);
  if (x > top + 1.0) {
    // upward recurrence for j is stable while n < x
    j(0) = std::sin(x) / x;
    j(1) = std::sin(x) / (x * x) - std::cos(x) / x;
    for (int n = 1; n < top; ++n) j(n + 1) = (2.0 * n + 1.0) / x * j(n) - j(n - 1);
  } else {
    const int start = miller_start(top, x, order_cap);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(start + 2);
    f(start) = 1.0;
    for (int n = start; n >= 1; --n) {
      f(n - 1) = (2.0 * n + 1.0) / x * f(n) - f(n + 1);
      if (std::abs(f(n - 1)) > 1e100) f.segment(n - 1, start + 3 - n) *= 1e-100;
    }
    double norm = 0;
    for (int n = start; n >= 0; --n) norm += (2.0 * n + 1.0) * f(n) * f(n);
    double scale = 1.0 / std::sqrt(norm);
    const double j0 = std::sin(x) / x;
    const double j1 = std::sin(x) / (x * x) - std::cos(x) / x;
    if (f(0) * j0 + f(1) * j1 < 0) scale = -scale;
    j = f.head(top + 1) * scale;
  }

  SphericalBesselTable t;
  t.x = x;
  t.j.resize(nmax + 1);
  t.y.resize(nmax + 1);
  t.dj.resize(nmax + 1);
  t.dy.resize(nmax + 1);

  Eigen::VectorXd y(top + 1);
  y(0) = -std::cos(x) / x;
  if (top >= 1) y(1) = -std::cos(x) / (x * x) - std::sin(x) / x;
  for (int n = 1; n < top; ++n) y(n + 1) = (2.0 * n + 1.0) / x * y(n) - y(n - 1);
  require(y.allFinite(), ErrorCode::ArgumentOutOfRange, "spherical Bessel: y_n overflow");

  for (int n = 0; n <= nmax; ++n) {
    t.j(n) = j(n);
    t.y(n) = y(n);
    if (n == 0) {
      t.dj(0) = -j(1);
      t.dy(0) = -y(1);
    } else {
      t.dj(n) = j(n - 1) - (n + 1.0) / x * j(n);
      t.dy(n) = y(n - 1) - (n + 1.0) / x * y(n);
    }
  }
  return t;
}

RadialBundle radial_bundle(int n, double x, int order_cap) {
  const auto t = spherical_bessel_table(n, x, order_cap);
  return {n, x, cplx(t.j(n)), cplx(t.dj(n)), t.h(n), t.dh(n)};
}

AssociatedLegendre associated_legendre(int nmax, double theta) {
  require(nmax >= 0, ErrorCode::ArgumentOutOfRange, "associated_legendre: negative degree");
  const double x = std::cos(theta);
  const double s = std::sin(theta);
  AssociatedLegendre out{Eigen::MatrixXd::Zero(nmax + 2, nmax + 2), Eigen::MatrixXd::Zero(nmax + 1, nmax + 1)};
  auto& q = out.value;
  q(0, 0) = 1.0 / std::sqrt(4.0 * kPi);
  for (int m = 1; m <= nmax; ++m) q(m, m) = -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * q(m - 1, m - 1);
  for (int m = 0; m < nmax; ++m) q(m + 1, m) = std::sqrt(2.0 * m + 3.0) * x * q(m, m);
  for (int m = 0; m <= nmax; ++m) {
    for (int n = m + 2; n <= nmax; ++n) {
      const double a = std::sqrt((4.0 * n * n - 1.0) / (double(n) * n - double(m) * m));
      const double b = std::sqrt(((n - 1.0) * (n - 1.0) - double(m) * m) / (4.0 * (n - 1.0) * (n - 1.0) - 1.0));
      q(n, m) = a * (x * q(n - 1, m) - b * q(n - 2, m));
    }
  }
  for (int n = 0; n <= nmax; ++n) {
    out.dtheta(n, 0) = n >= 1 ? std::sqrt(double(n) * (n + 1.0)) * q(n, 1) : 0.0;
    for (int m = 1; m <= n; ++m) {
      const double up = m + 1 <= n ? std::sqrt((n + m + 1.0) * (n - m)) * q(n, m + 1) : 0.0;
      const double down = std::sqrt((n + m) * (n - m + 1.0)) * q(n, m - 1);
      out.dtheta(n, m) = 0.5 * (up - down);
    }
  }
  q.conservativeResize(nmax + 1, nmax + 1);
  return out;
}

cplx sph_harm(int n, int m, double theta, double phi) {
  require(n >= 0 && std::abs(m) <= n, ErrorCode::ArgumentOutOfRange, "sph_harm: need |m| <= n");
  const auto p = associated_legendre(n, theta);
  const int am = std::abs(m);
  const cplx y = p.value(n, am) * std::polar(1.0, am * phi);
  if (m >= 0) return y;
  return (am % 2 == 0 ? 1.0 : -1.0) * std::conj(y);
}

Eigen::VectorXcd sph_harm_all(int nmax, double theta, double phi) {
  const auto p = associated_legendre(nmax, theta);
  Eigen::VectorXcd out(sh_count(nmax));
  for (int n = 0; n <= nmax; ++n) {
    out(sh_index(n, 0)) = p.value(n, 0);
    for (int m = 1; m <= n; ++m) {
      const cplx y = p.value(n, m) * std::polar(1.0, m * phi);
      out(sh_index(n, m)) = y;
      out(sh_index(n, -m)) = (m % 2 == 0 ? 1.0 : -1.0) * std::conj(y);
    }
  }
  return out;
}

RealHarmonic real_sph_harm(int n, int m, double theta, double phi) {
  require(n >= 0 && std::abs(m) <= n, ErrorCode::ArgumentOutOfRange, "real_sph_harm: need |m| <= n");
  const auto p = associated_legendre(n, theta);
  const int am = std::abs(m);
  const double q = p.value(n, am), dq = p.dtheta(n, am);
  if (m == 0) return {q, dq, 0.0};
  const double c = std::cos(am * phi), s = std::sin(am * phi);
  const double r2 = std::numbers::sqrt2;
  if (m > 0) return {r2 * q * c, r2 * dq * c, -r2 * am * q * s};
  return {r2 * q * s, r2 * dq * s, r2 * am * q * c};
}

cplx helmholtz_kernel(double k, const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
  const double r = (x - y).norm();
  require(r > 0, ErrorCode::CoincidentPoints, "helmholtz_kernel: x == y");
  return std::polar(1.0, k * r) / (4.0 * kPi * r);
}

cplx helmholtz_kernel_dnx(double k, const Eigen::Vector3d& x, const Eigen::Vector3d& y,
                          const Eigen::Vector3d& normal_x) {
  const Eigen::Vector3d d = x - y;
  const double r = d.norm();
  require(r > 0, ErrorCode::CoincidentPoints, "helmholtz_kernel_dnx: x == y");
  return cplx(-1.0, k * r) * std::polar(1.0, k * r) / (4.0 * kPi * r * r * r) * d.dot(normal_x);
}

cplx helmholtz_kernel_dny(double k, const Eigen::Vector3d& x, const Eigen::Vector3d& y,
                          const Eigen::Vector3d& normal_y) {
  const Eigen::Vector3d d = x - y;
  const double r = d.norm();
  require(r > 0, ErrorCode::CoincidentPoints, "helmholtz_kernel_dny: x == y");
  return -cplx(-1.0, k * r) * std::polar(1.0, k * r) / (4.0 * kPi * r * r * r) * d.dot(normal_y);
}

PlaneWaveSum plane_wave_expansion(double k, double r, double cos_theta, int nmax, int order_cap) {
  require(nmax >= 0 && nmax <= order_cap, ErrorCode::ArgumentOutOfRange, "plane_wave_expansion: order");
  PlaneWaveSum out;
  out.terms = nmax + 1;
  const double kr = k * r;
  if (kr == 0.0) {
    out.value = 1.0;
    return out;
  }
  const int tail = 10;
  const auto bessel = spherical_bessel_table(nmax + tail, kr, order_cap + tail);
  const auto p = legendre_table(nmax, std::clamp(cos_theta, -1.0, 1.0));
  cplx sum = 0;
  for (int n = 0; n <= nmax; ++n) sum += (2.0 * n + 1.0) * ipow(n) * bessel.j(n) * p(n);
  for (int n = nmax + 1; n <= nmax + tail; ++n) out.tail_bound += (2.0 * n + 1.0) * std::abs(bessel.j(n));
  out.value = sum;
  return out;
}

}  // namespace impedlab
