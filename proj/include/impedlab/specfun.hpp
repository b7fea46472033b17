#ifndef IMPEDLAB_SPECFUN_HPP
#define IMPEDLAB_SPECFUN_HPP

#include <cmath>
#include <complex>
#include <limits>
#include <utility>
#include <numbers>

#include <Eigen/Dense>

#include "impedlab/error.hpp"

namespace impedlab {

using cplx = std::complex<double>;

/// Highest order handled by the spherical Bessel routines unless the caller
/// asks for more. Enough for kr <= 20.
inline constexpr int kDefaultMaxOrder = 60;

/// Legendre polynomial P_n(t) by the three-term recurrence.
template <typename Real>
Real legendre_p(int n, Real t) {
  require(n >= 0, ErrorCode::ArgumentOutOfRange, "legendre_p: negative degree");
  require(std::abs(t) <= Real(1), ErrorCode::ArgumentOutOfRange, "legendre_p: |t| > 1");
  if (n == 0) return Real(1);
  Real prev = Real(1), cur = t;
  for (int l = 1; l < n; ++l) {
    const Real next = (Real(2 * l + 1) * t * cur - Real(l) * prev) / Real(l + 1);
    prev = cur;
    cur = next;
  }
  return cur;
}

/// P_0(t), ..., P_nmax(t).
template <typename Real>
Eigen::Matrix<Real, Eigen::Dynamic, 1> legendre_table(int nmax, Real t) {
  require(nmax >= 0 && std::abs(t) <= Real(1), ErrorCode::ArgumentOutOfRange, "legendre_table");
  Eigen::Matrix<Real, Eigen::Dynamic, 1> p(nmax + 1);
  p(0) = Real(1);
  if (nmax >= 1) p(1) = t;
  for (int l = 1; l < nmax; ++l)
    p(l + 1) = (Real(2 * l + 1) * t * p(l) - Real(l) * p(l - 1)) / Real(l + 1);
  return p;
}

/// Gauss-Legendre rule on [-1, 1].
template <typename Real>
struct GaussRule {
  Eigen::Matrix<Real, Eigen::Dynamic, 1> nodes;
  Eigen::Matrix<Real, Eigen::Dynamic, 1> weights;
};

template <typename Real>
GaussRule<Real> gauss_legendre(int n) {
  require(n >= 1, ErrorCode::ArgumentOutOfRange, "gauss_legendre: n < 1");
  GaussRule<Real> rule{Eigen::Matrix<Real, Eigen::Dynamic, 1>(n), Eigen::Matrix<Real, Eigen::Dynamic, 1>(n)};
  const Real pi = std::numbers::pi_v<Real>;
  // P_n(x) and P_n'(x)
  auto legendre_and_slope = [n](Real x) {
    Real p0 = 1, p1 = x;
    for (int l = 1; l < n; ++l) {
      const Real p2 = (Real(2 * l + 1) * x * p1 - Real(l) * p0) / Real(l + 1);
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1;
    return std::pair<Real, Real>{p1, Real(n) * (x * p1 - p0) / (x * x - Real(1))};
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Real x = std::cos(pi * (Real(i) + Real(0.75)) / (Real(n) + Real(0.5)));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre_and_slope(x);
      const Real dx = p / dp;
      x -= dx;
      if (std::abs(dx) < std::numeric_limits<Real>::epsilon() * Real(4)) break;
    }
    const Real dp = legendre_and_slope(x).second;
    const Real w = Real(2) / ((Real(1) - x * x) * dp * dp);
    rule.nodes(i) = -x;
    rule.nodes(n - 1 - i) = x;
    rule.weights(i) = w;
    rule.weights(n - 1 - i) = w;
  }
  if (n % 2 == 1) rule.nodes(n / 2) = Real(0);
  return rule;
}

/// Spherical Bessel j_n, y_n and derivatives for n = 0..nmax at one argument.
struct SphericalBesselTable {
  double x = 0;
  Eigen::VectorXd j, dj, y, dy;

  int max_order() const { return static_cast<int>(j.size()) - 1; }
  cplx h(int n) const { return {j(n), y(n)}; }
  cplx dh(int n) const { return {dj(n), dy(n)}; }
};

/// j_n by downward (Miller) recurrence normalised with sum (2n+1) j_n^2 = 1
/// (upward when x exceeds every requested order), y_n by upward recurrence. Throws ArgumentOutOfRange for x <= 0, nmax above
/// the order cap, or overflow of y_n.
SphericalBesselTable spherical_bessel_table(int nmax, double x, int order_cap = kDefaultMaxOrder);

/// j_n, j_n', h_n, h_n' for a single order (h of the first kind).
struct RadialBundle {
  int n = 0;
  double x = 0;
  cplx j, dj, h, dh;
};

RadialBundle radial_bundle(int n, double x, int order_cap = kDefaultMaxOrder);

/// Orthonormal associated Legendre functions Q_n^m(cos theta) (Condon-Shortley
/// phase included) and their theta-derivatives, 0 <= m <= n <= nmax.
/// Y_n^m(theta, phi) = Q_n^m(cos theta) e^{i m phi}.
struct AssociatedLegendre {
  Eigen::MatrixXd value;   // (n, m)
  Eigen::MatrixXd dtheta;  // (n, m)
};

AssociatedLegendre associated_legendre(int nmax, double theta);

/// Complex orthonormal spherical harmonic Y_n^m.
cplx sph_harm(int n, int m, double theta, double phi);

/// Real orthonormal spherical harmonics: sqrt(2) Q cos(m phi) for m > 0,
/// Q_n^0 for m = 0, sqrt(2) Q sin(|m| phi) for m < 0. Returns value and the
/// two parameter derivatives.
struct RealHarmonic {
  double value = 0, dtheta = 0, dphi = 0;
};

RealHarmonic real_sph_harm(int n, int m, double theta, double phi);

/// Index of (n, m) in a flat coefficient vector ordered by n then m = -n..n.
inline constexpr int sh_index(int n, int m) { return n * n + n + m; }
inline constexpr int sh_count(int nmax) { return (nmax + 1) * (nmax + 1); }

/// All Y_n^m(theta, phi), n <= nmax, flat in sh_index order.
Eigen::VectorXcd sph_harm_all(int nmax, double theta, double phi);

/// Helmholtz fundamental solution e^{ik|x-y|} / (4 pi |x-y|).
cplx helmholtz_kernel(double k, const Eigen::Vector3d& x, const Eigen::Vector3d& y);

/// grad_y of the fundamental solution dotted with normal_y.
cplx helmholtz_kernel_dny(double k, const Eigen::Vector3d& x, const Eigen::Vector3d& y,
                          const Eigen::Vector3d& normal_y);

/// grad_x of the fundamental solution dotted with normal_x.
cplx helmholtz_kernel_dnx(double k, const Eigen::Vector3d& x, const Eigen::Vector3d& y,
                          const Eigen::Vector3d& normal_x);

/// Partial sum of e^{ikr cos theta} = sum (2n+1) i^n j_n(kr) P_n(cos theta).
struct PlaneWaveSum {
  cplx value;
  int terms = 0;
  /// Sum of |(2n+1) j_n(kr)| over the next ten orders past the truncation.
  double tail_bound = 0;
};

PlaneWaveSum plane_wave_expansion(double k, double r, double cos_theta, int nmax,
                                  int order_cap = kDefaultMaxOrder);

/// i^n
inline cplx ipow(int n) {
  switch (((n % 4) + 4) % 4) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
  }
}

}  // namespace impedlab

#endif
