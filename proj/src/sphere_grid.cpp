#include <cmath>
#include <numbers>

#include "impedlab/scatter.hpp"

namespace impedlab {

namespace {
constexpr double kPi = std::numbers::pi;
}

WaveConfig WaveConfig::make(double k, const Eigen::Vector3d& direction) {
  require(k > 0 && std::isfinite(k), ErrorCode::ArgumentOutOfRange, "wavenumber must be positive");
  require(direction.norm() > 0, ErrorCode::ArgumentOutOfRange, "incident direction must be non-zero");
  return {k, direction.normalized()};
}

SphereGrid::SphereGrid(int n_theta, int n_phi) : n_theta_(n_theta), n_phi_(n_phi) {
  require(n_theta >= 2 && n_phi >= 3, ErrorCode::ResolutionTooCoarse, "sphere grid too coarse");
  const auto rule = gauss_legendre<double>(n_theta);
  theta_.resize(n_theta);
  theta_weights_.resize(n_theta);
  for (int a = 0; a < n_theta; ++a) {
    // theta ascending: cos(theta) descending
    theta_(a) = std::acos(rule.nodes(n_theta - 1 - a));
    theta_weights_(a) = rule.weights(n_theta - 1 - a);
  }
  phi_ = Eigen::VectorXd::LinSpaced(n_phi, 0.0, 2.0 * kPi * (n_phi - 1) / n_phi);
  directions_.resize(3, static_cast<Eigen::Index>(n_theta) * n_phi);
  weights_.resize(static_cast<Eigen::Index>(n_theta) * n_phi);
  for (int a = 0; a < n_theta; ++a)
    for (int b = 0; b < n_phi; ++b) {
      const Eigen::Index i = static_cast<Eigen::Index>(a) * n_phi + b;
      directions_.col(i) = direction(theta_(a), phi_(b));
      weights_(i) = theta_weights_(a) * 2.0 * kPi / n_phi;
    }
}

Eigen::VectorXcd sh_analysis(const SphereGrid& grid, const Eigen::VectorXcd& values, int nmax) {
  require(values.size() == grid.size(), ErrorCode::GridMismatch, "sample count does not match the grid");
  require(nmax >= 0, ErrorCode::ArgumentOutOfRange, "negative degree");
  const int nt = grid.n_theta(), np = grid.n_phi();
  Eigen::VectorXcd coeffs = Eigen::VectorXcd::Zero(sh_count(nmax));
  Eigen::MatrixXcd ring(2 * nmax + 1, 1);
  for (int a = 0; a < nt; ++a) {
    // azimuthal sums F(m) = sum_b v(a, b) e^{-i m phi_b} (2 pi / n_phi)
    for (int m = -nmax; m <= nmax; ++m) {
      cplx acc = 0;
      for (int b = 0; b < np; ++b) acc += values(static_cast<Eigen::Index>(a) * np + b) * std::polar(1.0, -m * grid.phi()(b));
      ring(m + nmax) = acc * (2.0 * kPi / np);
    }
    const auto q = associated_legendre(nmax, grid.theta()(a));
    const double w = grid.theta_weights()(a);
    for (int n = 0; n <= nmax; ++n)
      for (int m = -n; m <= n; ++m) {
        const int am = std::abs(m);
        const double sign = (m < 0 && am % 2 == 1) ? -1.0 : 1.0;
        coeffs(sh_index(n, m)) += w * sign * q.value(n, am) * ring(m + nmax);
      }
  }
  return coeffs;
}

Eigen::VectorXcd sh_synthesis(const SphereGrid& grid, const Eigen::VectorXcd& coeffs, int nmax) {
  require(coeffs.size() >= sh_count(nmax), ErrorCode::ArgumentOutOfRange, "coefficient vector too short");
  const int nt = grid.n_theta(), np = grid.n_phi();
  Eigen::VectorXcd values(grid.size());
  Eigen::VectorXcd per_m(2 * nmax + 1);
  for (int a = 0; a < nt; ++a) {
    const auto q = associated_legendre(nmax, grid.theta()(a));
    per_m.setZero();
    for (int n = 0; n <= nmax; ++n)
      for (int m = -n; m <= n; ++m) {
        const int am = std::abs(m);
        const double sign = (m < 0 && am % 2 == 1) ? -1.0 : 1.0;
        per_m(m + nmax) += coeffs(sh_index(n, m)) * sign * q.value(n, am);
      }
    for (int b = 0; b < np; ++b) {
      cplx acc = 0;
      for (int m = -nmax; m <= nmax; ++m) acc += per_m(m + nmax) * std::polar(1.0, m * grid.phi()(b));
      values(static_cast<Eigen::Index>(a) * np + b) = acc;
    }
  }
  return values;
}

double l2_sphere_norm(const FarFieldPattern& pattern) {
  require(pattern.values.size() == pattern.grid.size(), ErrorCode::GridMismatch, "pattern/grid size mismatch");
  return std::sqrt((pattern.grid.weights().array() * pattern.values.array().abs2()).sum());
}

double l2_sphere_distance(const FarFieldPattern& a, const FarFieldPattern& b) {
  require(a.grid == b.grid, ErrorCode::GridMismatch, "patterns live on different grids");
  FarFieldPattern diff{a.grid, a.values - b.values, 0.0};
  return l2_sphere_norm(diff);
}

}  // namespace impedlab
