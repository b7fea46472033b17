#include <cmath>

#include "impedlab/scatter.hpp"

namespace impedlab {

namespace {
constexpr double kSeriesTail = 1e-14;
}

cplx series_coefficient(SphereBoundary boundary, int n, double k, double radius, double lambda,
                        const SphericalBesselTable& bessel) {
  (void)radius;
  const cplx i(0.0, 1.0);
  switch (boundary) {
    case SphereBoundary::Impedance:
      return -(k * bessel.dj(n) + i * lambda * bessel.j(n)) / (k * bessel.dh(n) + i * lambda * bessel.h(n));
    case SphereBoundary::SoundHard:
      return -bessel.dj(n) / bessel.dh(n);
    case SphereBoundary::SoundSoft:
      return -bessel.j(n) / bessel.h(n);
  }
  return 0;
}

ScatterSolution sphere_series(const WaveConfig& wave, double radius, double lambda, SphereBoundary boundary,
                              int order_cap) {
  require(radius > 0, ErrorCode::ArgumentOutOfRange, "sphere radius must be positive");
  require(boundary != SphereBoundary::Impedance || lambda >= 0, ErrorCode::ArgumentOutOfRange,
          "impedance must be non-negative");
  const double ka = wave.k * radius;
  const auto bessel = spherical_bessel_table(order_cap, ka, order_cap);

  SeriesRepresentation rep;
  rep.radius = radius;
  rep.boundary = boundary;
  rep.lambda = lambda;
  int quiet = 0;
  for (int n = 0; n <= order_cap; ++n) {
    const cplx c = series_coefficient(boundary, n, wave.k, radius, lambda, bessel);
    rep.coeffs.push_back(c);
    const double term = (2.0 * n + 1.0) * std::max(std::abs(c * bessel.h(n)), std::abs(bessel.j(n)));
    const double dterm = (2.0 * n + 1.0) * std::max(std::abs(c * bessel.dh(n)), std::abs(bessel.dj(n)));
    rep.tail = std::max(term, dterm);
    quiet = (rep.tail < kSeriesTail) ? quiet + 1 : 0;
    if (quiet == 2) break;
  }
  require(quiet == 2, ErrorCode::TruncationInsufficient,
          "series tail " + std::to_string(rep.tail) + " still above 1e-14 at order " + std::to_string(order_cap));

  ScatterSolution sol;
  sol.wave = wave;
  sol.representation = std::move(rep);
  return sol;
}

TraceValues series_boundary_traces(const ScatterSolution& sol, const Eigen::Matrix3Xd& directions) {
  const auto& rep = sol.series();
  const double k = sol.wave.k;
  const int order = rep.order();
  const auto bessel = spherical_bessel_table(order, k * rep.radius, std::max(order, kDefaultMaxOrder));
  TraceValues out{Eigen::VectorXcd(directions.cols()), Eigen::VectorXcd(directions.cols())};
  for (Eigen::Index p = 0; p < directions.cols(); ++p) {
    const Eigen::Vector3d xhat = directions.col(p).normalized();
    const Eigen::Vector3d x = rep.radius * xhat;
    const auto leg = legendre_table(order, std::clamp(xhat.dot(sol.wave.direction), -1.0, 1.0));
    cplx us = 0, dus = 0;
    for (int n = 0; n <= order; ++n) {
      const cplx a = (2.0 * n + 1.0) * ipow(n) * rep.coeffs[static_cast<std::size_t>(n)] * leg(n);
      us += a * bessel.h(n);
      dus += a * k * bessel.dh(n);
    }
    out.u(p) = us + sol.wave.incident(x);
    out.dnu(p) = dus + sol.wave.incident_normal_derivative(x, xhat);
  }
  return out;
}

ScatterSolution attach_mesh(const ScatterSolution& series, std::shared_ptr<const BoundaryMesh> mesh) {
  require(series.is_series(), ErrorCode::ArgumentOutOfRange, "attach_mesh needs a series solution");
  require(mesh && mesh->surface().is_sphere() &&
              std::abs(mesh->surface().descriptor().base_radius - series.series().radius) < 1e-14,
          ErrorCode::ArgumentOutOfRange, "mesh surface must be the series sphere");
  ScatterSolution out = series;
  out.mesh = mesh;
  const auto traces = series_boundary_traces(series, mesh->points());
  out.u_trace = traces.u;
  out.dnu_trace = traces.dnu;
  out.lambda_nodes = Eigen::VectorXd::Constant(mesh->size(), series.series().lambda);
  return out;
}

}  // namespace impedlab
