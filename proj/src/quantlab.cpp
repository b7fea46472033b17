#include "impedlab/quantlab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "impedlab/inverse.hpp"

namespace impedlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kE = std::numbers::e;

struct LineFit {
  double intercept = 0;
  double slope = 0;
  double rms = 0;
};

LineFit least_squares_line(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  Eigen::MatrixXd a(x.size(), 2);
  a.col(0).setOnes();
  a.col(1) = x;
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd r = a * coef - y;
  return {coef(0), coef(1), std::sqrt(r.squaredNorm() / static_cast<double>(x.size()))};
}

void check_records(const std::vector<StabilityRecord>& records) {
  std::set<double> distinct;
  for (const auto& r : records) {
    require(r.eps > 0 && r.eps < 1, ErrorCode::InsufficientData, "noise levels must lie in (0, 1)");
    require(r.error > 0 && std::isfinite(r.error), ErrorCode::InsufficientData,
            "errors must be positive and finite for a log fit");
    distinct.insert(r.eps);
  }
  require(distinct.size() >= 4, ErrorCode::InsufficientData,
          "need at least four distinct noise levels, got " + std::to_string(distinct.size()));
}

double alpha_of(double t) { return 1.0 / (1.0 + std::log(std::log(1.0 / t) + kE)); }

Eigen::Matrix3Xd scaled(const Eigen::Matrix3Xd& unit, const Eigen::Vector3d& center, double r) {
  return (r * unit).colwise() + center;
}

double weighted_mass(const Eigen::VectorXcd& u, const Eigen::VectorXd& w) {
  return w.dot(u.cwiseAbs2());
}

}  // namespace

Modulus stability_modulus(double t, double c, double theta) {
  require(t > 0 && t < 1, ErrorCode::ArgumentOutOfRange, "modulus argument must lie in (0, 1)");
  require(c > 0 && theta > 0, ErrorCode::ArgumentOutOfRange, "modulus constants must be positive");
  const double alpha = alpha_of(t);
  return {alpha, c * std::pow(alpha * std::log(1.0 / t), -theta)};
}

StabilityFit fit_stability(const std::vector<StabilityRecord>& records) {
  check_records(records);
  const auto n = static_cast<Eigen::Index>(records.size());
  Eigen::VectorXd x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    const double l = std::log(1.0 / r.eps);
    x(i) = std::log(alpha_of(r.eps) * l);
    y(i) = std::log(r.error);
  }
  const LineFit line = least_squares_line(x, y);
  StabilityFit fit;
  fit.samples = records;
  fit.c = std::exp(line.intercept);
  fit.theta = -line.slope;
  fit.residual = line.rms;
  fit.non_decaying = fit.theta <= 1e-9;
  return fit;
}

PowerLawFit fit_power_law(const std::vector<StabilityRecord>& records) {
  check_records(records);
  const auto n = static_cast<Eigen::Index>(records.size());
  Eigen::VectorXd x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i) = std::log(records[static_cast<std::size_t>(i)].eps);
    y(i) = std::log(records[static_cast<std::size_t>(i)].error);
  }
  const LineFit line = least_squares_line(x, y);
  return {std::exp(line.intercept), line.slope, line.rms};
}

// ---------------------------------------------------------------------------

FieldSource solution_field(const ScatterSolution& sol, cplx scale) {
  auto shared = std::make_shared<const ScatterSolution>(sol);
  FieldSource f;
  f.exterior = [shared, scale](const Eigen::Matrix3Xd& x) -> Eigen::VectorXcd {
    return scale * eval_field(*shared, x, FieldPart::Total);
  };
  f.boundary = [shared, scale](const Eigen::Matrix3Xd& x) -> Eigen::VectorXcd {
    if (shared->is_series()) return scale * series_boundary_traces(*shared, x.colwise().normalized()).u;
    Eigen::VectorXcd out(x.cols());
    for (Eigen::Index p = 0; p < x.cols(); ++p) {
      const auto [th, ph] = angles_of(x.col(p));
      out(p) = scale * shared->mesh->interpolate(shared->u_trace, th, ph);
    }
    return out;
  };
  f.is_outside = [shared](const Eigen::Vector3d& x) { return shared->is_outside(x); };
  f.diameter = sol.obstacle_diameter();
  return f;
}

FieldSource incident_field(const WaveConfig& wave) {
  FieldSource f;
  auto eval = [wave](const Eigen::Matrix3Xd& x) -> Eigen::VectorXcd {
    Eigen::VectorXcd out(x.cols());
    for (Eigen::Index p = 0; p < x.cols(); ++p) out(p) = wave.incident(x.col(p));
    return out;
  };
  f.exterior = eval;
  f.boundary = eval;
  f.is_outside = [](const Eigen::Vector3d&) { return true; };
  f.diameter = 0;
  return f;
}

FieldSource constant_field(cplx value, const StarSurface& surface) {
  auto shared = std::make_shared<const StarSurface>(surface);
  FieldSource f;
  auto eval = [value](const Eigen::Matrix3Xd& x) -> Eigen::VectorXcd {
    return Eigen::VectorXcd::Constant(x.cols(), value);
  };
  f.exterior = eval;
  f.boundary = eval;
  f.is_outside = [shared](const Eigen::Vector3d& x) { return shared->is_outside(x); };
  f.diameter = surface.diameter();
  return f;
}

FieldSource difference_field(const FieldSource& a, const FieldSource& b) {
  FieldSource f;
  f.exterior = [a, b](const Eigen::Matrix3Xd& x) -> Eigen::VectorXcd { return a.exterior(x) - b.exterior(x); };
  f.boundary = [a, b](const Eigen::Matrix3Xd& x) -> Eigen::VectorXcd { return a.boundary(x) - b.boundary(x); };
  f.is_outside = a.is_outside;
  f.diameter = a.diameter;
  return f;
}

// ---------------------------------------------------------------------------

LowerBoundReport check_lower_bound(const FieldSource& field, std::vector<double> radii, int samples_per_sphere) {
  require(!radii.empty(), ErrorCode::ArgumentOutOfRange, "no radii given");
  require(samples_per_sphere > 0, ErrorCode::ArgumentOutOfRange, "need at least one sample per sphere");
  std::sort(radii.begin(), radii.end());
  for (double r : radii)
    require(r > field.diameter, ErrorCode::RadiusInsideObstacle,
            "radius " + std::to_string(r) + " does not exceed the obstacle diameter " + std::to_string(field.diameter));
  const Eigen::Matrix3Xd dirs = fibonacci_directions(samples_per_sphere);
  LowerBoundReport report;
  report.radii = radii;
  for (double r : radii) {
    const Eigen::VectorXcd u = field.exterior(r * dirs);
    report.min_abs_u.push_back(u.cwiseAbs().minCoeff());
  }
  for (std::size_t i = radii.size(); i-- > 0;) {
    if (report.min_abs_u[i] <= 0.5) break;
    report.r0_hat = radii[i];
  }
  return report;
}

// ---------------------------------------------------------------------------

DoublingReport check_volume_doubling(const FieldSource& field, const StarSurface& surface,
                                     const CoatingPartition& partition, const std::vector<PatchCenter>& centers,
                                     const std::vector<double>& rhos, const std::vector<double>& betas,
                                     const PatchSampling& sampling) {
  require(!betas.empty(), ErrorCode::ArgumentOutOfRange, "no doubling factors given");
  for (double b : betas) require(b > 1, ErrorCode::ArgumentOutOfRange, "doubling factors must exceed 1");
  DoublingReport report;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const Eigen::Vector3d x0 = boundary_point(surface, centers[c].theta, centers[c].phi);
    for (double rho : rhos) {
      const LocalPatch inner = local_patch(surface, partition, x0, rho, sampling);
      const double m_inner = weighted_mass(field.exterior(inner.volume_points), inner.volume_weights);
      require(m_inner > 0, ErrorCode::DegenerateMasses, "field vanishes on the inner patch");
      Eigen::VectorXd lb(static_cast<Eigen::Index>(betas.size())), lr(lb.size());
      for (std::size_t j = 0; j < betas.size(); ++j) {
        const LocalPatch outer = local_patch(surface, partition, x0, betas[j] * rho, sampling);
        const double m_outer = weighted_mass(field.exterior(outer.volume_points), outer.volume_weights);
        DoublingRow row{static_cast<int>(c), centers[c].theta, centers[c].phi, rho, betas[j], m_inner, m_outer,
                        m_outer / m_inner};
        report.max_ratio = std::max(report.max_ratio, row.ratio);
        report.min_ratio = std::min(report.min_ratio, row.ratio);
        report.rows.push_back(row);
        lb(static_cast<Eigen::Index>(j)) = std::log(betas[j]);
        lr(static_cast<Eigen::Index>(j)) = std::log(row.ratio);
      }
      DoublingFit fit{static_cast<int>(c), rho, 0, 1};
      if (betas.size() >= 2) {
        const LineFit line = least_squares_line(lb, lr);
        fit.k_hat = line.slope;
        fit.c_hat = std::exp(line.intercept);
      } else {
        fit.k_hat = lr(0) / lb(0);
      }
      report.k_max = std::max(report.k_max, fit.k_hat);
      report.c_max = std::max(report.c_max, fit.c_hat);
      report.fits.push_back(fit);
    }
  }
  return report;
}

DoublingReport check_surface_doubling(const FieldSource& field, const StarSurface& surface,
                                      const CoatingPartition& partition, const std::vector<PatchCenter>& centers,
                                      const std::vector<double>& radii, const PatchSampling& sampling) {
  DoublingReport report;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const Eigen::Vector3d x0 = boundary_point(surface, centers[c].theta, centers[c].phi);
    for (double r : radii) {
      const LocalPatch inner = local_patch(surface, partition, x0, r, sampling);
      const LocalPatch outer = local_patch(surface, partition, x0, 2.0 * r, sampling);
      const double m_inner = weighted_mass(field.boundary(inner.surface_points), inner.surface_weights);
      const double m_outer = weighted_mass(field.boundary(outer.surface_points), outer.surface_weights);
      require(m_inner > 0, ErrorCode::DegenerateMasses, "trace vanishes on the inner patch");
      DoublingRow row{static_cast<int>(c), centers[c].theta, centers[c].phi, r, 2.0, m_inner, m_outer,
                      m_outer / m_inner};
      report.max_ratio = std::max(report.max_ratio, row.ratio);
      report.min_ratio = std::min(report.min_ratio, row.ratio);
      report.rows.push_back(row);
      DoublingFit fit{static_cast<int>(c), r, std::log2(row.ratio), row.ratio};
      report.k_max = std::max(report.k_max, fit.k_hat);
      report.c_max = std::max(report.c_max, fit.c_hat);
      report.fits.push_back(fit);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------

bool ThreeSpheresReport::tau_in_unit_interval() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const ThreeSpheresRow& r) { return r.tau_hat > 0 && r.tau_hat < 1; });
}

ThreeSpheresReport check_three_spheres(const FieldSource& field, const std::vector<Eigen::Vector3d>& centers,
                                       double rho, double beta1, double beta2, int candidates) {
  require(rho > 0 && beta1 > 1 && beta2 > beta1, ErrorCode::ArgumentOutOfRange,
          "three-spheres radii need rho > 0 and 1 < beta1 < beta2");
  const Eigen::Matrix3Xd ball = sobol_unit_ball(candidates);
  const Eigen::Matrix3Xd shell = fibonacci_directions(256);
  const double n = static_cast<double>(ball.cols());
  auto mass = [&](const Eigen::Vector3d& c, double r) {
    const Eigen::VectorXcd u = field.exterior(scaled(ball, c, r));
    return 4.0 / 3.0 * kPi * r * r * r * u.cwiseAbs2().sum() / n;
  };
  ThreeSpheresReport report;
  for (const auto& c : centers) {
    const double r_out = beta2 * rho;
    for (Eigen::Index i = 0; i < ball.cols(); ++i)
      require(field.is_outside(c + r_out * ball.col(i)), ErrorCode::BallTouchesObstacle,
              "ball of radius " + std::to_string(r_out) + " meets the obstacle");
    for (Eigen::Index i = 0; i < shell.cols(); ++i)
      require(field.is_outside(c + r_out * shell.col(i)), ErrorCode::BallTouchesObstacle,
              "ball of radius " + std::to_string(r_out) + " meets the obstacle");
    ThreeSpheresRow row;
    row.center = c;
    row.rho = rho;
    row.beta1 = beta1;
    row.beta2 = beta2;
    row.mass_inner = mass(c, rho);
    row.mass_middle = mass(c, beta1 * rho);
    row.mass_outer = mass(c, r_out);
    require(row.mass_inner > 0 && row.mass_outer != row.mass_inner, ErrorCode::DegenerateMasses,
            "ball masses are degenerate");
    const double lo = std::log(row.mass_inner), mid = std::log(row.mass_middle), hi = std::log(row.mass_outer);
    row.tau_hat = (hi - mid) / (hi - lo);
    const double tau = std::log(beta2 / beta1) / std::log(beta2);
    row.defect = mid - (tau * lo + (1.0 - tau) * hi);
    report.rows.push_back(row);
  }
  return report;
}

// ---------------------------------------------------------------------------

ApReport check_reverse_holder_ap(const FieldSource& field, const StarSurface& surface,
                                 const CoatingPartition& partition, const std::vector<PatchCenter>& centers,
                                 const std::vector<double>& radii, std::vector<double> const& ps, double bound,
                                 const PatchSampling& sampling) {
  for (double p : ps) require(p > 1, ErrorCode::ArgumentOutOfRange, "A_p exponents must exceed 1");
  ApReport report;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const Eigen::Vector3d x0 = boundary_point(surface, centers[c].theta, centers[c].phi);
    for (double r : radii) {
      const LocalPatch patch = local_patch(surface, partition, x0, r, sampling);
      const Eigen::VectorXd a = field.boundary(patch.surface_points).cwiseAbs();
      const Eigen::VectorXd& w = patch.surface_weights;
      const double area = w.sum();
      double masked = 0;
      for (Eigen::Index i = 0; i < a.size(); ++i)
        if (!(a(i) > 0)) masked += w(i);
      const double mean2 = w.dot(a.cwiseAbs2()) / area;
      const double mean4 = w.dot(a.array().pow(4).matrix()) / area;
      const double rh = std::pow(mean4, 0.25) / std::sqrt(mean2);
      for (double p : ps) {
        ApRow row{static_cast<int>(c), centers[c].theta, centers[c].phi, r, p, mean2, 0, 0, rh, masked / area};
        if (masked > 0) {
          row.mean_inverse = std::numeric_limits<double>::infinity();
        } else {
          row.mean_inverse = w.dot(a.array().pow(-2.0 / (p - 1.0)).matrix()) / area;
        }
        row.product = mean2 * std::pow(row.mean_inverse, p - 1.0);
        report.rows.push_back(row);
      }
    }
  }
  std::vector<double> sorted = ps;
  std::sort(sorted.begin(), sorted.end());
  for (double p : sorted) {
    const bool ok = std::all_of(report.rows.begin(), report.rows.end(), [&](const ApRow& row) {
      return row.p != p || (std::isfinite(row.product) && row.product <= bound);
    });
    if (ok && !report.rows.empty()) {
      report.smallest_bounded_p = p;
      break;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------

Psi0Case psi0_case(double k, double lambda) {
  const double d = k * k - lambda * lambda;
  if (d < 0) return Psi0Case::Below;
  if (d > 0) return Psi0Case::Above;
  return Psi0Case::Equal;
}

double psi0_radius(double k, double lambda) {
  require(k > 0 && lambda > 0, ErrorCode::ArgumentOutOfRange, "psi0 needs k > 0 and lambda > 0");
  const double d = std::abs(k * k - lambda * lambda);
  const double r = 1.0 / lambda;
  return kPi / 4.0 * (d > 0 ? std::min(1.0 / std::sqrt(d), r) : r);
}

namespace {

// psi0 = A(y1) S(y3) with S = sin(lambda y3) + i cos(lambda y3).
struct Psi0Parts {
  double a, da, dda;
  cplx s, ds, dds;
};

Psi0Parts psi0_parts(double k, double lambda, const Eigen::Vector3d& y) {
  Psi0Parts p{};
  const double d = k * k - lambda * lambda;
  switch (psi0_case(k, lambda)) {
    case Psi0Case::Below: {
      const double m = std::sqrt(-d);
      p.a = 8.0 * std::cosh(m * y(0));
      p.da = 8.0 * m * std::sinh(m * y(0));
      p.dda = m * m * p.a;
      break;
    }
    case Psi0Case::Above: {
      const double m = std::sqrt(d);
      p.a = 8.0 * std::cos(m * y(0));
      p.da = -8.0 * m * std::sin(m * y(0));
      p.dda = -m * m * p.a;
      break;
    }
    case Psi0Case::Equal:
      p.a = 8.0;
      p.da = 0;
      p.dda = 0;
      break;
  }
  const double c = std::cos(lambda * y(2)), s = std::sin(lambda * y(2));
  p.s = cplx(s, c);
  p.ds = lambda * cplx(c, -s);
  p.dds = -lambda * lambda * p.s;
  return p;
}

}  // namespace

cplx psi0_value(double k, double lambda, const Eigen::Vector3d& y) {
  const auto p = psi0_parts(k, lambda, y);
  return p.a * p.s;
}

Eigen::Vector3cd psi0_gradient(double k, double lambda, const Eigen::Vector3d& y) {
  const auto p = psi0_parts(k, lambda, y);
  return {p.da * p.s, 0.0, p.a * p.ds};
}

cplx psi0_laplacian(double k, double lambda, const Eigen::Vector3d& y) {
  const auto p = psi0_parts(k, lambda, y);
  return p.dda * p.s + p.a * p.dds;
}

Psi0Report psi0_residual(double k, double lambda, const Eigen::Matrix3Xd& points, double fd_step) {
  Psi0Report rep;
  rep.which = psi0_case(k, lambda);
  rep.radius = psi0_radius(k, lambda);
  rep.min_abs = std::numeric_limits<double>::infinity();
  const double h = fd_step;
  const cplx il(0.0, lambda);
  for (Eigen::Index p = 0; p < points.cols(); ++p) {
    const Eigen::Vector3d y = points.col(p);
    require(y(2) <= 0 && y.norm() <= rep.radius * (1.0 + 1e-12), ErrorCode::ArgumentOutOfRange,
            "psi0 point outside the lower half-ball");
    const cplx v = psi0_value(k, lambda, y);
    rep.min_abs = std::min(rep.min_abs, std::abs(v));
    rep.pde_residual = std::max(rep.pde_residual, std::abs(psi0_laplacian(k, lambda, y) + k * k * v));

    const Eigen::Vector3cd g = psi0_gradient(k, lambda, y);
    cplx div = 0;
    for (int d = 0; d < 3; ++d) {
      const Eigen::Vector3d e = h * Eigen::Vector3d::Unit(d);
      const cplx fd = (psi0_value(k, lambda, y + e) - psi0_value(k, lambda, y - e)) / (2.0 * h);
      rep.fd_gradient = std::max(rep.fd_gradient, std::abs(fd - g(d)));
      div += (psi0_gradient(k, lambda, y + e)(d) - psi0_gradient(k, lambda, y - e)(d)) / (2.0 * h);
    }
    rep.fd_pde_residual = std::max(rep.fd_pde_residual, std::abs(div + k * k * v));

    const Eigen::Vector3d b(y(0), y(1), 0.0);
    const cplx vb = psi0_value(k, lambda, b);
    rep.bc_residual = std::max(rep.bc_residual, std::abs(psi0_gradient(k, lambda, b)(2) + il * vb));
    const Eigen::Vector3d e3 = h * Eigen::Vector3d::UnitZ();
    const cplx fd3 = (psi0_value(k, lambda, b + e3) - psi0_value(k, lambda, b - e3)) / (2.0 * h);
    rep.fd_bc_residual = std::max(rep.fd_bc_residual, std::abs(fd3 + il * vb));
  }
  return rep;
}

Eigen::Matrix3Xd lower_half_ball_points(double radius, int count) {
  require(radius > 0 && count > 0, ErrorCode::ArgumentOutOfRange, "half-ball needs a positive radius and count");
  int candidates = 2 * count + 16;
  Eigen::Matrix3Xd ball = sobol_unit_ball(candidates);
  while (ball.cols() < count) {
    candidates *= 2;
    ball = sobol_unit_ball(candidates);
  }
  Eigen::Matrix3Xd out = radius * ball.leftCols(count);
  out.row(2) = -out.row(2).cwiseAbs();
  return out;
}

}  // namespace impedlab
