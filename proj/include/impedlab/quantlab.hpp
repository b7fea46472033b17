#ifndef IMPEDLAB_QUANTLAB_HPP
#define IMPEDLAB_QUANTLAB_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "impedlab/geometry.hpp"
#include "impedlab/scatter.hpp"

namespace impedlab {

// ---------------------------------------------------------------------------
// Stability moduli

struct Modulus {
  double alpha = 0;
  double eta = 0;
};

/// alpha(t) = 1 / (1 + log(log(1/t) + e)), eta(t) = C (alpha(t) log(1/t))^(-theta).
Modulus stability_modulus(double t, double c, double theta);

struct StabilityRecord {
  double eps = 0;
  double error = 0;
};

struct StabilityFit {
  std::vector<StabilityRecord> samples;
  double c = 0;
  double theta = 0;
  double residual = 0;  // RMS of the log-space misfit
  bool non_decaying = false;
};

/// Least squares of log err against log(alpha(eps) log(1/eps)). Throws
/// InsufficientData with fewer than four distinct eps in (0, 1).
StabilityFit fit_stability(const std::vector<StabilityRecord>& records);

/// Two-parameter power law err = C eps^s fitted in log space.
struct PowerLawFit {
  double c = 0;
  double exponent = 0;
  double residual = 0;
};

PowerLawFit fit_power_law(const std::vector<StabilityRecord>& records);

// ---------------------------------------------------------------------------
// Fields under test

/// A field outside an obstacle, with its trace on the boundary.
struct FieldSource {
  std::function<Eigen::VectorXcd(const Eigen::Matrix3Xd&)> exterior;
  std::function<Eigen::VectorXcd(const Eigen::Matrix3Xd&)> boundary;
  std::function<bool(const Eigen::Vector3d&)> is_outside;
  double diameter = 0;
};

/// Total field of a solution, multiplied by `scale`.
FieldSource solution_field(const ScatterSolution& sol, cplx scale = 1.0);
/// Plane wave with no obstacle.
FieldSource incident_field(const WaveConfig& wave);
/// u == value around the given surface.
FieldSource constant_field(cplx value, const StarSurface& surface);
/// a - b, sharing the obstacle of a.
FieldSource difference_field(const FieldSource& a, const FieldSource& b);

// ---------------------------------------------------------------------------
// Lower bound

struct LowerBoundReport {
  std::vector<double> radii;
  std::vector<double> min_abs_u;
  double r0_hat = std::numeric_limits<double>::infinity();

  bool found() const { return std::isfinite(r0_hat); }
};

/// min |u| on spheres of the given radii; R0_hat is the smallest radius from
/// which on every tested minimum exceeds 1/2. Throws RadiusInsideObstacle.
LowerBoundReport check_lower_bound(const FieldSource& field, std::vector<double> radii, int samples_per_sphere);

// ---------------------------------------------------------------------------
// Doubling

struct DoublingRow {
  int center = 0;
  double theta0 = 0, phi0 = 0;
  double rho = 0;
  double beta = 0;
  double inner = 0;  // mass at rho
  double outer = 0;  // mass at beta rho
  double ratio = 0;
};

struct DoublingFit {
  int center = 0;
  double rho = 0;
  double k_hat = 0;
  double c_hat = 0;
};

struct DoublingReport {
  std::vector<DoublingRow> rows;
  std::vector<DoublingFit> fits;
  double max_ratio = 0;
  double min_ratio = std::numeric_limits<double>::infinity();
  double k_max = 0;
  double c_max = 0;

  bool all_at_least_one() const { return min_ratio >= 1.0; }
};

struct PatchCenter {
  double theta = 0, phi = 0;
};

/// int_{Gamma_{I, beta rho}} |u|^2 / int_{Gamma_{I, rho}} |u|^2 over the
/// exterior half-ball patches, with a log-log fit in beta per (center, rho).
DoublingReport check_volume_doubling(const FieldSource& field, const StarSurface& surface,
                                     const CoatingPartition& partition, const std::vector<PatchCenter>& centers,
                                     const std::vector<double>& rhos, const std::vector<double>& betas,
                                     const PatchSampling& sampling = {});

/// Surface version at beta = 2; c_max is the largest ratio.
DoublingReport check_surface_doubling(const FieldSource& field, const StarSurface& surface,
                                      const CoatingPartition& partition, const std::vector<PatchCenter>& centers,
                                      const std::vector<double>& radii, const PatchSampling& sampling = {});

// ---------------------------------------------------------------------------
// Three spheres

struct ThreeSpheresRow {
  Eigen::Vector3d center;
  double rho = 0, beta1 = 0, beta2 = 0;
  double mass_inner = 0, mass_middle = 0, mass_outer = 0;
  double tau_hat = std::numeric_limits<double>::quiet_NaN();
  double defect = 0;
};

struct ThreeSpheresReport {
  std::vector<ThreeSpheresRow> rows;

  bool tau_in_unit_interval() const;
};

/// Ball integrals of |U|^2 by quasi-random sampling. Throws
/// BallTouchesObstacle, DegenerateMasses, ArgumentOutOfRange unless 1 < beta1 < beta2.
ThreeSpheresReport check_three_spheres(const FieldSource& field, const std::vector<Eigen::Vector3d>& centers,
                                       double rho, double beta1, double beta2, int candidates = 20000);

// ---------------------------------------------------------------------------
// Reverse Hoelder / A_p

struct ApRow {
  int center = 0;
  double theta0 = 0, phi0 = 0;
  double radius = 0;
  double p = 0;
  double mean_u2 = 0;
  double mean_inverse = 0;  // mean |u|^(-2/(p-1))
  double product = 0;       // mean_u2 * mean_inverse^(p-1)
  double reverse_holder = 0;
  double masked_fraction = 0;
};

struct ApReport {
  std::vector<ApRow> rows;
  /// Smallest p whose products are all finite and below the bound; NaN if none.
  double smallest_bounded_p = std::numeric_limits<double>::quiet_NaN();
};

ApReport check_reverse_holder_ap(const FieldSource& field, const StarSurface& surface,
                                 const CoatingPartition& partition, const std::vector<PatchCenter>& centers,
                                 const std::vector<double>& radii, const std::vector<double>& ps,
                                 double bound = 1e6, const PatchSampling& sampling = {});

// ---------------------------------------------------------------------------
// Exact half-space solutions psi_0

enum class Psi0Case { Below, Equal, Above };  // sign of k^2 - lambda^2

Psi0Case psi0_case(double k, double lambda);
/// (pi / 4) min(|k^2 - lambda^2|^(-1/2), 1 / lambda).
double psi0_radius(double k, double lambda);

cplx psi0_value(double k, double lambda, const Eigen::Vector3d& y);
Eigen::Vector3cd psi0_gradient(double k, double lambda, const Eigen::Vector3d& y);
cplx psi0_laplacian(double k, double lambda, const Eigen::Vector3d& y);

struct Psi0Report {
  Psi0Case which = Psi0Case::Equal;
  double radius = 0;
  double pde_residual = 0;  // max |Lap psi + k^2 psi|, analytic
  double bc_residual = 0;   // max |d psi / dy3 + i lambda psi| at y3 = 0, analytic
  double fd_gradient = 0;   // max |central-difference gradient - analytic gradient|
  double fd_pde_residual = 0;
  double fd_bc_residual = 0;
  double min_abs = 0;
};

/// Points must satisfy y3 <= 0 and |y| <= psi0_radius. The boundary
/// residual is evaluated at the projections onto y3 = 0.
Psi0Report psi0_residual(double k, double lambda, const Eigen::Matrix3Xd& points, double fd_step = 1e-5);

/// Quasi-random points in the lower half-ball of the given radius.
Eigen::Matrix3Xd lower_half_ball_points(double radius, int count);

}  // namespace impedlab

#endif
