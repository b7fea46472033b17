#ifndef IMPEDLAB_GEOMETRY_HPP
#define IMPEDLAB_GEOMETRY_HPP

#include <complex>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "impedlab/error.hpp"

namespace impedlab {

/// One real spherical-harmonic term of a radius map or impedance expansion.
struct HarmonicTerm {
  int n = 0;
  int m = 0;
  double coeff = 0;
};

struct SurfaceDescriptor {
  double base_radius = 1.0;
  std::vector<HarmonicTerm> harmonics;
  double diam_bound = std::numeric_limits<double>::infinity();
  double lipschitz_bound = std::numeric_limits<double>::infinity();
  double patch_scale = 0.5;
};

struct RadiusSample {
  double r = 0, dtheta = 0, dphi = 0;
};

struct SurfaceFrame {
  Eigen::Vector3d point;
  Eigen::Vector3d normal;
  double area_element = 0;  // |x_theta x x_phi|
};

/// Unit vector for polar angle theta and azimuth phi.
Eigen::Vector3d direction(double theta, double phi);

/// Polar angle and azimuth (in [0, 2 pi)) of a non-zero vector.
std::pair<double, double> angles_of(const Eigen::Vector3d& v);

/// Star-shaped obstacle boundary r(theta, phi) = base_radius + sum c Y_n^m
/// (real harmonics). Immutable after construction.
class StarSurface {
 public:
  static StarSurface build(const SurfaceDescriptor& descriptor);

  const SurfaceDescriptor& descriptor() const { return descriptor_; }
  bool is_sphere() const { return descriptor_.harmonics.empty(); }

  RadiusSample radius_sample(double theta, double phi) const;
  double radius(double theta, double phi) const { return radius_sample(theta, phi).r; }
  double radius_along(const Eigen::Vector3d& dir) const;

  SurfaceFrame frame(double theta, double phi) const;
  /// Area per unit solid angle, r sqrt(r^2 + |grad_S r|^2).
  double solid_angle_jacobian(double theta, double phi) const;

  bool is_outside(const Eigen::Vector3d& x) const;
  /// |x| - r(x / |x|); positive outside.
  double radial_gap(const Eigen::Vector3d& x) const;

  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }
  double diameter() const { return diameter_; }
  double lipschitz_estimate() const { return lipschitz_; }
  double diam_bound() const { return descriptor_.diam_bound; }
  double patch_scale() const { return descriptor_.patch_scale; }

 private:
  explicit StarSurface(SurfaceDescriptor d) : descriptor_(std::move(d)) {}

  SurfaceDescriptor descriptor_;
  double r_min_ = 0, r_max_ = 0, diameter_ = 0, lipschitz_ = 0;
};

inline StarSurface build_surface(const SurfaceDescriptor& d) { return StarSurface::build(d); }
inline SurfaceFrame surface_frame(const StarSurface& s, double theta, double phi) { return s.frame(theta, phi); }

/// Gamma_D = {theta < cap_angle} for a polar cap, empty otherwise.
struct CoatingPartition {
  enum class Kind { FullyImpedance, PolarCap };
  Kind kind = Kind::FullyImpedance;
  double cap_angle = 0;

  static CoatingPartition fully_impedance() { return {}; }
  static CoatingPartition polar_cap(double cap_angle);

  bool is_dirichlet(double theta) const { return kind == Kind::PolarCap && theta < cap_angle; }
  /// Polar-angle distance to Gamma_D, zero on Gamma_D, infinite when Gamma_D is empty.
  double angular_distance_to_dirichlet(double theta) const;
};

class BoundaryMesh;

/// Real surface impedance on Gamma_I.
class ImpedanceField {
 public:
  enum class Model { Constant, HarmonicExpansion, Bump };

  /// constant: {value}; harmonic_expansion: coefficients in sh_index order;
  /// bump: {base, amplitude, theta_c, phi_c, width} with
  /// lambda = base + amplitude exp(-(angle / width)^2).
  ImpedanceField(Model model, std::vector<double> params, double lambda0, double lipschitz_bound);

  static ImpedanceField constant(double value, double lambda0 = 0.0,
                                 double lipschitz_bound = std::numeric_limits<double>::infinity());

  Model model() const { return model_; }
  const std::vector<double>& params() const { return params_; }
  double lambda0() const { return lambda0_; }
  double lipschitz_bound() const { return lipschitz_bound_; }
  bool is_constant() const { return model_ == Model::Constant; }

  double operator()(double theta, double phi) const;
  double at(const Eigen::Vector3d& x) const;

  /// Values on every mesh node (Gamma_D nodes included; unused there).
  Eigen::VectorXd on_nodes(const BoundaryMesh& mesh) const;

  /// Checks lambda >= lambda0 and the pairwise Lipschitz quotient on the
  /// Gamma_I nodes of the mesh. Throws ImpedanceOutOfBounds.
  void validate(const BoundaryMesh& mesh) const;

  /// Largest |lambda(x) - lambda(y)| / |x - y| over Gamma_I node pairs.
  double lipschitz_quotient(const BoundaryMesh& mesh) const;

 private:
  Model model_;
  std::vector<double> params_;
  double lambda0_;
  double lipschitz_bound_;
};

struct MeshResolution {
  int n_theta = 24;
  int n_phi = 48;
};

inline constexpr int kMinThetaNodes = 8;
inline constexpr int kMinPhiNodes = 16;

/// One Gauss-Legendre block in theta. theta(t) maps t in [0, 1] onto
/// [lo, hi], optionally clustered toward one end with the grading exponent.
struct ThetaPanel {
  int first = 0;
  int count = 0;
  double lo = 0, hi = 0;
  double exponent = 1;
  bool cluster_at_hi = false;
  Eigen::VectorXd t_nodes;       // panel parameter of each node
  Eigen::VectorXd barycentric;   // barycentric weights for Lagrange interpolation in t

  double theta(double t) const;
  double dtheta_dt(double t) const;
  double parameter(double theta) const;
  bool contains(double theta) const { return theta >= lo && theta <= hi; }
};

/// Tensor interpolation weights at one (theta, phi): Lagrange in the panel
/// parameter times trigonometric interpolation in phi.
struct InterpolationWeights {
  int theta_first = 0;
  Eigen::VectorXd theta_weights;
  Eigen::VectorXd phi_weights;
};

/// Gauss-Legendre (per theta panel) x trapezoid (phi) quadrature of the
/// surface. Node index = theta_index * n_phi + phi_index.
class BoundaryMesh {
 public:
  BoundaryMesh(StarSurface surface, CoatingPartition partition, MeshResolution resolution, double grading);

  const StarSurface& surface() const { return surface_; }
  const CoatingPartition& partition() const { return partition_; }
  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  Eigen::Index size() const { return points_.cols(); }
  double grading() const { return grading_; }

  const Eigen::Matrix3Xd& points() const { return points_; }
  const Eigen::Matrix3Xd& normals() const { return normals_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& theta_nodes() const { return theta_; }
  const Eigen::VectorXd& theta_weights() const { return theta_weights_; }
  const Eigen::VectorXd& phi_nodes() const { return phi_; }
  const std::vector<ThetaPanel>& panels() const { return panels_; }

  double node_theta(Eigen::Index i) const { return theta_(i / n_phi_); }
  double node_phi(Eigen::Index i) const { return phi_(i % n_phi_); }
  bool on_impedance(Eigen::Index i) const { return !partition_.is_dirichlet(node_theta(i)); }

  /// Distance from node i to Gamma_D measured along the polar angle.
  double distance_to_dirichlet(Eigen::Index i) const;
  /// Gamma_I^rho: impedance nodes with distance_to_dirichlet > rho.
  std::vector<Eigen::Index> impedance_nodes(double rho = 0.0) const;

  InterpolationWeights interpolation_weights(double theta, double phi) const;
  /// Lagrange weights in theta only: writes panel.count weights to `weights`
  /// and returns the index of the first theta node they apply to. On polar
  /// cap meshes the weights carry the factor edge_factor(theta_a) /
  /// edge_factor(theta).
  int theta_interpolation(double theta, double* weights) const;
  int max_panel_size() const;
  /// sqrt(|theta - cap_angle|) on polar cap meshes, 1 otherwise.
  double edge_factor(double theta) const;
  /// Interpolates nodal values at (theta, phi).
  std::complex<double> interpolate(const Eigen::VectorXcd& nodal, double theta, double phi) const;

  double area() const { return weights_.sum(); }

 private:
  StarSurface surface_;
  CoatingPartition partition_;
  int n_theta_, n_phi_;
  double grading_;
  std::vector<ThetaPanel> panels_;
  Eigen::VectorXd theta_, theta_weights_, phi_, edge_factor_;
  Eigen::Matrix3Xd points_, normals_;
  Eigen::VectorXd weights_;
};

BoundaryMesh build_quadrature(const StarSurface& surface, const CoatingPartition& partition,
                              MeshResolution resolution, double grading = 1.0);

/// Trigonometric cardinal function of an equispaced periodic grid of n points
/// evaluated at offset delta from a node.
double periodic_cardinal(int n, double delta);

struct PatchSampling {
  int volume_candidates = 20000;  // Sobol points drawn in the bounding cube
  int surface_radial = 16;
  int surface_angular = 48;
};

/// Gamma_{I,rho}(x0) = B_rho(x0) minus closure(D) and its trace on dD.
struct LocalPatch {
  Eigen::Vector3d center;
  double radius = 0;
  Eigen::Matrix3Xd volume_points;
  Eigen::VectorXd volume_weights;
  Eigen::Matrix3Xd surface_points;
  Eigen::VectorXd surface_weights;
  int ball_samples = 0;  // quasi-random points that landed in B_rho(x0)

  double volume() const { return volume_weights.sum(); }
  double surface_area() const { return surface_weights.sum(); }
};

/// Point of the surface in direction (theta, phi).
Eigen::Vector3d boundary_point(const StarSurface& surface, double theta, double phi);

LocalPatch local_patch(const StarSurface& surface, const CoatingPartition& partition, const Eigen::Vector3d& x0,
                       double rho, const PatchSampling& sampling = {});

/// Low-discrepancy points filling the unit ball, first n in-ball Sobol points
/// of the cube [-1, 1]^3 (the origin is skipped).
Eigen::Matrix3Xd sobol_unit_ball(int candidates);

/// Orthonormal frame (e1, e2, axis) with axis as the third column.
Eigen::Matrix3d frame_around(const Eigen::Vector3d& axis);

}  // namespace impedlab

#endif
