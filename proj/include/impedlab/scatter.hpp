#ifndef IMPEDLAB_SCATTER_HPP
#define IMPEDLAB_SCATTER_HPP

#include <memory>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "impedlab/geometry.hpp"
#include "impedlab/specfun.hpp"

namespace impedlab {

/// Incident plane wave exp(ik x . direction).
struct WaveConfig {
  double k = 1.0;
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();

  static WaveConfig make(double k, const Eigen::Vector3d& direction);

  cplx incident(const Eigen::Vector3d& x) const { return std::polar(1.0, k * x.dot(direction)); }
  cplx incident_normal_derivative(const Eigen::Vector3d& x, const Eigen::Vector3d& normal) const {
    return cplx(0.0, k * normal.dot(direction)) * incident(x);
  }
};

/// Gauss-Legendre in cos(theta) times trapezoid in phi on the unit sphere.
/// Integrates spherical harmonics exactly up to degree 2 n_theta - 1 (given
/// enough phi points), so the harmonic transform below is exact for patterns
/// of degree < n_theta.
class SphereGrid {
 public:
  SphereGrid() = default;
  SphereGrid(int n_theta, int n_phi);

  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  Eigen::Index size() const { return weights_.size(); }
  /// Highest degree the transform resolves exactly.
  int max_degree() const { return std::min(n_theta_ - 1, (n_phi_ - 1) / 2); }

  const Eigen::VectorXd& theta() const { return theta_; }
  const Eigen::VectorXd& phi() const { return phi_; }
  const Eigen::VectorXd& theta_weights() const { return theta_weights_; }
  const Eigen::Matrix3Xd& directions() const { return directions_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  double node_theta(Eigen::Index i) const { return theta_(i / n_phi_); }
  double node_phi(Eigen::Index i) const { return phi_(i % n_phi_); }

  bool operator==(const SphereGrid& other) const { return n_theta_ == other.n_theta_ && n_phi_ == other.n_phi_; }

 private:
  int n_theta_ = 0, n_phi_ = 0;
  Eigen::VectorXd theta_, phi_, theta_weights_, weights_;
  Eigen::Matrix3Xd directions_;
};

/// Coefficients (sh_index order) of sampled values, degree <= nmax.
Eigen::VectorXcd sh_analysis(const SphereGrid& grid, const Eigen::VectorXcd& values, int nmax);
/// Samples on the grid of sum_{n <= nmax} coeffs Y_n^m.
Eigen::VectorXcd sh_synthesis(const SphereGrid& grid, const Eigen::VectorXcd& coeffs, int nmax);

/// Far-field pattern sampled on a sphere grid. noise_level is the L2(S^2)
/// norm of the perturbation added to clean data (0 when synthetic).
struct FarFieldPattern {
  SphereGrid grid;
  Eigen::VectorXcd values;
  double noise_level = 0;

  Eigen::VectorXcd coefficients(int nmax) const { return sh_analysis(grid, values, nmax); }
};

double l2_sphere_norm(const FarFieldPattern& pattern);
/// ||a - b||_{L2(S^2)}; throws GridMismatch when grids differ.
double l2_sphere_distance(const FarFieldPattern& a, const FarFieldPattern& b);

enum class SphereBoundary { Impedance, SoundHard, SoundSoft };

/// u^s = sum (2n+1) i^n c_n h_n(kr) P_n(x^ . direction), n <= order.
struct SeriesRepresentation {
  double radius = 1.0;
  SphereBoundary boundary = SphereBoundary::Impedance;
  double lambda = 0;
  std::vector<cplx> coeffs;
  double tail = 0;

  int order() const { return static_cast<int>(coeffs.size()) - 1; }
};

/// u^s = S mu, the single-layer potential of a nodal density on the mesh.
struct LayerRepresentation {
  Eigen::VectorXcd density;
};

struct CheckpointResidual {
  int dirichlet_points = 0;
  int impedance_points = 0;
  double dirichlet_max = 0;  // max |u| on Gamma_D checkpoints
  double impedance_max = 0;  // max |du/dnu + i lambda u| / scale on Gamma_I checkpoints
  double scale = 1;          // k + max lambda
};

class ScatterSolution {
 public:
  WaveConfig wave;
  std::variant<SeriesRepresentation, LayerRepresentation> representation;
  std::shared_ptr<const BoundaryMesh> mesh;  // always set for layer solutions
  Eigen::VectorXcd u_trace;                  // total field on mesh nodes
  Eigen::VectorXcd dnu_trace;                // its outward normal derivative
  Eigen::VectorXd lambda_nodes;
  double rcond = 1.0;
  CheckpointResidual residual;

  bool is_series() const { return std::holds_alternative<SeriesRepresentation>(representation); }
  const SeriesRepresentation& series() const { return std::get<SeriesRepresentation>(representation); }
  const LayerRepresentation& layer() const { return std::get<LayerRepresentation>(representation); }

  /// Obstacle membership of a point, via the mesh surface or the sphere radius.
  bool is_outside(const Eigen::Vector3d& x) const;
  double obstacle_diameter() const;
};

/// Impedance sphere coefficient c_n; SoundHard drops the lambda term,
/// SoundSoft is the lambda -> infinity limit.
cplx series_coefficient(SphereBoundary boundary, int n, double k, double radius, double lambda,
                        const SphericalBesselTable& bessel);

/// Exact fully coated sphere solution with constant impedance. The order is
/// the smallest one whose tail terms drop below 1e-14; TruncationInsufficient
/// when the cap is reached first.
ScatterSolution sphere_series(const WaveConfig& wave, double radius, double lambda,
                              SphereBoundary boundary = SphereBoundary::Impedance,
                              int order_cap = kDefaultMaxOrder);

struct TraceValues {
  Eigen::VectorXcd u;
  Eigen::VectorXcd dnu;
};

/// Total field and its normal derivative on the sphere r = radius of a series
/// solution, in the given directions.
TraceValues series_boundary_traces(const ScatterSolution& series, const Eigen::Matrix3Xd& directions);

/// Copy of a series solution with traces filled on the nodes of a sphere mesh.
ScatterSolution attach_mesh(const ScatterSolution& series, std::shared_ptr<const BoundaryMesh> mesh);

struct BieOptions {
  /// Size of the per-target polar quadrature relative to the mesh.
  double polar_refinement = 1.5;
  /// Angular radius of the polar patch around each target; the rest of the
  /// surface uses the mesh quadrature. 0 picks pi (whole surface) for fully
  /// coated obstacles and a few node spacings otherwise.
  double local_cutoff = 0;
  double rcond_floor = 1e-13;
  /// Max scaled boundary-condition residual at off-node checkpoints.
  double checkpoint_tolerance = 5e-2;
  /// Checkpoints closer than this (polar angle) to the coating interface are skipped.
  double interface_band = 0.2;
  int max_checkpoints = 256;
  bool check_residual = true;
};

/// Single-layer collocation solve of the mixed Dirichlet/impedance problem.
ScatterSolution solve_direct_bie(std::shared_ptr<const BoundaryMesh> mesh, const WaveConfig& wave,
                                 const ImpedanceField& lambda, const BieOptions& options = {});

/// S mu and K' mu at an arbitrary surface point (theta, phi), by the same
/// rotated polar quadrature used for assembly.
struct SurfaceOperatorValues {
  cplx single_layer;
  cplx adjoint_double_layer;
  cplx density;
};

SurfaceOperatorValues layer_operators_at(const BoundaryMesh& mesh, double k, const Eigen::VectorXcd& density,
                                         double theta, double phi, double polar_refinement = 1.5,
                                         double local_cutoff = 0);

enum class FieldPart { Total, Scattered };

/// Field at exterior points. Throws PointInsideObstacle.
Eigen::VectorXcd eval_field(const ScatterSolution& sol, const Eigen::Matrix3Xd& points,
                            FieldPart part = FieldPart::Total);

FarFieldPattern eval_far_field(const ScatterSolution& sol, const SphereGrid& grid);

/// Far field at arbitrary unit directions.
Eigen::VectorXcd far_field_at(const ScatterSolution& sol, const Eigen::Matrix3Xd& directions);

}  // namespace impedlab

#endif
