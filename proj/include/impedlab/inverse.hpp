#ifndef IMPEDLAB_INVERSE_HPP
#define IMPEDLAB_INVERSE_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "impedlab/geometry.hpp"
#include "impedlab/scatter.hpp"

namespace impedlab {

/// Adds complex Gaussian noise rescaled to L2(S^2) norm exactly eps.
/// Deterministic in (seed); eps = 0 returns the pattern unchanged.
FarFieldPattern add_noise(const FarFieldPattern& pattern, double eps, std::uint64_t seed);

/// Seed of an independent stream for item `index` of a run seeded with `base`.
std::uint64_t stream_seed(std::uint64_t base, std::uint64_t index);

struct TruncationPolicy {
  /// Highest degree kept (also the degree used for noiseless data).
  int max_order = 10;
  /// When >= 0, this degree is used regardless of the noise level.
  int forced_order = -1;
};

/// Scattered field on the sphere |x| = radius, sampled in the far-field grid
/// directions, with u^s(x) = sum a_n^m h_n(k|x|) Y_n^m(x^).
struct NearFieldAnnulus {
  double k = 1;
  double radius = 0;
  SphereGrid grid;
  Eigen::Matrix3Xd points;
  Eigen::VectorXcd values;
  Eigen::VectorXcd coefficients;  // a_n^m, sh_index order, degree <= order
  int order = 0;
  double noise_level = 0;
  /// L2(S^2) size of the noise carried into the near field.
  double propagated_error = 0;

  cplx scattered(const Eigen::Vector3d& x) const;
};

/// Degree kept for noise level eps: largest n <= n_max with
/// |k h_n(k R)| eps <= sqrt(eps); n_max when eps = 0.
int truncation_order(double k, double radius, double eps, int n_max);

/// Back-propagates the far field to the sphere of radius r1. Throws
/// RadiusInsideObstacle unless r1 exceeds the obstacle diameter.
NearFieldAnnulus far_to_near(const FarFieldPattern& pattern, double k, double r1, double obstacle_diameter,
                             const TruncationPolicy& policy = {});

struct MfsOptions {
  double gamma_in = 0.7;
  int sources = 400;
  /// Ridge parameter; negative selects it by the discrepancy principle.
  double alpha = -1;
  /// Smallest admissible ridge parameter relative to sigma_max^2.
  double alpha_floor = 1e-24;
};

/// Traces of the total field on Gamma_I^rho.
struct BoundaryTrace {
  std::shared_ptr<const BoundaryMesh> mesh;
  std::vector<Eigen::Index> nodes;
  Eigen::VectorXcd u;
  Eigen::VectorXcd dnu;
  double alpha = 0;
  double residual = 0;           // weighted L2 misfit on the near-field sphere
  double target = 0;             // discrepancy target (propagated error)
  bool floor_active = false;     // discrepancy unreachable; alpha at its floor
  std::vector<std::pair<double, double>> residual_curve;  // (alpha, residual)
  /// Rough size of the boundary-trace error, used for the trust threshold.
  double estimated_error = 0;
};

/// Fundamental-solution fit of near-field data. The SVD of the weighted
/// source matrix depends only on the geometry and is computed once, so a
/// sweep over noise draws reuses it.
class FundamentalSolutionFit {
 public:
  FundamentalSolutionFit(std::shared_ptr<const BoundaryMesh> mesh, const WaveConfig& wave, const SphereGrid& grid,
                         double radius, double rho, const MfsOptions& options = {});

  BoundaryTrace fit(const NearFieldAnnulus& near) const;

  const Eigen::Matrix3Xd& sources() const { return sources_; }
  const Eigen::VectorXd& singular_values() const { return sigma_; }
  const std::vector<Eigen::Index>& nodes() const { return nodes_; }
  /// Ridge solution for weighted data b (already multiplied by sqrt(w)).
  Eigen::VectorXcd solve(const Eigen::VectorXcd& b, double alpha) const;
  /// Weighted residual of the ridge solution.
  double residual(const Eigen::VectorXcd& b, double alpha) const;

 private:
  std::shared_ptr<const BoundaryMesh> mesh_;
  WaveConfig wave_;
  SphereGrid grid_;
  double radius_;
  MfsOptions options_;
  std::vector<Eigen::Index> nodes_;
  Eigen::Matrix3Xd sources_;
  Eigen::VectorXd sqrt_w_;
  Eigen::MatrixXcd u_, v_;
  Eigen::VectorXd sigma_;
  Eigen::MatrixXcd eval_u_, eval_dnu_;  // source fields at the trace nodes
};

/// Fibonacci-spiral directions on the unit sphere.
Eigen::Matrix3Xd fibonacci_directions(int n);

BoundaryTrace near_to_boundary(const NearFieldAnnulus& near, std::shared_ptr<const BoundaryMesh> mesh,
                               const WaveConfig& wave, double rho, const MfsOptions& options = {});

struct ReconstructionResult {
  std::shared_ptr<const BoundaryMesh> mesh;
  std::vector<Eigen::Index> nodes;
  Eigen::VectorXd lambda_hat;  // NaN where not trusted
  std::vector<bool> trusted;
  Eigen::VectorXd abs_u;
  double tau = 0;
  double max_imag = 0;  // max |Im(i dnu / u)| over trusted nodes

  int trusted_count() const;
};

/// max(10 * estimated trace error, 1e-3 * max |u|).
double default_trust_threshold(const BoundaryTrace& trace);

/// lambda = Re(i dnu / u) where |u| >= tau. Throws AllMasked.
ReconstructionResult recover_impedance(const BoundaryTrace& trace, double tau);

enum class ErrorNorm { Sup, L2 };

double impedance_error(const ImpedanceField& truth, const ReconstructionResult& result, ErrorNorm norm);

}  // namespace impedlab

#endif
