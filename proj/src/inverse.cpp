#include "impedlab/inverse.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace impedlab {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t base, std::uint64_t index) { return splitmix64(base ^ splitmix64(index)); }

FarFieldPattern add_noise(const FarFieldPattern& pattern, double eps, std::uint64_t seed) {
  require(eps >= 0 && std::isfinite(eps), ErrorCode::ArgumentOutOfRange, "noise level must be >= 0");
  require(pattern.values.size() == pattern.grid.size(), ErrorCode::GridMismatch, "pattern/grid size mismatch");
  FarFieldPattern out = pattern;
  out.noise_level = eps;
  if (eps == 0) return out;
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXcd noise(pattern.values.size());
  for (Eigen::Index i = 0; i < noise.size(); ++i) {
    const double re = normal(gen);
    const double im = normal(gen);
    noise(i) = {re, im};
  }
  const double norm = std::sqrt((pattern.grid.weights().array() * noise.array().abs2()).sum());
  out.values += noise * (eps / norm);
  return out;
}

cplx NearFieldAnnulus::scattered(const Eigen::Vector3d& x) const {
  const double r = x.norm();
  const auto [theta, phi] = angles_of(x);
  const auto y = sph_harm_all(order, theta, phi);
  const auto bessel = spherical_bessel_table(order, k * r, std::max(order, kDefaultMaxOrder));
  cplx acc = 0;
  for (int n = 0; n <= order; ++n)
    for (int m = -n; m <= n; ++m) acc += coefficients(sh_index(n, m)) * bessel.h(n) * y(sh_index(n, m));
  return acc;
}

int truncation_order(double k, double radius, double eps, int n_max) {
  require(n_max >= 0, ErrorCode::ArgumentOutOfRange, "negative maximum degree");
  if (eps == 0) return n_max;
  const auto bessel = spherical_bessel_table(n_max, k * radius, std::max(n_max, kDefaultMaxOrder));
  int order = 0;
  for (int n = 0; n <= n_max; ++n) {
    if (std::abs(k * bessel.h(n)) * eps > std::sqrt(eps)) break;
    order = n;
  }
  return order;
}

NearFieldAnnulus far_to_near(const FarFieldPattern& pattern, double k, double r1, double obstacle_diameter,
                             const TruncationPolicy& policy) {
  require(r1 > obstacle_diameter, ErrorCode::RadiusInsideObstacle,
          "near-field radius " + std::to_string(r1) + " must exceed the obstacle diameter " +
              std::to_string(obstacle_diameter));
  require(k > 0, ErrorCode::ArgumentOutOfRange, "wavenumber must be positive");
  const int n_max = std::min(policy.max_order, pattern.grid.max_degree());
  require(n_max >= 0, ErrorCode::ArgumentOutOfRange, "maximum degree must be >= 0");

  NearFieldAnnulus near;
  near.k = k;
  near.radius = r1;
  near.grid = pattern.grid;
  near.noise_level = pattern.noise_level;
  if (policy.forced_order >= 0) {
    require(policy.forced_order <= pattern.grid.max_degree(), ErrorCode::ArgumentOutOfRange,
            "forced degree exceeds what the grid resolves");
    near.order = policy.forced_order;
  } else {
    near.order = truncation_order(k, r1, pattern.noise_level, n_max);
  }
  const int order = near.order;

  const Eigen::VectorXcd g = sh_analysis(pattern.grid, pattern.values, order);
  const auto bessel = spherical_bessel_table(order, k * r1, std::max(order, kDefaultMaxOrder));
  near.coefficients.resize(sh_count(order));
  Eigen::VectorXcd radial(sh_count(order));
  double gain = 0;
  for (int n = 0; n <= order; ++n) {
    const cplx scale = k * ipow(n + 1);
    gain += (2.0 * n + 1.0) * std::norm(k * bessel.h(n));
    for (int m = -n; m <= n; ++m) {
      near.coefficients(sh_index(n, m)) = scale * g(sh_index(n, m));
      radial(sh_index(n, m)) = near.coefficients(sh_index(n, m)) * bessel.h(n);
    }
  }
  near.values = sh_synthesis(pattern.grid, radial, order);
  near.points = r1 * pattern.grid.directions();
  near.propagated_error = pattern.noise_level * std::sqrt(gain) / (order + 1.0);
  return near;
}

Eigen::Matrix3Xd fibonacci_directions(int n) {
  require(n >= 1, ErrorCode::ArgumentOutOfRange, "need at least one direction");
  Eigen::Matrix3Xd out(3, n);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    out.col(i) << s * std::cos(golden * i), s * std::sin(golden * i), z;
  }
  return out;
}

FundamentalSolutionFit::FundamentalSolutionFit(std::shared_ptr<const BoundaryMesh> mesh, const WaveConfig& wave,
                                               const SphereGrid& grid, double radius, double rho,
                                               const MfsOptions& options)
    : mesh_(std::move(mesh)), wave_(wave), grid_(grid), radius_(radius), options_(options) {
  require(mesh_ != nullptr, ErrorCode::ArgumentOutOfRange, "fit needs a mesh");
  require(options.gamma_in > 0 && options.gamma_in < 1, ErrorCode::ArgumentOutOfRange,
          "source inflation factor must lie in (0, 1)");
  require(options.sources >= 1, ErrorCode::ArgumentOutOfRange, "need at least one source");
  require(rho >= 0, ErrorCode::ArgumentOutOfRange, "rho must be >= 0");
  const auto& surface = mesh_->surface();

  nodes_ = mesh_->impedance_nodes(rho);
  require(!nodes_.empty(), ErrorCode::EmptyPatch, "no impedance nodes farther than rho from Gamma_D");

  const Eigen::Matrix3Xd dirs = fibonacci_directions(options.sources);
  sources_.resize(3, options.sources);
  for (int j = 0; j < options.sources; ++j)
    sources_.col(j) = options.gamma_in * surface.radius_along(dirs.col(j)) * dirs.col(j);

  const double k = wave.k;
  const Eigen::Index p = grid.size();
  sqrt_w_ = grid.weights().cwiseSqrt();
  Eigen::MatrixXcd a(p, options.sources);
  for (Eigen::Index i = 0; i < p; ++i) {
    const Eigen::Vector3d x = radius * grid.directions().col(i);
    for (int j = 0; j < options.sources; ++j) a(i, j) = sqrt_w_(i) * helmholtz_kernel(k, x, sources_.col(j));
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  u_ = svd.matrixU();
  v_ = svd.matrixV();
  sigma_ = svd.singularValues();

  const Eigen::Index n = static_cast<Eigen::Index>(nodes_.size());
  eval_u_.resize(n, options.sources);
  eval_dnu_.resize(n, options.sources);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d x = mesh_->points().col(nodes_[static_cast<std::size_t>(i)]);
    const Eigen::Vector3d nu = mesh_->normals().col(nodes_[static_cast<std::size_t>(i)]);
    for (int j = 0; j < options.sources; ++j) {
      eval_u_(i, j) = helmholtz_kernel(k, x, sources_.col(j));
      eval_dnu_(i, j) = helmholtz_kernel_dnx(k, x, sources_.col(j), nu);
    }
  }
}

Eigen::VectorXcd FundamentalSolutionFit::solve(const Eigen::VectorXcd& b, double alpha) const {
  const Eigen::VectorXcd beta = u_.adjoint() * b;
  Eigen::VectorXcd scaled(beta.size());
  for (Eigen::Index i = 0; i < beta.size(); ++i) scaled(i) = beta(i) * sigma_(i) / (sigma_(i) * sigma_(i) + alpha);
  return v_ * scaled;
}

double FundamentalSolutionFit::residual(const Eigen::VectorXcd& b, double alpha) const {
  const Eigen::VectorXcd beta = u_.adjoint() * b;
  const double outside = (b - u_ * beta).squaredNorm();
  double inside = 0;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    const double f = alpha / (sigma_(i) * sigma_(i) + alpha);
    inside += f * f * std::norm(beta(i));
  }
  return std::sqrt(outside + inside);
}

BoundaryTrace FundamentalSolutionFit::fit(const NearFieldAnnulus& near) const {
  require(near.grid == grid_ && std::abs(near.radius - radius_) <= 1e-12 * radius_, ErrorCode::GridMismatch,
          "near-field samples do not match the fit geometry");
  const Eigen::VectorXcd b = sqrt_w_.cast<cplx>().cwiseProduct(near.values);
  const Eigen::VectorXcd beta = u_.adjoint() * b;
  const double outside = (b - u_ * beta).squaredNorm();
  auto misfit = [&](double alpha) {
    double inside = 0;
    for (Eigen::Index i = 0; i < beta.size(); ++i) {
      const double f = alpha / (sigma_(i) * sigma_(i) + alpha);
      inside += f * f * std::norm(beta(i));
    }
    return std::sqrt(outside + inside);
  };

  BoundaryTrace trace;
  trace.mesh = mesh_;
  trace.nodes = nodes_;
  trace.target = near.propagated_error;
  const double smax2 = sigma_(0) * sigma_(0);
  const double lo = options_.alpha_floor * smax2, hi = 1e4 * smax2;
  for (int i = 0; i <= 28; ++i) {
    const double alpha = lo * std::pow(hi / lo, i / 28.0);
    trace.residual_curve.emplace_back(alpha, misfit(alpha));
  }

  double alpha;
  if (options_.alpha >= 0) {
    alpha = options_.alpha;
  } else {
    const double delta = near.propagated_error;
    require(b.norm() > delta, ErrorCode::IllConditionedFit,
            "near-field data norm " + std::to_string(b.norm()) + " is below the noise estimate " +
                std::to_string(delta) + "; discrepancy cannot be met");
    if (misfit(lo) >= delta) {
      alpha = lo;
      trace.floor_active = true;
    } else {
      double a = std::log(lo), c = std::log(hi);
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (a + c);
        (misfit(std::exp(mid)) < delta ? a : c) = mid;
      }
      alpha = std::exp(0.5 * (a + c));
    }
  }
  trace.alpha = alpha;
  trace.residual = misfit(alpha);

  Eigen::VectorXcd filtered(beta.size());
  for (Eigen::Index i = 0; i < beta.size(); ++i) filtered(i) = beta(i) * sigma_(i) / (sigma_(i) * sigma_(i) + alpha);
  const Eigen::VectorXcd c = v_ * filtered;

  const Eigen::Index n = static_cast<Eigen::Index>(nodes_.size());
  trace.u = eval_u_ * c;
  trace.dnu = eval_dnu_ * c;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index node = nodes_[static_cast<std::size_t>(i)];
    const Eigen::Vector3d x = mesh_->points().col(node);
    trace.u(i) += wave_.incident(x);
    trace.dnu(i) += wave_.incident_normal_derivative(x, mesh_->normals().col(node));
  }

  // white noise of norm delta spread over the samples, pushed through the
  // filtered inverse and evaluated at the worst node
  Eigen::VectorXd filter(sigma_.size());
  for (Eigen::Index i = 0; i < sigma_.size(); ++i) filter(i) = sigma_(i) / (sigma_(i) * sigma_(i) + alpha);
  const Eigen::MatrixXcd gain = (eval_u_ * v_) * filter.asDiagonal();
  const double worst = gain.rowwise().norm().maxCoeff();
  trace.estimated_error =
      std::max(trace.residual, near.propagated_error) * worst / std::sqrt(static_cast<double>(grid_.size()));
  return trace;
}

BoundaryTrace near_to_boundary(const NearFieldAnnulus& near, std::shared_ptr<const BoundaryMesh> mesh,
                               const WaveConfig& wave, double rho, const MfsOptions& options) {
  require(std::abs(near.k - wave.k) <= 1e-14 * wave.k, ErrorCode::ArgumentOutOfRange,
          "near field and wave disagree on k");
  return FundamentalSolutionFit(std::move(mesh), wave, near.grid, near.radius, rho, options).fit(near);
}

int ReconstructionResult::trusted_count() const {
  return static_cast<int>(std::count(trusted.begin(), trusted.end(), true));
}

double default_trust_threshold(const BoundaryTrace& trace) {
  const double umax = trace.u.size() ? trace.u.cwiseAbs().maxCoeff() : 0.0;
  return std::max(10.0 * trace.estimated_error, 1e-3 * umax);
}

ReconstructionResult recover_impedance(const BoundaryTrace& trace, double tau) {
  require(tau > 0, ErrorCode::ArgumentOutOfRange, "trust threshold must be positive");
  require(trace.u.size() == trace.dnu.size() && trace.u.size() == static_cast<Eigen::Index>(trace.nodes.size()),
          ErrorCode::GridMismatch, "trace arrays disagree in length");
  ReconstructionResult out;
  out.mesh = trace.mesh;
  out.nodes = trace.nodes;
  out.tau = tau;
  const Eigen::Index n = trace.u.size();
  out.lambda_hat = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  out.trusted.assign(static_cast<std::size_t>(n), false);
  out.abs_u = trace.u.cwiseAbs();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(out.abs_u(i) >= tau)) continue;
    const cplx ratio = cplx(0.0, 1.0) * trace.dnu(i) / trace.u(i);
    out.lambda_hat(i) = ratio.real();
    out.trusted[static_cast<std::size_t>(i)] = true;
    out.max_imag = std::max(out.max_imag, std::abs(ratio.imag()));
  }
  require(out.trusted_count() > 0, ErrorCode::AllMasked,
          "no boundary node has |u| >= tau = " + std::to_string(tau));
  return out;
}

double impedance_error(const ImpedanceField& truth, const ReconstructionResult& result, ErrorNorm norm) {
  require(result.trusted_count() > 0, ErrorCode::AllMasked, "no trusted nodes to compare");
  double sup = 0, sum = 0;
  for (std::size_t i = 0; i < result.nodes.size(); ++i) {
    if (!result.trusted[i]) continue;
    const Eigen::Index node = result.nodes[i];
    const double diff =
        std::abs(truth(result.mesh->node_theta(node), result.mesh->node_phi(node)) - result.lambda_hat(static_cast<Eigen::Index>(i)));
    sup = std::max(sup, diff);
    sum += result.mesh->weights()(node) * diff * diff;
  }
  return norm == ErrorNorm::Sup ? sup : std::sqrt(sum);
}

}  // namespace impedlab
