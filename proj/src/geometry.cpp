#include "impedlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/random/sobol.hpp>

#include "impedlab/specfun.hpp"

namespace impedlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPoleGuard = 1e-9;

int max_degree(const std::vector<HarmonicTerm>& terms) {
  int l = 0;
  for (const auto& t : terms) l = std::max(l, t.n);
  return l;
}

double wrap_angle(double phi) {
  double w = std::fmod(phi, 2.0 * kPi);
  if (w < 0) w += 2.0 * kPi;
  return w;
}

}  // namespace

Eigen::Vector3d direction(double theta, double phi) {
  const double s = std::sin(theta);
  return {s * std::cos(phi), s * std::sin(phi), std::cos(theta)};
}

std::pair<double, double> angles_of(const Eigen::Vector3d& v) {
  const double r = v.norm();
  const double theta = std::acos(std::clamp(v.z() / r, -1.0, 1.0));
  return {theta, wrap_angle(std::atan2(v.y(), v.x()))};
}

Eigen::Matrix3d frame_around(const Eigen::Vector3d& axis) {
  const Eigen::Vector3d a = axis.normalized();
  const Eigen::Vector3d helper = std::abs(a.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  const Eigen::Vector3d e1 = (helper - helper.dot(a) * a).normalized();
  Eigen::Matrix3d f;
  f.col(0) = e1;
  f.col(1) = a.cross(e1);
  f.col(2) = a;
  return f;
}

// ---------------------------------------------------------------------------
// StarSurface

StarSurface StarSurface::build(const SurfaceDescriptor& descriptor) {
  for (const auto& t : descriptor.harmonics)
    require(t.n >= 0 && std::abs(t.m) <= t.n, ErrorCode::ArgumentOutOfRange,
            "surface harmonic term needs |m| <= n");
  require(descriptor.patch_scale > 0, ErrorCode::ArgumentOutOfRange, "patch_scale must be positive");

  StarSurface s(descriptor);
  const int nt = 64, np = 128;
  const auto rule = gauss_legendre<double>(nt);
  s.r_min_ = std::numeric_limits<double>::infinity();
  s.r_max_ = 0;
  s.lipschitz_ = 0;
  for (int a = 0; a < nt; ++a) {
    const double theta = std::acos(-rule.nodes(a));
    for (int b = 0; b < np; ++b) {
      const double phi = 2.0 * kPi * b / np;
      const auto r = s.radius_sample(theta, phi);
      s.r_min_ = std::min(s.r_min_, r.r);
      s.r_max_ = std::max(s.r_max_, r.r);
      const double grad = std::hypot(r.dtheta, r.dphi / std::sin(theta));
      if (r.r > 0) s.lipschitz_ = std::max(s.lipschitz_, grad / r.r);
    }
  }
  for (double theta : {0.0, kPi}) {
    const double r = s.radius(theta, 0.0);
    s.r_min_ = std::min(s.r_min_, r);
    s.r_max_ = std::max(s.r_max_, r);
  }
  require(s.r_min_ > 0, ErrorCode::NonPositiveRadius,
          "radius map reaches " + std::to_string(s.r_min_) + " <= 0; surface is not star-shaped about 0");

  // pairwise diameter on a coarse grid
  const int ct = 24, cp = 48;
  const auto coarse = gauss_legendre<double>(ct);
  Eigen::Matrix3Xd pts(3, ct * cp + 2);
  for (int a = 0; a < ct; ++a)
    for (int b = 0; b < cp; ++b) {
      const double theta = std::acos(-coarse.nodes(a)), phi = 2.0 * kPi * b / cp;
      pts.col(a * cp + b) = s.radius(theta, phi) * direction(theta, phi);
    }
  pts.col(ct * cp) = s.radius(0, 0) * Eigen::Vector3d::UnitZ();
  pts.col(ct * cp + 1) = -s.radius(kPi, 0) * Eigen::Vector3d::UnitZ();
  double diam2 = 0;
  for (Eigen::Index i = 0; i < pts.cols(); ++i)
    diam2 = std::max(diam2, (pts.rightCols(pts.cols() - i).colwise() - pts.col(i)).colwise().squaredNorm().maxCoeff());
  s.diameter_ = std::sqrt(diam2);
  require(s.diameter_ <= descriptor.diam_bound, ErrorCode::DiameterExceeded,
          "diameter " + std::to_string(s.diameter_) + " exceeds bound " + std::to_string(descriptor.diam_bound));
  require(s.lipschitz_ <= descriptor.lipschitz_bound, ErrorCode::ArgumentOutOfRange,
          "radius-map slope " + std::to_string(s.lipschitz_) + " exceeds Lipschitz bound");
  return s;
}

RadiusSample StarSurface::radius_sample(double theta, double phi) const {
  RadiusSample out{descriptor_.base_radius, 0.0, 0.0};
  if (descriptor_.harmonics.empty()) return out;
  const auto p = associated_legendre(max_degree(descriptor_.harmonics), theta);
  const double r2 = std::numbers::sqrt2;
  for (const auto& t : descriptor_.harmonics) {
    const int am = std::abs(t.m);
    const double q = p.value(t.n, am), dq = p.dtheta(t.n, am);
    if (t.m == 0) {
      out.r += t.coeff * q;
      out.dtheta += t.coeff * dq;
      continue;
    }
    const double c = std::cos(am * phi), s = std::sin(am * phi);
    if (t.m > 0) {
      out.r += t.coeff * r2 * q * c;
      out.dtheta += t.coeff * r2 * dq * c;
      out.dphi -= t.coeff * r2 * am * q * s;
    } else {
      out.r += t.coeff * r2 * q * s;
      out.dtheta += t.coeff * r2 * dq * s;
      out.dphi += t.coeff * r2 * am * q * c;
    }
  }
  return out;
}

double StarSurface::radius_along(const Eigen::Vector3d& dir) const {
  if (is_sphere()) return descriptor_.base_radius;
  const auto [theta, phi] = angles_of(dir);
  return radius(theta, phi);
}

SurfaceFrame StarSurface::frame(double theta, double phi) const {
  const auto r = radius_sample(theta, phi);
  const double st = std::sin(theta), ct = std::cos(theta);
  const Eigen::Vector3d xhat(st * std::cos(phi), st * std::sin(phi), ct);
  const Eigen::Vector3d th(ct * std::cos(phi), ct * std::sin(phi), -st);
  const Eigen::Vector3d ph(-std::sin(phi), std::cos(phi), 0.0);

  // normal per unit solid angle: r xhat - r_theta that - (r_phi / sin) phat
  double rphi_over_sin = 0;
  if (st >= kPoleGuard) {
    rphi_over_sin = r.dphi / st;
  } else if (!is_sphere()) {
    const double t = std::clamp(theta, kPoleGuard, kPi - kPoleGuard);
    rphi_over_sin = radius_sample(t, phi).dphi / std::sin(t);
  }
  const Eigen::Vector3d n = r.r * xhat - r.dtheta * th - rphi_over_sin * ph;
  SurfaceFrame f;
  f.point = r.r * xhat;
  f.normal = n.normalized();
  f.area_element = r.r * n.norm() * st;
  return f;
}

double StarSurface::solid_angle_jacobian(double theta, double phi) const {
  if (is_sphere()) return descriptor_.base_radius * descriptor_.base_radius;
  const double t = std::clamp(theta, kPoleGuard, kPi - kPoleGuard);
  const auto r = radius_sample(t, phi);
  const double g = r.dphi / std::sin(t);
  return r.r * std::sqrt(r.r * r.r + r.dtheta * r.dtheta + g * g);
}

double StarSurface::radial_gap(const Eigen::Vector3d& x) const {
  const double n = x.norm();
  if (n == 0) return -radius(0, 0);
  return n - radius_along(x);
}

bool StarSurface::is_outside(const Eigen::Vector3d& x) const { return radial_gap(x) > 0; }

// ---------------------------------------------------------------------------
// CoatingPartition / ImpedanceField

CoatingPartition CoatingPartition::polar_cap(double cap_angle) {
  require(cap_angle > 0 && cap_angle < kPi, ErrorCode::ArgumentOutOfRange, "polar cap angle must lie in (0, pi)");
  return {Kind::PolarCap, cap_angle};
}

double CoatingPartition::angular_distance_to_dirichlet(double theta) const {
  if (kind == Kind::FullyImpedance) return std::numeric_limits<double>::infinity();
  return std::max(0.0, theta - cap_angle);
}

ImpedanceField::ImpedanceField(Model model, std::vector<double> params, double lambda0, double lipschitz_bound)
    : model_(model), params_(std::move(params)), lambda0_(lambda0), lipschitz_bound_(lipschitz_bound) {
  switch (model_) {
    case Model::Constant:
      require(params_.size() == 1, ErrorCode::ArgumentOutOfRange, "constant impedance takes one parameter");
      break;
    case Model::HarmonicExpansion:
      require(!params_.empty(), ErrorCode::ArgumentOutOfRange, "harmonic impedance needs coefficients");
      break;
    case Model::Bump:
      require(params_.size() == 5 && params_[4] > 0, ErrorCode::ArgumentOutOfRange,
              "bump impedance takes {base, amplitude, theta_c, phi_c, width > 0}");
      break;
  }
}

ImpedanceField ImpedanceField::constant(double value, double lambda0, double lipschitz_bound) {
  return ImpedanceField(Model::Constant, {value}, lambda0, lipschitz_bound);
}

double ImpedanceField::operator()(double theta, double phi) const {
  switch (model_) {
    case Model::Constant:
      return params_[0];
    case Model::HarmonicExpansion: {
      double v = 0;
      for (std::size_t i = 0; i < params_.size(); ++i) {
        if (params_[i] == 0) continue;
        const int n = static_cast<int>(std::sqrt(static_cast<double>(i)));
        const int m = static_cast<int>(i) - n * n - n;
        v += params_[i] * real_sph_harm(n, m, theta, phi).value;
      }
      return v;
    }
    case Model::Bump: {
      const double angle = std::acos(std::clamp(direction(theta, phi).dot(direction(params_[2], params_[3])), -1.0, 1.0));
      const double s = angle / params_[4];
      return params_[0] + params_[1] * std::exp(-s * s);
    }
  }
  return 0;
}

double ImpedanceField::at(const Eigen::Vector3d& x) const {
  if (model_ == Model::Constant) return params_[0];
  const auto [theta, phi] = angles_of(x);
  return (*this)(theta, phi);
}

Eigen::VectorXd ImpedanceField::on_nodes(const BoundaryMesh& mesh) const {
  Eigen::VectorXd v(mesh.size());
  for (Eigen::Index i = 0; i < mesh.size(); ++i) v(i) = (*this)(mesh.node_theta(i), mesh.node_phi(i));
  return v;
}

double ImpedanceField::lipschitz_quotient(const BoundaryMesh& mesh) const {
  const auto nodes = mesh.impedance_nodes();
  const Eigen::VectorXd values = on_nodes(mesh);
  double q = 0;
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      const double d = (mesh.points().col(nodes[a]) - mesh.points().col(nodes[b])).norm();
      if (d > 0) q = std::max(q, std::abs(values(nodes[a]) - values(nodes[b])) / d);
    }
  return q;
}

void ImpedanceField::validate(const BoundaryMesh& mesh) const {
  const Eigen::VectorXd values = on_nodes(mesh);
  for (Eigen::Index i : mesh.impedance_nodes())
    require(values(i) >= lambda0_ && values(i) > 0, ErrorCode::ImpedanceOutOfBounds,
            "impedance " + std::to_string(values(i)) + " below lambda0 = " + std::to_string(lambda0_));
  if (std::isfinite(lipschitz_bound_) && model_ != Model::Constant) {
    const double q = lipschitz_quotient(mesh);
    require(q <= lipschitz_bound_, ErrorCode::ImpedanceOutOfBounds,
            "impedance Lipschitz quotient " + std::to_string(q) + " exceeds Lambda = " +
                std::to_string(lipschitz_bound_));
  }
}

// ---------------------------------------------------------------------------
// ThetaPanel / BoundaryMesh

double ThetaPanel::theta(double t) const {
  const double len = hi - lo;
  if (exponent == 1.0) return lo + len * t;
  return cluster_at_hi ? hi - len * std::pow(1.0 - t, exponent) : lo + len * std::pow(t, exponent);
}

double ThetaPanel::dtheta_dt(double t) const {
  const double len = hi - lo;
  if (exponent == 1.0) return len;
  return cluster_at_hi ? len * exponent * std::pow(1.0 - t, exponent - 1.0)
                       : len * exponent * std::pow(t, exponent - 1.0);
}

double ThetaPanel::parameter(double th) const {
  const double len = hi - lo;
  const double u = std::clamp((th - lo) / len, 0.0, 1.0);
  if (exponent == 1.0) return u;
  return cluster_at_hi ? 1.0 - std::pow(1.0 - u, 1.0 / exponent) : std::pow(u, 1.0 / exponent);
}

double periodic_cardinal(int n, double delta) {
  double d = std::remainder(delta, 2.0 * kPi);
  const double s = std::sin(0.5 * d);
  if (std::abs(s) < 1e-14) return 1.0;
  const double num = std::sin(0.5 * n * d);
  if (n % 2 == 0) return num * std::cos(0.5 * d) / (n * s);
  return num / (n * s);
}

BoundaryMesh::BoundaryMesh(StarSurface surface, CoatingPartition partition, MeshResolution resolution,
                           double grading)
    : surface_(std::move(surface)),
      partition_(partition),
      n_theta_(resolution.n_theta),
      n_phi_(resolution.n_phi),
      grading_(grading) {
  require(n_theta_ >= kMinThetaNodes && n_phi_ >= kMinPhiNodes, ErrorCode::ResolutionTooCoarse,
          "mesh needs at least " + std::to_string(kMinThetaNodes) + "x" + std::to_string(kMinPhiNodes) + " nodes");
  require(grading_ >= 1.0, ErrorCode::ArgumentOutOfRange, "grading exponent must be >= 1");

  auto make_panel = [](int first, int count, double lo, double hi, double exponent, bool at_hi) {
    ThetaPanel p;
    p.first = first;
    p.count = count;
    p.lo = lo;
    p.hi = hi;
    p.exponent = exponent;
    p.cluster_at_hi = at_hi;
    const auto rule = gauss_legendre<double>(count);
    p.t_nodes = 0.5 * (rule.nodes.array() + 1.0);
    p.barycentric.resize(count);
    for (int i = 0; i < count; ++i) {
      double w = 1.0;
      for (int j = 0; j < count; ++j)
        if (j != i) w *= (p.t_nodes(i) - p.t_nodes(j));
      p.barycentric(i) = 1.0 / w;
    }
    p.barycentric /= p.barycentric.cwiseAbs().maxCoeff();
    return p;
  };

  if (partition_.kind == CoatingPartition::Kind::PolarCap) {
    const int cap_nodes =
        std::clamp(static_cast<int>(std::lround(n_theta_ * partition_.cap_angle / kPi)), 4, n_theta_ - 4);
    panels_.push_back(make_panel(0, cap_nodes, 0.0, partition_.cap_angle, grading_, true));
    panels_.push_back(make_panel(cap_nodes, n_theta_ - cap_nodes, partition_.cap_angle, kPi, grading_, false));
  } else {
    panels_.push_back(make_panel(0, n_theta_, 0.0, kPi, 1.0, false));
  }

  theta_.resize(n_theta_);
  theta_weights_.resize(n_theta_);
  for (const auto& p : panels_) {
    const auto rule = gauss_legendre<double>(p.count);
    for (int i = 0; i < p.count; ++i) {
      theta_(p.first + i) = p.theta(p.t_nodes(i));
      theta_weights_(p.first + i) = 0.5 * rule.weights(i) * p.dtheta_dt(p.t_nodes(i));
    }
  }
  phi_ = Eigen::VectorXd::LinSpaced(n_phi_, 0.0, 2.0 * kPi * (n_phi_ - 1) / n_phi_);
  edge_factor_.resize(n_theta_);
  for (int a = 0; a < n_theta_; ++a) edge_factor_(a) = edge_factor(theta_(a));

  const Eigen::Index n = static_cast<Eigen::Index>(n_theta_) * n_phi_;
  points_.resize(3, n);
  normals_.resize(3, n);
  weights_.resize(n);
  const double dphi = 2.0 * kPi / n_phi_;
  for (int a = 0; a < n_theta_; ++a)
    for (int b = 0; b < n_phi_; ++b) {
      const auto f = surface_.frame(theta_(a), phi_(b));
      const Eigen::Index i = static_cast<Eigen::Index>(a) * n_phi_ + b;
      points_.col(i) = f.point;
      normals_.col(i) = f.normal;
      weights_(i) = theta_weights_(a) * dphi * f.area_element;
    }
}

double BoundaryMesh::distance_to_dirichlet(Eigen::Index i) const {
  return points_.col(i).norm() * partition_.angular_distance_to_dirichlet(node_theta(i));
}

std::vector<Eigen::Index> BoundaryMesh::impedance_nodes(double rho) const {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < size(); ++i)
    if (on_impedance(i) && distance_to_dirichlet(i) > rho) out.push_back(i);
  return out;
}

int BoundaryMesh::theta_interpolation(double theta, double* weights) const {
  theta = std::clamp(theta, 0.0, kPi);
  const ThetaPanel* panel = &panels_.back();
  for (const auto& p : panels_)
    if (p.contains(theta)) {
      panel = &p;
      break;
    }
  const double t = panel->parameter(theta);
  double denom = 0;
  for (int i = 0; i < panel->count; ++i) {
    const double d = t - panel->t_nodes(i);
    if (d == 0) {
      std::fill(weights, weights + panel->count, 0.0);
      weights[i] = 1.0;
      return panel->first;
    }
    weights[i] = panel->barycentric(i) / d;
    denom += weights[i];
  }
  // interpolate f * sqrt(distance to the interface) and divide back out, so
  // the d^(-1/2) edge behaviour of mixed-problem densities is reproduced
  const double target = edge_factor(theta);
  for (int i = 0; i < panel->count; ++i)
    weights[i] *= edge_factor_(panel->first + i) / (denom * target);
  return panel->first;
}

double BoundaryMesh::edge_factor(double theta) const {
  if (partition_.kind == CoatingPartition::Kind::FullyImpedance) return 1.0;
  return std::sqrt(std::max(std::abs(theta - partition_.cap_angle), 1e-300));
}

int BoundaryMesh::max_panel_size() const {
  int m = 0;
  for (const auto& p : panels_) m = std::max(m, p.count);
  return m;
}

InterpolationWeights BoundaryMesh::interpolation_weights(double theta, double phi) const {
  InterpolationWeights w;
  Eigen::VectorXd buffer(max_panel_size());
  w.theta_first = theta_interpolation(theta, buffer.data());
  int count = 0;
  for (const auto& p : panels_)
    if (p.first == w.theta_first) count = p.count;
  w.theta_weights = buffer.head(count);
  w.phi_weights.resize(n_phi_);
  for (int b = 0; b < n_phi_; ++b) w.phi_weights(b) = periodic_cardinal(n_phi_, phi - phi_(b));
  return w;
}

std::complex<double> BoundaryMesh::interpolate(const Eigen::VectorXcd& nodal, double theta, double phi) const {
  const auto w = interpolation_weights(theta, phi);
  std::complex<double> v = 0;
  for (Eigen::Index a = 0; a < w.theta_weights.size(); ++a) {
    const Eigen::Index row = (w.theta_first + a) * n_phi_;
    v += w.theta_weights(a) * w.phi_weights.cast<std::complex<double>>().dot(nodal.segment(row, n_phi_));
  }
  return v;
}

BoundaryMesh build_quadrature(const StarSurface& surface, const CoatingPartition& partition,
                              MeshResolution resolution, double grading) {
  return BoundaryMesh(surface, partition, resolution, grading);
}

// ---------------------------------------------------------------------------
// Local patches

Eigen::Vector3d boundary_point(const StarSurface& surface, double theta, double phi) {
  return surface.radius(theta, phi) * direction(theta, phi);
}

Eigen::Matrix3Xd sobol_unit_ball(int candidates) {
  boost::random::sobol engine(3);
  const double span = static_cast<double>(engine.max() - engine.min()) + 1.0;
  engine.discard(3);  // first point is the origin
  std::vector<Eigen::Vector3d> kept;
  kept.reserve(static_cast<std::size_t>(candidates));
  for (int i = 0; i < candidates; ++i) {
    Eigen::Vector3d u;
    for (int d = 0; d < 3; ++d) u(d) = 2.0 * (static_cast<double>(engine() - engine.min()) + 0.5) / span - 1.0;
    if (u.squaredNorm() < 1.0) kept.push_back(u);
  }
  Eigen::Matrix3Xd out(3, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = kept[i];
  return out;
}

LocalPatch local_patch(const StarSurface& surface, const CoatingPartition& partition, const Eigen::Vector3d& x0,
                       double rho, const PatchSampling& sampling) {
  require(rho > 0, ErrorCode::EmptyPatch, "patch radius must be positive");
  require(rho < surface.patch_scale(), ErrorCode::ArgumentOutOfRange,
          "patch radius " + std::to_string(rho) + " not below r0 = " + std::to_string(surface.patch_scale()));
  require(std::abs(surface.radial_gap(x0)) <= 1e-8 * x0.norm(), ErrorCode::ArgumentOutOfRange,
          "patch center is not on the boundary");
  const auto [theta0, phi0] = angles_of(x0);
  const double dist = x0.norm() * partition.angular_distance_to_dirichlet(theta0);
  require(dist > rho, ErrorCode::PatchTouchesDirichlet,
          "patch of radius " + std::to_string(rho) + " reaches Gamma_D (distance " + std::to_string(dist) + ")");

  LocalPatch patch;
  patch.center = x0;
  patch.radius = rho;

  const Eigen::Matrix3Xd ball = sobol_unit_ball(sampling.volume_candidates);
  patch.ball_samples = static_cast<int>(ball.cols());
  const double weight = 4.0 / 3.0 * kPi * rho * rho * rho / static_cast<double>(ball.cols());
  std::vector<Eigen::Index> accepted;
  for (Eigen::Index i = 0; i < ball.cols(); ++i)
    if (surface.is_outside(x0 + rho * ball.col(i))) accepted.push_back(i);
  require(!accepted.empty(), ErrorCode::EmptyPatch, "no volume samples outside the obstacle");
  patch.volume_points.resize(3, static_cast<Eigen::Index>(accepted.size()));
  for (std::size_t i = 0; i < accepted.size(); ++i)
    patch.volume_points.col(static_cast<Eigen::Index>(i)) = x0 + rho * ball.col(accepted[i]);
  patch.volume_weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(accepted.size()), weight);

  // Surface part: polar grid around x0, cut at |y - x0| = rho along each ray.
  const Eigen::Matrix3d frame = frame_around(x0);
  auto surface_at = [&](double tp, double pp) {
    const Eigen::Vector3d dir = frame * direction(tp, pp);
    return Eigen::Vector3d(surface.radius_along(dir) * dir);
  };
  const auto rule = gauss_legendre<double>(sampling.surface_radial);
  const int na = sampling.surface_angular;
  patch.surface_points.resize(3, static_cast<Eigen::Index>(na) * sampling.surface_radial);
  patch.surface_weights.resize(static_cast<Eigen::Index>(na) * sampling.surface_radial);
  const double step = 0.25 * rho / x0.norm();
  for (int b = 0; b < na; ++b) {
    const double pp = 2.0 * kPi * b / na;
    double lo = 0, hi = step;
    while (hi < kPi && (surface_at(hi, pp) - x0).norm() < rho) {
      lo = hi;
      hi = std::min(kPi, hi + step);
    }
    if ((surface_at(hi, pp) - x0).norm() >= rho) {
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        ((surface_at(mid, pp) - x0).norm() < rho ? lo : hi) = mid;
      }
    }
    const double edge = 0.5 * (lo + hi);
    for (int a = 0; a < sampling.surface_radial; ++a) {
      const double tp = 0.5 * edge * (rule.nodes(a) + 1.0);
      const Eigen::Vector3d dir = frame * direction(tp, pp);
      const auto [th, ph] = angles_of(dir);
      const Eigen::Index i = static_cast<Eigen::Index>(b) * sampling.surface_radial + a;
      patch.surface_points.col(i) = surface.radius(th, ph) * dir;
      patch.surface_weights(i) =
          0.5 * edge * rule.weights(a) * (2.0 * kPi / na) * surface.solid_angle_jacobian(th, ph) * std::sin(tp);
    }
  }
  return patch;
}

}  // namespace impedlab
