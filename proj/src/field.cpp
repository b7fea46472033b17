#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "impedlab/scatter.hpp"

namespace impedlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxUpsample = 8;

// Density carried over to a finer copy of the mesh, for evaluating the
// layer potential close to the surface.
struct FineLayer {
  std::shared_ptr<const BoundaryMesh> mesh;
  Eigen::VectorXcd density;
};

FineLayer upsample(const BoundaryMesh& mesh, const Eigen::VectorXcd& density, int factor) {
  const MeshResolution res{factor * mesh.n_theta(), factor * mesh.n_phi()};
  auto fine = std::make_shared<const BoundaryMesh>(mesh.surface(), mesh.partition(), res, mesh.grading());
  const int nt = mesh.n_theta(), np = mesh.n_phi();
  Eigen::MatrixXd lt = Eigen::MatrixXd::Zero(res.n_theta, nt);
  Eigen::VectorXd buf(mesh.max_panel_size());
  for (int a = 0; a < res.n_theta; ++a) {
    const int first = mesh.theta_interpolation(fine->theta_nodes()(a), buf.data());
    int count = 0;
    for (const auto& p : mesh.panels())
      if (p.first == first) count = p.count;
    lt.row(a).segment(first, count) = buf.head(count).transpose();
  }
  Eigen::MatrixXd lp(res.n_phi, np);
  for (int b = 0; b < res.n_phi; ++b)
    for (int c = 0; c < np; ++c) lp(b, c) = periodic_cardinal(np, fine->phi_nodes()(b) - mesh.phi_nodes()(c));
  const Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> coarse(
      density.data(), nt, np);
  const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> values =
      lt.cast<cplx>() * coarse * lp.transpose().cast<cplx>();
  FineLayer out{fine, Eigen::VectorXcd(fine->size())};
  out.density = Eigen::Map<const Eigen::VectorXcd>(values.data(), values.size());
  return out;
}

// Upsampled layers keyed by the density address, checked against a copy of
// the density so a reused address never returns stale data.
class UpsampleCache {
 public:
  std::shared_ptr<const FineLayer> get(const BoundaryMesh& mesh, const Eigen::VectorXcd& density, int factor) {
    std::lock_guard<std::mutex> lock(mutex_);
    const Key key{density.data(), factor};
    auto it = cache_.find(key);
    if (it == cache_.end() || it->second.source.size() != density.size() || it->second.source != density) {
      if (cache_.size() > 8) cache_.clear();
      Entry e{density, std::make_shared<const FineLayer>(upsample(mesh, density, factor))};
      it = cache_.insert_or_assign(key, std::move(e)).first;
    }
    return it->second.layer;
  }

 private:
  using Key = std::pair<const void*, int>;
  struct Entry {
    Eigen::VectorXcd source;
    std::shared_ptr<const FineLayer> layer;
  };
  std::mutex mutex_;
  std::map<Key, Entry> cache_;
};

UpsampleCache& cache() {
  static UpsampleCache c;
  return c;
}

cplx single_layer(const BoundaryMesh& mesh, const Eigen::VectorXcd& density, double k, const Eigen::Vector3d& x) {
  cplx acc = 0;
  for (Eigen::Index j = 0; j < mesh.size(); ++j) {
    const double d = (x - mesh.points().col(j)).norm();
    acc += mesh.weights()(j) * std::polar(1.0, k * d) / d * density(j);
  }
  return acc / (4.0 * kPi);
}

// Node spacing scale of the mesh and the upsampling factor for a point at
// distance gap from the surface.
int upsample_factor(const BoundaryMesh& mesh, double gap) {
  const double h = mesh.surface().r_max() * 2.0 * kPi / mesh.n_phi();
  if (gap >= 4.0 * h) return 1;
  return std::clamp(static_cast<int>(std::ceil(4.0 * h / std::max(gap, 1e-12))), 2, kMaxUpsample);
}

cplx series_scattered(const ScatterSolution& sol, const Eigen::Vector3d& x) {
  const auto& rep = sol.series();
  const double r = x.norm();
  const int order = rep.order();
  const auto bessel = spherical_bessel_table(order, sol.wave.k * r, std::max(order, kDefaultMaxOrder));
  const auto leg = legendre_table(order, std::clamp(x.dot(sol.wave.direction) / r, -1.0, 1.0));
  cplx acc = 0;
  for (int n = 0; n <= order; ++n)
    acc += (2.0 * n + 1.0) * ipow(n) * rep.coeffs[static_cast<std::size_t>(n)] * bessel.h(n) * leg(n);
  return acc;
}

}  // namespace

bool ScatterSolution::is_outside(const Eigen::Vector3d& x) const {
  if (mesh) return mesh->surface().is_outside(x);
  return x.norm() > series().radius;
}

double ScatterSolution::obstacle_diameter() const {
  if (mesh) return mesh->surface().diameter();
  return 2.0 * series().radius;
}

Eigen::VectorXcd eval_field(const ScatterSolution& sol, const Eigen::Matrix3Xd& points, FieldPart part) {
  for (Eigen::Index p = 0; p < points.cols(); ++p)
    require(sol.is_outside(points.col(p)), ErrorCode::PointInsideObstacle,
            "evaluation point " + std::to_string(p) + " is not outside the obstacle");
  Eigen::VectorXcd out(points.cols());
  const double k = sol.wave.k;
  if (sol.is_series()) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index p = 0; p < points.cols(); ++p) out(p) = series_scattered(sol, points.col(p));
  } else {
    const auto& mesh = *sol.mesh;
    const auto& mu = sol.layer().density;
    std::vector<int> factor(static_cast<std::size_t>(points.cols()));
    for (Eigen::Index p = 0; p < points.cols(); ++p) {
      const Eigen::Vector3d x = points.col(p);
      const double gap = mesh.surface().radial_gap(x) * mesh.surface().r_min() / mesh.surface().r_max();
      factor[static_cast<std::size_t>(p)] = upsample_factor(mesh, gap);
    }
    std::vector<std::shared_ptr<const FineLayer>> fine(kMaxUpsample + 1);
    for (int f = 2; f <= kMaxUpsample; ++f)
      if (std::find(factor.begin(), factor.end(), f) != factor.end()) fine[static_cast<std::size_t>(f)] = cache().get(mesh, mu, f);
#pragma omp parallel for schedule(dynamic, 16)
    for (Eigen::Index p = 0; p < points.cols(); ++p) {
      const int f = factor[static_cast<std::size_t>(p)];
      if (f == 1) {
        out(p) = single_layer(mesh, mu, k, points.col(p));
      } else {
        const auto& layer = *fine[static_cast<std::size_t>(f)];
        out(p) = single_layer(*layer.mesh, layer.density, k, points.col(p));
      }
    }
  }
  if (part == FieldPart::Total)
    for (Eigen::Index p = 0; p < points.cols(); ++p) out(p) += sol.wave.incident(points.col(p));
  return out;
}

Eigen::VectorXcd far_field_at(const ScatterSolution& sol, const Eigen::Matrix3Xd& directions) {
  Eigen::VectorXcd out(directions.cols());
  const double k = sol.wave.k;
  if (sol.is_series()) {
    const auto& rep = sol.series();
    for (Eigen::Index p = 0; p < directions.cols(); ++p) {
      const Eigen::Vector3d xhat = directions.col(p).normalized();
      const auto leg = legendre_table(rep.order(), std::clamp(xhat.dot(sol.wave.direction), -1.0, 1.0));
      cplx acc = 0;
      for (int n = 0; n <= rep.order(); ++n) acc += (2.0 * n + 1.0) * rep.coeffs[static_cast<std::size_t>(n)] * leg(n);
      out(p) = acc / cplx(0.0, k);
    }
    return out;
  }
  const auto& mesh = *sol.mesh;
  const Eigen::VectorXcd wmu = mesh.weights().cast<cplx>().cwiseProduct(sol.layer().density);
#pragma omp parallel for schedule(static)
  for (Eigen::Index p = 0; p < directions.cols(); ++p) {
    const Eigen::Vector3d xhat = directions.col(p).normalized();
    cplx acc = 0;
    for (Eigen::Index j = 0; j < mesh.size(); ++j) acc += std::polar(1.0, -k * xhat.dot(mesh.points().col(j))) * wmu(j);
    out(p) = acc / (4.0 * kPi);
  }
  return out;
}

FarFieldPattern eval_far_field(const ScatterSolution& sol, const SphereGrid& grid) {
  return {grid, far_field_at(sol, grid.directions()), 0.0};
}

}  // namespace impedlab
