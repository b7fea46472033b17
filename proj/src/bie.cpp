#include <cmath>
#include <numbers>
#include <vector>

#include "impedlab/scatter.hpp"

namespace impedlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPoleGuard = 1e-9;
// local patch radius in units of the coarsest node spacing
constexpr double kLocalSpacings = 5.0;
constexpr int kMinLocalNodes = 16;

using RowMatrixXcd = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Polar coordinates (theta', phi') around the target: trapezoid in phi',
// Gauss-Legendre in theta' on [0, cutoff]. On polar cap meshes each ray is
// split where it crosses the coating interface and the pieces are graded
// toward the crossings, where the density blows up like d^(-1/2). Weights
// include the partition-of-unity factor eta(theta'); beyond the cutoff the
// mesh's own quadrature takes over with weight 1 - eta.
struct PolarRule {
  int n_theta = 0, n_phi = 0;
  double cutoff = std::numbers::pi;
  std::vector<GaussRule<double>> gauss;  // gauss[n] has n nodes on [0, 1]
  Eigen::VectorXd cp, sp;

  bool global() const { return cutoff >= std::numbers::pi; }
  int max_columns() const { return n_phi * (n_theta + 3 * kMinSegmentNodes); }

  static constexpr int kMinSegmentNodes = 8;
};

// Smooth bump, 1 at s = 0 and 0 for s >= 1, flat to all orders at both ends.
double partition_eta(double s) {
  if (s <= 0) return 1.0;
  if (s >= 1) return 0.0;
  return std::exp(2.0 * std::exp(-1.0 / s) / (s - 1.0));
}

double auto_cutoff(const BoundaryMesh& mesh) {
  if (mesh.partition().kind == CoatingPartition::Kind::FullyImpedance) return kPi;
  const auto& th = mesh.theta_nodes();
  double h = 2.0 * kPi / mesh.n_phi();
  for (Eigen::Index a = 0; a + 1 < th.size(); ++a) h = std::max(h, th(a + 1) - th(a));
  return std::min(kPi, kLocalSpacings * h);
}

PolarRule polar_rule(const BoundaryMesh& mesh, double refinement, double cutoff) {
  require(refinement >= 1.0, ErrorCode::ArgumentOutOfRange, "polar refinement must be >= 1");
  PolarRule r;
  r.cutoff = cutoff > 0 ? std::min(cutoff, kPi) : auto_cutoff(mesh);
  r.n_theta = std::max(kMinLocalNodes,
                       static_cast<int>(std::ceil(refinement * mesh.n_theta() * r.cutoff / kPi)));
  r.n_phi = static_cast<int>(std::ceil(refinement * mesh.n_phi()));
  r.gauss.resize(static_cast<std::size_t>(r.n_theta) + 1);
  for (int n = 1; n <= r.n_theta; ++n) {
    auto g = gauss_legendre<double>(n);
    g.nodes = 0.5 * (g.nodes.array() + 1.0);
    g.weights *= 0.5;
    r.gauss[static_cast<std::size_t>(n)] = std::move(g);
  }
  r.cp.resize(r.n_phi);
  r.sp.resize(r.n_phi);
  for (int q = 0; q < r.n_phi; ++q) {
    r.cp(q) = std::cos(2.0 * kPi * q / r.n_phi);
    r.sp(q) = std::sin(2.0 * kPi * q / r.n_phi);
  }
  return r;
}

struct RowWorkspace {
  Eigen::MatrixXd stacked;   // 4 n_theta x columns
  Eigen::MatrixXd cardinal;  // columns x n_phi
  Eigen::MatrixXd product;   // 4 n_theta x n_phi
  Eigen::VectorXd lagrange;
  Eigen::VectorXcd half_phase;

  RowWorkspace(const BoundaryMesh& mesh, const PolarRule& rule)
      : stacked(4 * mesh.n_theta(), rule.max_columns()),
        cardinal(rule.max_columns(), mesh.n_phi()),
        lagrange(mesh.max_panel_size()),
        half_phase(mesh.n_phi()) {
    for (int b = 0; b < mesh.n_phi(); ++b) half_phase(b) = std::polar(1.0, -0.5 * mesh.phi_nodes()(b));
  }
};

int panel_count(const BoundaryMesh& mesh, int first) {
  for (const auto& p : mesh.panels())
    if (p.first == first) return p.count;
  return 0;
}

// Polar angles in (0, cutoff) where the great circle cos(t) x + sin(t) e
// meets the cone theta = cap_angle, ascending.
int interface_crossings(const Eigen::Vector3d& x, const Eigen::Vector3d& e, double cap_angle, double cutoff,
                        double* out) {
  const double a = x.z(), b = e.z(), c = std::cos(cap_angle);
  const double rr = std::hypot(a, b);
  if (rr == 0 || std::abs(c) >= rr) return 0;
  const double delta = std::atan2(b, a), spread = std::acos(c / rr);
  int n = 0;
  for (double t : {delta - spread, delta + spread}) {
    t = std::remainder(t, 2.0 * kPi);
    if (t < 0) t += 2.0 * kPi;
    if (t > 1e-12 && t < cutoff) out[n++] = t;
  }
  if (n == 2 && out[0] > out[1]) std::swap(out[0], out[1]);
  return n;
}

// Rows of S and K' (node-major, length mesh.size()) for a target at surface
// angles (theta0, phi0) with point x and normal nu.
void operator_rows(const BoundaryMesh& mesh, double k, const PolarRule& rule, double theta0, double phi0,
                   const Eigen::Vector3d& x, const Eigen::Vector3d& nu, RowWorkspace& ws, cplx* srow,
                   cplx* krow) {
  const int nt = mesh.n_theta(), np = mesh.n_phi();
  const auto& surface = mesh.surface();
  const bool sphere = surface.is_sphere();
  const bool cap = mesh.partition().kind == CoatingPartition::Kind::PolarCap;
  const double r0 = surface.descriptor().base_radius;
  const Eigen::Matrix3d f = frame_around(direction(theta0, phi0));
  const Eigen::Vector3d axis = f.col(2);
  const cplx ik(0.0, k);
  const bool even = np % 2 == 0;
  const double dphi = 2.0 * kPi / rule.n_phi;

  ws.stacked.setZero();
  int col = 0;
  auto add_point = [&](const Eigen::Vector3d& w, double weight) {
    const auto [theta, phi] = angles_of(w);
    double r = r0, jac = r0 * r0;
    if (!sphere) {
      const double t = std::clamp(theta, kPoleGuard, kPi - kPoleGuard);
      const auto rs = surface.radius_sample(t, phi);
      const double g = rs.dphi / std::sin(t);
      r = rs.r;
      jac = r * std::sqrt(r * r + rs.dtheta * rs.dtheta + g * g);
    }
    const Eigen::Vector3d diff = x - r * w;
    const double d = diff.norm();
    const cplx e = std::polar(1.0, k * d) / (4.0 * kPi * d);
    const double wq = weight * jac;
    const cplx wg = wq * e;
    const cplx wk = wq * e * (ik * d - 1.0) * diff.dot(nu) / (d * d);

    const int first = mesh.theta_interpolation(theta, ws.lagrange.data());
    const int count = panel_count(mesh, first);
    for (int a = 0; a < count; ++a) {
      const double l = ws.lagrange(a);
      ws.stacked(first + a, col) = l * wg.real();
      ws.stacked(nt + first + a, col) = l * wg.imag();
      ws.stacked(2 * nt + first + a, col) = l * wk.real();
      ws.stacked(3 * nt + first + a, col) = l * wk.imag();
    }

    // trigonometric cardinals at phi - phi_b, using phi_b = 2 pi b / n_phi
    const double s = std::sin(0.5 * np * phi);
    const cplx h = std::polar(1.0, 0.5 * phi);
    for (int b = 0; b < np; ++b) {
      const cplx e2 = h * ws.half_phase(b);
      const double sd = e2.imag();
      double c;
      if (std::abs(sd) < 1e-14) {
        c = 1.0;
      } else {
        c = (b % 2 == 0 ? s : -s) / (np * sd);
        if (even) c *= e2.real();
      }
      ws.cardinal(col, b) = c;
    }
    ++col;
  };

  double ends[4];
  for (int q = 0; q < rule.n_phi; ++q) {
    const Eigen::Vector3d e = rule.cp(q) * f.col(0) + rule.sp(q) * f.col(1);
    int n_ends = 0;
    ends[n_ends++] = 0.0;
    if (cap) n_ends += interface_crossings(axis, e, mesh.partition().cap_angle, rule.cutoff, ends + 1);
    ends[n_ends++] = rule.cutoff;
    for (int seg = 0; seg + 1 < n_ends; ++seg) {
      const double lo = ends[seg], hi = ends[seg + 1];
      const bool grade_lo = seg > 0, grade_hi = seg + 2 < n_ends;
      const int n = std::clamp(static_cast<int>(std::ceil(rule.n_theta * (hi - lo) / rule.cutoff)),
                               PolarRule::kMinSegmentNodes, rule.n_theta);
      const auto& g = rule.gauss[static_cast<std::size_t>(n)];
      for (int p = 0; p < n; ++p) {
        // s^2, 1 - (1 - s)^2 or s^2 (3 - 2 s) toward graded ends
        const double u = g.nodes(p);
        double m = u, dm = 1.0;
        if (grade_lo && grade_hi) {
          m = u * u * (3.0 - 2.0 * u);
          dm = 6.0 * u * (1.0 - u);
        } else if (grade_lo) {
          m = u * u;
          dm = 2.0 * u;
        } else if (grade_hi) {
          m = 1.0 - (1.0 - u) * (1.0 - u);
          dm = 2.0 * (1.0 - u);
        }
        const double t = lo + (hi - lo) * m;
        const double eta = rule.global() ? 1.0 : partition_eta(t / rule.cutoff);
        const double weight = g.weights(p) * (hi - lo) * dm * std::sin(t) * dphi * eta;
        add_point(std::cos(t) * axis + std::sin(t) * e, weight);
      }
    }
  }

  ws.product.noalias() = ws.stacked.leftCols(col) * ws.cardinal.topRows(col);
  for (int a = 0; a < nt; ++a)
    for (int b = 0; b < np; ++b) {
      const int i = a * np + b;
      srow[i] = cplx(ws.product(a, b), ws.product(nt + a, b));
      krow[i] = cplx(ws.product(2 * nt + a, b), ws.product(3 * nt + a, b));
    }
  if (rule.global()) return;

  for (Eigen::Index j = 0; j < mesh.size(); ++j) {
    const Eigen::Vector3d y = mesh.points().col(j);
    const double angle = std::acos(std::clamp(axis.dot(y) / y.norm(), -1.0, 1.0));
    const double w = mesh.weights()(j) * (1.0 - partition_eta(angle / rule.cutoff));
    if (w == 0) continue;
    const Eigen::Vector3d diff = x - y;
    const double d = diff.norm();
    const cplx e = std::polar(1.0, k * d) / (4.0 * kPi * d);
    srow[j] += w * e;
    krow[j] += w * e * (ik * d - 1.0) * diff.dot(nu) / (d * d);
  }
}

struct Checkpoint {
  double theta, phi;
};

std::vector<Checkpoint> checkpoints(const BoundaryMesh& mesh, const BieOptions& options) {
  std::vector<Checkpoint> all;
  const auto& th = mesh.theta_nodes();
  const auto& part = mesh.partition();
  for (const auto& panel : mesh.panels())
    for (int a = panel.first; a + 1 < panel.first + panel.count; ++a) {
      const double t = 0.5 * (th(a) + th(a + 1));
      if (part.kind == CoatingPartition::Kind::PolarCap && std::abs(t - part.cap_angle) < options.interface_band)
        continue;
      for (int b = 0; b < mesh.n_phi(); ++b) all.push_back({t, mesh.phi_nodes()(b) + kPi / mesh.n_phi()});
    }
  if (static_cast<int>(all.size()) <= options.max_checkpoints) return all;
  std::vector<Checkpoint> out;
  const std::size_t count = static_cast<std::size_t>(options.max_checkpoints);
  for (std::size_t j = 0; j < count; ++j) out.push_back(all[(j * all.size()) / count]);
  return out;
}

}  // namespace

ScatterSolution solve_direct_bie(std::shared_ptr<const BoundaryMesh> mesh, const WaveConfig& wave,
                                 const ImpedanceField& lambda, const BieOptions& options) {
  require(mesh != nullptr, ErrorCode::ArgumentOutOfRange, "solve_direct_bie needs a mesh");
  lambda.validate(*mesh);
  const Eigen::Index n = mesh->size();
  const double k = wave.k;
  const PolarRule rule = polar_rule(*mesh, options.polar_refinement, options.local_cutoff);

  RowMatrixXcd s(n, n), kp(n, n);
#pragma omp parallel
  {
    RowWorkspace ws(*mesh, rule);
#pragma omp for schedule(dynamic, 4)
    for (Eigen::Index i = 0; i < n; ++i)
      operator_rows(*mesh, k, rule, mesh->node_theta(i), mesh->node_phi(i), mesh->points().col(i),
                    mesh->normals().col(i), ws, s.row(i).data(), kp.row(i).data());
  }

  const Eigen::VectorXd lam = lambda.on_nodes(*mesh);
  const cplx i1(0.0, 1.0);
  Eigen::MatrixXcd a(n, n);
  Eigen::VectorXcd rhs(n), uinc(n), dinc(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d x = mesh->points().col(i);
    uinc(i) = wave.incident(x);
    dinc(i) = wave.incident_normal_derivative(x, mesh->normals().col(i));
    if (mesh->on_impedance(i)) {
      a.row(i) = kp.row(i) + i1 * lam(i) * s.row(i);
      a(i, i) -= 0.5;
      rhs(i) = -(dinc(i) + i1 * lam(i) * uinc(i));
    } else {
      a.row(i) = s.row(i);
      rhs(i) = -uinc(i);
    }
  }

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  const double rcond = lu.rcond();
  require(rcond >= options.rcond_floor, ErrorCode::SingularSystem,
          "collocation matrix is numerically singular (rcond " + std::to_string(rcond) + ")");
  const Eigen::VectorXcd mu = lu.solve(rhs);

  ScatterSolution sol;
  sol.wave = wave;
  sol.representation = LayerRepresentation{mu};
  sol.mesh = mesh;
  sol.u_trace = s * mu + uinc;
  sol.dnu_trace = -0.5 * mu + kp * mu + dinc;
  sol.lambda_nodes = lam;
  sol.rcond = rcond;

  CheckpointResidual res;
  res.scale = k + (lam.size() ? lam.maxCoeff() : 0.0);
  if (options.check_residual) {
    const auto pts = checkpoints(*mesh, options);
    std::vector<double> value(pts.size());
    std::vector<char> dirichlet(pts.size());
#pragma omp parallel
    {
      RowWorkspace ws(*mesh, rule);
      Eigen::VectorXcd srow(n), krow(n);
#pragma omp for schedule(dynamic, 4)
      for (std::size_t j = 0; j < pts.size(); ++j) {
        const auto fr = mesh->surface().frame(pts[j].theta, pts[j].phi);
        operator_rows(*mesh, k, rule, pts[j].theta, pts[j].phi, fr.point, fr.normal, ws, srow.data(), krow.data());
        const cplx u = srow.cwiseProduct(mu).sum() + wave.incident(fr.point);
        dirichlet[j] = mesh->partition().is_dirichlet(pts[j].theta);
        if (dirichlet[j]) {
          value[j] = std::abs(u);
        } else {
          const cplx mux = mesh->interpolate(mu, pts[j].theta, pts[j].phi);
          const cplx dnu =
              -0.5 * mux + krow.cwiseProduct(mu).sum() + wave.incident_normal_derivative(fr.point, fr.normal);
          value[j] = std::abs(dnu + i1 * lambda(pts[j].theta, pts[j].phi) * u) / res.scale;
        }
      }
    }
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (dirichlet[j]) {
        ++res.dirichlet_points;
        res.dirichlet_max = std::max(res.dirichlet_max, value[j]);
      } else {
        ++res.impedance_points;
        res.impedance_max = std::max(res.impedance_max, value[j]);
      }
    }
    sol.residual = res;
    const double worst = std::max(res.dirichlet_max, res.impedance_max);
    require(worst <= options.checkpoint_tolerance, ErrorCode::ResolutionTooCoarse,
            "boundary-condition residual " + std::to_string(worst) + " at checkpoints exceeds tolerance " +
                std::to_string(options.checkpoint_tolerance) + "; refine the mesh");
  }
  sol.residual = res;
  return sol;
}

SurfaceOperatorValues layer_operators_at(const BoundaryMesh& mesh, double k, const Eigen::VectorXcd& density,
                                         double theta, double phi, double polar_refinement, double local_cutoff) {
  require(density.size() == mesh.size(), ErrorCode::GridMismatch, "density does not match the mesh");
  const PolarRule rule = polar_rule(mesh, polar_refinement, local_cutoff);
  RowWorkspace ws(mesh, rule);
  Eigen::VectorXcd srow(mesh.size()), krow(mesh.size());
  const auto fr = mesh.surface().frame(theta, phi);
  operator_rows(mesh, k, rule, theta, phi, fr.point, fr.normal, ws, srow.data(), krow.data());
  return {srow.cwiseProduct(density).sum(), krow.cwiseProduct(density).sum(), mesh.interpolate(density, theta, phi)};
}

}  // namespace impedlab
