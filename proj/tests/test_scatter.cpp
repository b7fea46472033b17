#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>

#include "impedlab/inverse.hpp"
#include "impedlab/scatter.hpp"

using namespace impedlab;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const BoundaryMesh> sphere_mesh(int nt, CoatingPartition partition = {}, double radius = 1.0) {
  SurfaceDescriptor d;
  d.base_radius = radius;
  return std::make_shared<const BoundaryMesh>(build_quadrature(StarSurface::build(d), partition, {nt, 2 * nt}, 2.0));
}

double relative_far_error(const ScatterSolution& a, const ScatterSolution& ref) {
  const SphereGrid grid(16, 32);
  const auto fa = eval_far_field(a, grid), fr = eval_far_field(ref, grid);
  return l2_sphere_distance(fa, fr) / l2_sphere_norm(fr);
}

}  // namespace

TEST_CASE("sphere series satisfies the impedance condition") {
  const WaveConfig wave = WaveConfig::make(1.0, Eigen::Vector3d(0.3, -0.2, 1.0));
  for (double lambda : {0.5, 1.0, 3.0}) {
    const auto sol = sphere_series(wave, 1.0, lambda);
    const Eigen::Matrix3Xd dirs = fibonacci_directions(1000);
    const auto t = series_boundary_traces(sol, dirs);
    const double residual = (t.dnu + cplx(0, lambda) * t.u).cwiseAbs().maxCoeff();
    CHECK(residual < 1e-10);
  }
}

TEST_CASE("sound-soft and sound-hard limits") {
  const WaveConfig wave = WaveConfig::make(2.0, Eigen::Vector3d::UnitZ());
  const Eigen::Matrix3Xd dirs = fibonacci_directions(200);
  const auto soft = series_boundary_traces(sphere_series(wave, 1.0, 0.0, SphereBoundary::SoundSoft), dirs);
  CHECK(soft.u.cwiseAbs().maxCoeff() < 1e-12);
  const auto hard = series_boundary_traces(sphere_series(wave, 1.0, 0.0, SphereBoundary::SoundHard), dirs);
  CHECK(hard.dnu.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("series truncation cap is enforced") {
  const WaveConfig wave = WaveConfig::make(30.0, Eigen::Vector3d::UnitZ());
  CHECK_THROWS_AS(sphere_series(wave, 1.0, 1.0, SphereBoundary::Impedance, 20), Error);
}

TEST_CASE("series far field is the limit of r e^{-ikr} u^s") {
  const WaveConfig wave = WaveConfig::make(1.5, Eigen::Vector3d::UnitZ());
  const auto sol = sphere_series(wave, 1.0, 1.0);
  const Eigen::Vector3d xhat = direction(1.1, 0.4);
  const Eigen::Matrix3Xd dir = xhat;
  const cplx far = far_field_at(sol, dir)(0);
  const double r = 4000.0;
  const Eigen::Matrix3Xd x = r * xhat;
  const cplx near = eval_field(sol, x, FieldPart::Scattered)(0) * r * std::polar(1.0, -wave.k * r);
  CHECK(std::abs(near - far) < 1e-3 * std::abs(far));
}

TEST_CASE("layer operators on the sphere act diagonally on spherical harmonics") {
  const double k = 1.3;
  const auto mesh = sphere_mesh(16);
  for (auto [n, m] : {std::pair{0, 0}, std::pair{2, 1}, std::pair{4, -3}}) {
    Eigen::VectorXcd y(mesh->size());
    for (Eigen::Index i = 0; i < mesh->size(); ++i) y(i) = sph_harm(n, m, mesh->node_theta(i), mesh->node_phi(i));
    const auto b = radial_bundle(n, k);
    const cplx s_eig = cplx(0, k) * b.j * b.h;
    const cplx k_eig = cplx(0, k * k) * b.j * b.dh + 0.5;
    for (auto [t, p] : {std::pair{0.4, 0.3}, std::pair{1.7, 2.2}, std::pair{2.9, 5.0}}) {
      const auto v = layer_operators_at(*mesh, k, y, t, p);
      const cplx yv = sph_harm(n, m, t, p);
      CHECK(std::abs(v.single_layer - s_eig * yv) < 1e-8);
      CHECK(std::abs(v.adjoint_double_layer - k_eig * yv) < 1e-8);
    }
  }
}

TEST_CASE("direct BIE matches the series on a fully coated sphere") {
  const WaveConfig wave = WaveConfig::make(1.0, Eigen::Vector3d::UnitZ());
  const auto ref = sphere_series(wave, 1.0, 1.0);
  const auto mesh = sphere_mesh(16);
  const auto bie = solve_direct_bie(mesh, wave, ImpedanceField::constant(1.0));
  CHECK(relative_far_error(bie, ref) < 1e-6);
  const auto traced = attach_mesh(ref, mesh);
  CHECK((bie.u_trace - traced.u_trace).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((bie.dnu_trace - traced.dnu_trace).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(bie.residual.impedance_max < 1e-5);

  // Off-surface field agrees too, including points close to the boundary.
  Eigen::Matrix3Xd pts(3, 4);
  pts << 1.05, 0.0, 0.0, 2.0,  //
      0.0, 0.0, 1.5, 0.5,      //
      0.0, 1.05, 0.3, -1.0;
  const auto u_bie = eval_field(bie, pts), u_ref = eval_field(ref, pts);
  CHECK((u_bie - u_ref).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("BIE error decreases under refinement") {
  const WaveConfig wave = WaveConfig::make(1.0, Eigen::Vector3d::UnitX());
  const auto ref = sphere_series(wave, 1.0, 1.0);
  double prev = 1;
  for (int nt : {8, 12, 16}) {
    const double e = relative_far_error(solve_direct_bie(sphere_mesh(nt), wave, ImpedanceField::constant(1.0)), ref);
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("BIE on a perturbed sphere with a variable impedance converges") {
  SurfaceDescriptor d;
  d.harmonics = {{2, 0, 0.1}};
  const StarSurface s = StarSurface::build(d);
  const WaveConfig wave = WaveConfig::make(1.0, Eigen::Vector3d(1, 0, 1));
  const ImpedanceField lambda(ImpedanceField::Model::Bump, {1.0, 0.5, 1.0, 0.0, 0.5}, 0.5, 10.0);
  auto solve = [&](int nt) {
    return solve_direct_bie(std::make_shared<const BoundaryMesh>(build_quadrature(s, {}, {nt, 2 * nt}, 2.0)), wave,
                            lambda);
  };
  const auto a = solve(12), b = solve(16), c = solve(20);
  CHECK(relative_far_error(b, c) < relative_far_error(a, c));
  CHECK(relative_far_error(b, c) < 1e-4);
  CHECK(c.residual.impedance_max < 1e-3);
}

TEST_CASE("mixed problem on a hemisphere cap has small boundary residuals") {
  const WaveConfig wave = WaveConfig::make(1.0, Eigen::Vector3d(0, 0, -1));
  const auto mesh = sphere_mesh(16, CoatingPartition::polar_cap(kPi / 2));
  const auto sol = solve_direct_bie(mesh, wave, ImpedanceField::constant(1.0));
  CHECK(sol.residual.dirichlet_points > 0);
  CHECK(sol.residual.impedance_points > 0);
  CHECK(sol.residual.dirichlet_max < 1e-2);
  CHECK(sol.residual.impedance_max < 1e-2);
  // The Dirichlet nodes carry u = 0.
  for (Eigen::Index i = 0; i < mesh->size(); ++i)
    if (!mesh->on_impedance(i)) CHECK(std::abs(sol.u_trace(i)) < 1e-10);
}

TEST_CASE("polar cap far field converges under refinement") {
  const WaveConfig wave = WaveConfig::make(2.0, Eigen::Vector3d(0, 0, -1));
  const auto cap = CoatingPartition::polar_cap(kPi / 4);
  auto solve = [&](int nt) { return solve_direct_bie(sphere_mesh(nt, cap), wave, ImpedanceField::constant(1.0)); };
  const auto a = solve(16), b = solve(20), c = solve(28);
  CHECK(relative_far_error(b, c) < relative_far_error(a, c));
  CHECK(relative_far_error(b, c) < 1e-2);
}

TEST_CASE("evaluation inside the obstacle is refused") {
  const WaveConfig wave = WaveConfig::make(1.0, Eigen::Vector3d::UnitZ());
  const auto sol = sphere_series(wave, 1.0, 1.0);
  const Eigen::Matrix3Xd inside = Eigen::Vector3d(0.1, 0.2, 0.3);
  CHECK_THROWS_AS(eval_field(sol, inside), Error);
  try {
    eval_field(sol, inside);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PointInsideObstacle);
  }
}

TEST_CASE("attach_mesh requires the series sphere") {
  const WaveConfig wave = WaveConfig::make(1.0, Eigen::Vector3d::UnitZ());
  const auto sol = sphere_series(wave, 1.0, 1.0);
  CHECK_THROWS_AS(attach_mesh(sol, sphere_mesh(8, {}, 2.0)), Error);
  const auto ok = attach_mesh(sol, sphere_mesh(8));
  CHECK(ok.u_trace.size() == ok.mesh->size());
  CHECK(ok.lambda_nodes.cwiseAbs().maxCoeff() == 1.0);
}

TEST_CASE("far-field grid norms") {
  const SphereGrid grid(10, 20);
  CHECK(grid.weights().sum() == doctest::Approx(4 * kPi));
  FarFieldPattern a{grid, Eigen::VectorXcd::Constant(grid.size(), cplx(0, 2)), 0};
  CHECK(l2_sphere_norm(a) == doctest::Approx(2 * std::sqrt(4 * kPi)));
  FarFieldPattern b{SphereGrid(12, 24), Eigen::VectorXcd::Zero(12 * 24), 0};
  CHECK_THROWS_AS(l2_sphere_distance(a, b), Error);
}
