#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>
#include <set>

#include "impedlab/inverse.hpp"

using namespace impedlab;

namespace {

constexpr double kPi = std::numbers::pi;

struct Fixture {
  WaveConfig wave = WaveConfig::make(1.0, Eigen::Vector3d::UnitZ());
  ScatterSolution sol = sphere_series(wave, 1.0, 1.0);
  SphereGrid grid{24, 48};
  FarFieldPattern far = eval_far_field(sol, grid);
  std::shared_ptr<const BoundaryMesh> mesh =
      std::make_shared<const BoundaryMesh>(build_quadrature(StarSurface::build({}), {}, {16, 32}, 2.0));
};

}  // namespace

TEST_CASE("noise has the requested L2 norm and is reproducible") {
  Fixture f;
  for (double eps : {1e-1, 1e-3}) {
    const auto a = add_noise(f.far, eps, 42), b = add_noise(f.far, eps, 42), c = add_noise(f.far, eps, 43);
    CHECK(l2_sphere_distance(a, f.far) == doctest::Approx(eps).epsilon(1e-12));
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
    CHECK(a.noise_level == eps);
  }
  CHECK(add_noise(f.far, 0.0, 1).values == f.far.values);
  CHECK_THROWS_AS(add_noise(f.far, -1.0, 1), Error);
}

TEST_CASE("stream seeds are distinct and deterministic") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(stream_seed(7, i));
  CHECK(seen.size() == 1000);
  CHECK(stream_seed(7, 3) == stream_seed(7, 3));
  CHECK(stream_seed(7, 3) != stream_seed(8, 3));
}

TEST_CASE("truncation order shrinks with the noise level") {
  CHECK(truncation_order(1.0, 3.0, 0.0, 10) == 10);
  int prev = 10;
  for (double eps : {1e-8, 1e-6, 1e-4, 1e-2, 1e-1}) {
    const int n = truncation_order(1.0, 3.0, eps, 10);
    CHECK(n <= prev);
    // The chosen degree obeys the rule and the next one breaks it.
    const auto b = radial_bundle(n, 3.0);
    CHECK(std::abs(b.h) * eps <= std::sqrt(eps));
    if (n < 10) CHECK(std::abs(radial_bundle(n + 1, 3.0).h) * eps > std::sqrt(eps));
    prev = n;
  }
  CHECK(prev < 10);
}

TEST_CASE("noiseless back-propagation reproduces the scattered field") {
  Fixture f;
  const auto near = far_to_near(f.far, f.wave.k, 3.0, 2.0);
  CHECK(near.order == 10);
  const auto exact = eval_field(f.sol, near.points, FieldPart::Scattered);
  CHECK((near.values - exact).cwiseAbs().maxCoeff() < 1e-10);
  const Eigen::Vector3d x(0.5, -2.0, 2.8);
  CHECK(std::abs(near.scattered(x) - eval_field(f.sol, x, FieldPart::Scattered)(0)) < 1e-10);
  CHECK(near.propagated_error == 0.0);

  // Rounding in the high-degree far-field coefficients is amplified by
  // |h_n(k r1)|, so raising the cap well past 10 makes things worse.
  const auto high = far_to_near(f.far, f.wave.k, 3.0, 2.0, TruncationPolicy{20, -1});
  CHECK((high.values - exact).cwiseAbs().maxCoeff() > 1e3 * (near.values - exact).cwiseAbs().maxCoeff());
}

TEST_CASE("back-propagation needs the radius outside the obstacle") {
  Fixture f;
  CHECK_THROWS_AS(far_to_near(f.far, 1.0, 1.5, 2.0), Error);
  try {
    far_to_near(f.far, 1.0, 2.0, 2.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RadiusInsideObstacle);
  }
}

TEST_CASE("forced truncation order") {
  Fixture f;
  const auto near = far_to_near(add_noise(f.far, 1e-2, 5), 1.0, 3.0, 2.0, TruncationPolicy{10, 4});
  CHECK(near.order == 4);
  CHECK(near.coefficients.size() == sh_count(4));
  CHECK(near.propagated_error > 0);
}

TEST_CASE("Fibonacci directions are unit vectors spread over the sphere") {
  const auto d = fibonacci_directions(500);
  CHECK(d.cols() == 500);
  CHECK((d.colwise().norm().array() - 1.0).abs().maxCoeff() < 1e-14);
  CHECK(d.rowwise().mean().norm() < 1e-2);
}

TEST_CASE("fundamental-solution fit recovers boundary traces from clean data") {
  Fixture f;
  const auto near = far_to_near(f.far, f.wave.k, 3.0, 2.0);
  const auto trace = near_to_boundary(near, f.mesh, f.wave, 0.0);
  const auto exact = attach_mesh(f.sol, f.mesh);
  double eu = 0, ed = 0;
  for (std::size_t i = 0; i < trace.nodes.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    eu = std::max(eu, std::abs(trace.u(e) - exact.u_trace(trace.nodes[i])));
    ed = std::max(ed, std::abs(trace.dnu(e) - exact.dnu_trace(trace.nodes[i])));
  }
  CHECK(eu < 1e-4);
  CHECK(ed < 1e-3);
  CHECK(trace.floor_active);  // clean data: nothing to discrepancy-match
  CHECK(trace.alpha > 0);
}

TEST_CASE("discrepancy principle lands on the target for noisy data") {
  Fixture f;
  const auto near = far_to_near(add_noise(f.far, 1e-2, 11), f.wave.k, 3.0, 2.0);
  const FundamentalSolutionFit fit(f.mesh, f.wave, f.grid, 3.0, 0.0);
  const auto trace = fit.fit(near);
  CHECK_FALSE(trace.floor_active);
  CHECK(trace.residual == doctest::Approx(trace.target).epsilon(1e-3));
  CHECK(trace.target == doctest::Approx(near.propagated_error));
  // The residual curve is non-decreasing in alpha.
  for (std::size_t i = 1; i < trace.residual_curve.size(); ++i)
    if (trace.residual_curve[i].first > trace.residual_curve[i - 1].first)
      CHECK(trace.residual_curve[i].second >= trace.residual_curve[i - 1].second * (1 - 1e-9));
  // Explicit alpha bypasses the search.
  MfsOptions fixed;
  fixed.alpha = 1e-6;
  CHECK(near_to_boundary(near, f.mesh, f.wave, 0.0, fixed).alpha == 1e-6);
}

TEST_CASE("impedance recovery from exact traces") {
  Fixture f;
  const auto exact = attach_mesh(f.sol, f.mesh);
  BoundaryTrace trace;
  trace.mesh = f.mesh;
  for (Eigen::Index i = 0; i < f.mesh->size(); ++i) trace.nodes.push_back(i);
  trace.u = exact.u_trace;
  trace.dnu = exact.dnu_trace;
  const auto rec = recover_impedance(trace, 1e-3);
  CHECK(rec.trusted_count() == f.mesh->size());
  CHECK(impedance_error(ImpedanceField::constant(1.0), rec, ErrorNorm::Sup) < 1e-10);
  CHECK(impedance_error(ImpedanceField::constant(1.0), rec, ErrorNorm::L2) < 1e-9);
  CHECK(rec.max_imag < 1e-10);
  CHECK(impedance_error(ImpedanceField::constant(1.5), rec, ErrorNorm::Sup) == doctest::Approx(0.5));

  CHECK_THROWS_AS(recover_impedance(trace, 1e6), Error);
  const auto masked = recover_impedance(trace, exact.u_trace.cwiseAbs().maxCoeff() * 0.999);
  CHECK(masked.trusted_count() >= 1);
  CHECK(masked.trusted_count() < f.mesh->size());
  for (std::size_t i = 0; i < masked.trusted.size(); ++i)
    if (!masked.trusted[i]) CHECK(std::isnan(masked.lambda_hat(static_cast<Eigen::Index>(i))));
}

TEST_CASE("restricting to Gamma_I^rho on a cap mesh") {
  const WaveConfig wave = WaveConfig::make(1.0, Eigen::Vector3d::UnitZ());
  const auto mesh = std::make_shared<const BoundaryMesh>(
      build_quadrature(StarSurface::build({}), CoatingPartition::polar_cap(kPi / 4), {16, 32}, 2.0));
  const FundamentalSolutionFit fit(mesh, wave, SphereGrid(24, 48), 3.0, 0.3);
  for (auto i : fit.nodes()) CHECK(mesh->distance_to_dirichlet(i) > 0.3);
  CHECK_THROWS_AS(FundamentalSolutionFit(mesh, wave, SphereGrid(24, 48), 3.0, 4.0), Error);
}

TEST_CASE("clean far field to impedance on a 16 x 32 mesh") {
  Fixture f;
  const auto near = far_to_near(f.far, f.wave.k, 3.0, 2.0);
  const auto trace = near_to_boundary(near, f.mesh, f.wave, 0.0);
  const auto rec = recover_impedance(trace, default_trust_threshold(trace));
  CHECK(rec.trusted_count() == f.mesh->size());
  CHECK(impedance_error(ImpedanceField::constant(1.0), rec, ErrorNorm::Sup) < 1e-2);
}
