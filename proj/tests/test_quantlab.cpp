#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>

#include "impedlab/quantlab.hpp"

using namespace impedlab;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kE = std::numbers::e;

std::vector<StabilityRecord> synthetic(double c, double theta) {
  std::vector<StabilityRecord> out;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6}) {
    const auto m = stability_modulus(eps, c, theta);
    out.push_back({eps, m.eta});
  }
  return out;
}

}  // namespace

TEST_CASE("alpha at the ends of its range") {
  CHECK(stability_modulus(1 - 1e-12, 1, 1).alpha == doctest::Approx(0.5).epsilon(1e-9));
  // log(1/t) + e = e^2 gives alpha = 1/3.
  const double t = std::exp(-(kE * kE - kE));
  CHECK(std::abs(stability_modulus(t, 1, 1).alpha - 1.0 / 3.0) < 1e-12);
  CHECK_THROWS_AS(stability_modulus(0.0, 1, 1), Error);
  CHECK_THROWS_AS(stability_modulus(1.0, 1, 1), Error);
  CHECK_THROWS_AS(stability_modulus(0.5, 1, 0), Error);
}

TEST_CASE("alpha and eta increase with t") {
  double pa = 0, pe = 0;
  for (double t = 1e-12; t < 0.99; t *= 3) {
    const auto m = stability_modulus(t, 1.3, 0.7);
    CHECK(m.alpha > pa);
    CHECK(m.eta > pe);
    pa = m.alpha;
    pe = m.eta;
  }
}

TEST_CASE("stability fit recovers synthetic constants") {
  for (auto [c, theta] : {std::pair{1.0, 0.5}, std::pair{2.0, 1.0}}) {
    const auto fit = fit_stability(synthetic(c, theta));
    CHECK(fit.c == doctest::Approx(c).epsilon(1e-6));
    CHECK(fit.theta == doctest::Approx(theta).epsilon(1e-6));
    CHECK(fit.residual < 1e-10);
    CHECK_FALSE(fit.non_decaying);
  }
  std::vector<StabilityRecord> flat;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) flat.push_back({eps, 0.3});
  const auto f = fit_stability(flat);
  CHECK(f.non_decaying);
  CHECK(f.c == doctest::Approx(0.3));
}

TEST_CASE("stability fit needs enough usable data") {
  CHECK_THROWS_AS(fit_stability({{1e-1, 1}, {1e-2, 1}, {1e-3, 1}}), Error);
  CHECK_THROWS_AS(fit_stability({{1e-1, 1}, {1e-2, 1}, {1e-3, 1}, {1e-3, 2}}), Error);
  CHECK_THROWS_AS(fit_stability({{1e-1, 1}, {1e-2, 1}, {1e-3, 1}, {2.0, 1}}), Error);
  CHECK_THROWS_AS(fit_stability({{1e-1, 1}, {1e-2, 1}, {1e-3, 1}, {1e-4, 0}}), Error);
  try {
    fit_stability({});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientData);
  }
}

TEST_CASE("power-law fit") {
  std::vector<StabilityRecord> r;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) r.push_back({eps, 3 * std::pow(eps, 0.25)});
  const auto p = fit_power_law(r);
  CHECK(p.c == doctest::Approx(3));
  CHECK(p.exponent == doctest::Approx(0.25));
  CHECK(p.residual < 1e-12);
}

TEST_CASE("psi0 solves the half-space problem in all three regimes") {
  for (auto [k, lambda, which] :
       {std::tuple{1.0, 2.0, Psi0Case::Below}, std::tuple{1.0, 1.0, Psi0Case::Equal},
        std::tuple{2.0, 1.0, Psi0Case::Above}}) {
    CHECK(psi0_case(k, lambda) == which);
    const double r = psi0_radius(k, lambda);
    const auto pts = lower_half_ball_points(r, 1000);
    CHECK(pts.cols() > 0);
    CHECK((pts.row(2).array() <= 0).all());
    const auto rep = psi0_residual(k, lambda, pts);
    CHECK(rep.pde_residual < 1e-12);
    CHECK(rep.bc_residual < 1e-12);
    CHECK(rep.fd_gradient < 1e-6);
    CHECK(rep.fd_pde_residual < 1e-4);
    CHECK(rep.fd_bc_residual < 1e-6);
    CHECK(rep.min_abs >= 2.0);
  }
  CHECK(psi0_radius(1.0, 1.0) == doctest::Approx(kPi / 4));
  CHECK(psi0_radius(2.0, 1.0) == doctest::Approx(kPi / 4 / std::sqrt(3.0)));
}

TEST_CASE("psi0 refuses points outside its domain") {
  Eigen::Matrix3Xd up(3, 1);
  up << 0, 0, 0.1;
  CHECK_THROWS_AS(psi0_residual(1, 2, up), Error);
  Eigen::Matrix3Xd far(3, 1);
  far << 0, 0, -1;
  CHECK_THROWS_AS(psi0_residual(1, 2, far), Error);
}

TEST_CASE("constant field: doubling ratios equal the volume and area ratios") {
  const auto s = StarSurface::build({});
  const auto field = constant_field(cplx(2, 1), s);
  const std::vector<PatchCenter> centers = {{0.7, 0.2}};

  const auto vd = check_volume_doubling(field, s, {}, centers, {0.05}, {1.5, 2.0, 3.0});
  for (const auto& row : vd.rows) {
    // Near a flat boundary the patch is a half-ball.
    CHECK(row.ratio == doctest::Approx(std::pow(row.beta, 3)).epsilon(0.05));
  }
  CHECK(vd.k_max == doctest::Approx(3).epsilon(0.05));
  CHECK(vd.all_at_least_one());

  const auto sd = check_surface_doubling(field, s, {}, centers, {0.05, 0.1});
  for (const auto& row : sd.rows) CHECK(row.ratio == doctest::Approx(4).epsilon(1e-6));
  CHECK(sd.c_max == doctest::Approx(4).epsilon(1e-6));

  const auto ap = check_reverse_holder_ap(field, s, {}, centers, {0.1}, {1.5, 2.0, 3.0});
  for (const auto& row : ap.rows) {
    CHECK(row.product == doctest::Approx(1));
    CHECK(row.reverse_holder == doctest::Approx(1));
    CHECK(row.masked_fraction == 0);
  }
  CHECK(ap.smallest_bounded_p == 1.5);
}

TEST_CASE("A_p reports unbounded products where u vanishes") {
  const auto s = StarSurface::build({});
  const auto field = constant_field(0.0, s);
  const auto ap = check_reverse_holder_ap(field, s, {}, {{0.7, 0.2}}, {0.1}, {2.0});
  CHECK(std::isnan(ap.smallest_bounded_p));
  CHECK(ap.rows[0].masked_fraction == doctest::Approx(1.0));
}

TEST_CASE("three spheres on a constant field has no defect") {
  const auto s = StarSurface::build({});
  const auto field = constant_field(1.0, s);
  const auto rep = check_three_spheres(field, {Eigen::Vector3d(0, 0, 2)}, 0.2, 1.5, 2.0, 4000);
  REQUIRE(rep.rows.size() == 1);
  const auto& row = rep.rows[0];
  // Masses scale like r^3, which is log-linear, so the interpolation is exact.
  CHECK(std::abs(row.defect) < 1e-9 * row.mass_outer);
  CHECK(rep.tau_in_unit_interval());
  CHECK_THROWS_AS(check_three_spheres(field, {Eigen::Vector3d(0, 0, 2)}, 0.2, 2.0, 2.0), Error);
  CHECK_THROWS_AS(check_three_spheres(field, {Eigen::Vector3d(0, 0, 1.2)}, 0.2, 1.5, 2.0), Error);
}

TEST_CASE("lower bound on a plane wave") {
  const auto wave = WaveConfig::make(1.0, Eigen::Vector3d::UnitZ());
  auto field = incident_field(wave);
  field.diameter = 2.0;
  const auto rep = check_lower_bound(field, {8, 4, 16}, 200);
  CHECK(rep.radii == std::vector<double>{4, 8, 16});
  for (double m : rep.min_abs_u) CHECK(m == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.r0_hat == 4);
  CHECK_THROWS_AS(check_lower_bound(field, {2.0, 4.0}, 200), Error);
}

TEST_CASE("checks are invariant under scaling the field") {
  const auto wave = WaveConfig::make(1.0, Eigen::Vector3d::UnitZ());
  const auto sol = sphere_series(wave, 1.0, 1.0);
  const auto s = StarSurface::build({});
  const std::vector<PatchCenter> centers = {{1.1, 0.4}};
  const auto a = solution_field(sol), b = solution_field(sol, cplx(0, 3.7));
  const auto va = check_volume_doubling(a, s, {}, centers, {0.1}, {2.0});
  const auto vb = check_volume_doubling(b, s, {}, centers, {0.1}, {2.0});
  CHECK(va.rows[0].ratio == doctest::Approx(vb.rows[0].ratio).epsilon(1e-10));
  const auto pa = check_reverse_holder_ap(a, s, {}, centers, {0.1}, {2.0});
  const auto pb = check_reverse_holder_ap(b, s, {}, centers, {0.1}, {2.0});
  CHECK(pa.rows[0].product == doctest::Approx(pb.rows[0].product).epsilon(1e-10));
}

TEST_CASE("difference of a field with itself vanishes") {
  const auto wave = WaveConfig::make(1.0, Eigen::Vector3d::UnitZ());
  const auto sol = sphere_series(wave, 1.0, 1.0);
  const auto d = difference_field(solution_field(sol), solution_field(sol));
  const Eigen::Matrix3Xd x = Eigen::Vector3d(0, 1.5, 0.5);
  CHECK(std::abs(d.exterior(x)(0)) == 0.0);
  CHECK(d.diameter == doctest::Approx(2.0));
}
