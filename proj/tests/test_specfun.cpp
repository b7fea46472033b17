#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <numbers>
#include <sstream>

#include "impedlab/scatter.hpp"
#include "impedlab/specfun.hpp"

using namespace impedlab;

namespace {

struct BesselRow {
  int n;
  double x, j, dj, y, dy;
};

std::vector<BesselRow> load_reference() {
  std::ifstream in(std::string(IMPEDLAB_TEST_DATA) + "/bessel_reference.csv");
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  std::vector<BesselRow> rows;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    BesselRow r{};
    char c;
    ss >> r.n >> c >> r.x >> c >> r.j >> c >> r.dj >> c >> r.y >> c >> r.dy;
    rows.push_back(r);
  }
  return rows;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("spherical Bessel functions match the high-precision table") {
  const auto rows = load_reference();
  REQUIRE(rows.size() > 150);
  double worst_j = 0, worst_y = 0;
  for (const auto& r : rows) {
    const auto t = spherical_bessel_table(r.n, r.x);
    // Relative accuracy of j is limited where j_n is tiny next to the
    // normalisation, so compare against a floor of 1e-280.
    if (std::abs(r.j) > 1e-280) worst_j = std::max({worst_j, rel(t.j(r.n), r.j), rel(t.dj(r.n), r.dj)});
    worst_y = std::max({worst_y, rel(t.y(r.n), r.y), rel(t.dy(r.n), r.dy)});
  }
  CHECK(worst_j < 1e-12);
  CHECK(worst_y < 1e-12);
}

TEST_CASE("Bessel table survives arguments that used to overflow the normalisation") {
  const auto t = spherical_bessel_table(60, 2.1);
  CHECK(std::isfinite(t.j(0)));
  CHECK(t.j(0) == doctest::Approx(std::sin(2.1) / 2.1).epsilon(1e-14));
  CHECK(t.j(60) > 0);
}

TEST_CASE("Bessel arguments outside the domain are rejected") {
  CHECK_THROWS_AS(spherical_bessel_table(5, 0.0), Error);
  CHECK_THROWS_AS(spherical_bessel_table(5, -1.0), Error);
  CHECK_THROWS_AS(spherical_bessel_table(kDefaultMaxOrder + 1, 1.0), Error);
}

TEST_CASE("Wronskian j_n y_n' - j_n' y_n = 1 / x^2") {
  for (double x : {0.3, 1.0, 4.0, 12.0}) {
    const auto t = spherical_bessel_table(20, x);
    for (int n = 0; n <= 20; ++n) {
      if (std::abs(t.y(n)) > 1e150) break;
      CHECK(x * x * (t.j(n) * t.dy(n) - t.dj(n) * t.y(n)) == doctest::Approx(1.0).epsilon(1e-11));
    }
  }
}

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n - 1") {
  const auto rule = gauss_legendre<double>(9);
  CHECK(rule.weights.sum() == doctest::Approx(2.0).epsilon(1e-15));
  for (int p = 0; p <= 17; ++p) {
    const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
    CHECK(rule.weights.dot(rule.nodes.array().pow(p).matrix()) == doctest::Approx(exact).epsilon(1e-14));
  }
}

TEST_CASE("Legendre recurrence") {
  CHECK(legendre_p(7, 1.0) == 1.0);
  CHECK(legendre_p(7, -1.0) == -1.0);
  const double t = 0.37;
  CHECK(legendre_p(2, t) == doctest::Approx(0.5 * (3 * t * t - 1)));
  CHECK(legendre_p(3, t) == doctest::Approx(0.5 * (5 * t * t * t - 3 * t)));
  const auto table = legendre_table(12, t);
  for (int n = 0; n <= 12; ++n) CHECK(table(n) == doctest::Approx(legendre_p(n, t)));
}

TEST_CASE("spherical harmonics are orthonormal on the product grid") {
  const SphereGrid grid(12, 24);
  const int nmax = 6;
  Eigen::MatrixXcd y(grid.size(), sh_count(nmax));
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    y.row(i) = sph_harm_all(nmax, grid.node_theta(i), grid.node_phi(i)).transpose();
  const Eigen::MatrixXcd gram = y.adjoint() * grid.weights().asDiagonal() * y;
  CHECK((gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(sph_harm(3, -2, 0.4, 1.1) == sph_harm_all(3, 0.4, 1.1)(sh_index(3, -2)));
}

TEST_CASE("harmonic analysis inverts synthesis") {
  const SphereGrid grid(16, 32);
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(sh_count(10));
  for (int i = 0; i < c.size(); ++i) c(i) = cplx(std::cos(1.3 * i), std::sin(0.7 * i)) / (1.0 + i);
  const Eigen::VectorXcd back = sh_analysis(grid, sh_synthesis(grid, c, 10), 10);
  CHECK((back - c).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("plane-wave expansion reproduces exp(i k r cos theta)") {
  double worst = 0;
  for (double kr : {0.5, 1.0, 3.0, 8.0})
    for (double ct : {-1.0, -0.6, 0.0, 0.25, 0.9, 1.0}) {
      const auto s = plane_wave_expansion(1.0, kr, ct, 40);
      worst = std::max(worst, std::abs(s.value - std::polar(1.0, kr * ct)));
      CHECK(s.tail_bound < 1e-12);
    }
  CHECK(worst < 1e-10);
}

TEST_CASE("Helmholtz kernel and its normal derivatives") {
  const Eigen::Vector3d x(0.3, -0.2, 1.5), y(0.1, 0.4, 0.2), n(0, 0, 1);
  const double k = 1.7, h = 1e-6;
  CHECK(helmholtz_kernel(k, x, y) == helmholtz_kernel(k, y, x));
  const cplx fd = (helmholtz_kernel(k, x, y + h * n) - helmholtz_kernel(k, x, y - h * n)) / (2 * h);
  CHECK(std::abs(helmholtz_kernel_dny(k, x, y, n) - fd) < 1e-8);
  const cplx fdx = (helmholtz_kernel(k, x + h * n, y) - helmholtz_kernel(k, x - h * n, y)) / (2 * h);
  CHECK(std::abs(helmholtz_kernel_dnx(k, x, y, n) - fdx) < 1e-8);
}

TEST_CASE("i^n cycles with period four") {
  CHECK(ipow(0) == cplx(1, 0));
  CHECK(ipow(5) == cplx(0, 1));
  CHECK(ipow(-1) == cplx(0, -1));
  CHECK(ipow(10) == cplx(-1, 0));
}
