// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include "impedlab/commands.hpp"
#include "json.hpp"

using namespace impedlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string config_path(const std::string& name) { return std::string(IMPEDLAB_CONFIG_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::path(IMPEDLAB_SCRATCH) / "acceptance" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

/// Runs a CLI command into a fresh directory; throws with the error line on failure.
fs::path run(const std::string& command, const std::string& which, const std::string& config, const std::string& tag) {
  const fs::path dir = fresh_dir(tag);
  std::ostringstream err;
  if (run_command(command, which, {config_path(config), dir.string(), {}, {}}, err) != 0)
    throw std::runtime_error(command + " " + which + ": " + err.str());
  return dir;
}

Outcome oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const WaveConfig wave = WaveConfig::make(1.0, Eigen::Vector3d::UnitZ());
  const ScatterSolution ref = sphere_series(wave, 1.0, 1.0);
  const SphereGrid grid(24, 48);
  const FarFieldPattern f_ref = eval_far_field(ref, grid);
  const StarSurface sphere = StarSurface::build({});
  std::vector<double> errs;
  for (int nt : {8, 16, 24}) {
    auto mesh = std::make_shared<const BoundaryMesh>(build_quadrature(sphere, {}, {nt, 2 * nt}, 2.0));
    const auto sol = solve_direct_bie(mesh, wave, ImpedanceField::constant(1.0));
    errs.push_back(l2_sphere_distance(eval_far_field(sol, grid), f_ref) / l2_sphere_norm(f_ref));
  }
  const double dt = seconds_since(t0);
  const bool decreasing = errs[1] < errs[0] && errs[2] < errs[1];
  return {decreasing && errs[2] < 1e-3 && dt < 120,
          "errors " + fmt(errs[0]) + " " + fmt(errs[1]) + " " + fmt(errs[2]) + ", " + fmt(dt) + " s"};
}

Outcome exact_solutions() {
  const WaveConfig wave = WaveConfig::make(1.0, Eigen::Vector3d::UnitZ());
  const auto sol = sphere_series(wave, 1.0, 1.0);
  const auto t = series_boundary_traces(sol, fibonacci_directions(1000));
  const double series = (t.dnu + cplx(0, 1.0) * t.u).cwiseAbs().maxCoeff();

  double analytic = 0, fd = 0;
  for (auto [k, lambda] : {std::pair{1.0, 2.0}, std::pair{1.0, 1.0}, std::pair{2.0, 1.0}}) {
    const auto rep = psi0_residual(k, lambda, lower_half_ball_points(psi0_radius(k, lambda), 1000));
    analytic = std::max({analytic, rep.pde_residual, rep.bc_residual});
    fd = std::max({fd, rep.fd_gradient, rep.fd_pde_residual, rep.fd_bc_residual});
  }

  double plane = 0;
  for (double kr : {0.5, 1.0, 3.0, 8.0})
    for (double ct : {-1.0, -0.6, 0.0, 0.25, 0.9, 1.0})
      plane = std::max(plane, std::abs(plane_wave_expansion(1.0, kr, ct, 40).value - std::polar(1.0, kr * ct)));

  return {series < 1e-10 && analytic < 1e-12 && fd < 1e-6 && plane < 1e-10,
          "series " + fmt(series) + ", psi0 " + fmt(analytic) + " / fd " + fmt(fd) + ", plane wave " + fmt(plane)};
}

Outcome noiseless_reconstruction() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dir = run("reconstruct", "", "sphere_full_coat.json", "reconstruct");
  const double dt = seconds_since(t0);
  const auto s = json::parse(slurp(dir / "summary.json"));
  const double sup = s["sup_error"];
  const bool all_trusted = s["trusted"] == s["nodes"];
  return {sup < 1e-2 && all_trusted && dt < 60,
          "sup error " + fmt(sup) + " over " + std::to_string(s["trusted"].get<int>()) + " nodes, " + fmt(dt) + " s"};
}

Outcome stability_sweep(fs::path& dir_out) {
  const auto t0 = std::chrono::steady_clock::now();
  dir_out = run("sweep", "", "stability_sweep.json", "sweep_a");
  const double dt = seconds_since(t0);
  const auto f = json::parse(slurp(dir_out / "fit.json"));
  if (f.contains("fit_error")) return {false, f["fit_error"].get<std::string>()};
  const bool monotone = f["median_monotone"], theta = f["theta_positive"], power = f["power_law_not_better"];
  return {monotone && theta && power && dt < 1800,
          std::string("medians ") + (monotone ? "monotone" : "not monotone") + ", theta " +
              fmt(f["log_fit"]["theta"]) + ", power-law gain " + fmt(f["power_law_gain"]) + ", " + fmt(dt) + " s"};
}

/// Values compared against the stored baseline.
using Baseline = std::map<std::string, double>;

Outcome estimate_probes() {
  const std::string cfg = "sphere_full_coat.json";
  Baseline values;
  bool pass = true;
  std::string notes;
  auto summary = [&](const std::string& which) {
    const auto dir = run("verify", which, cfg, which);
    const auto s = json::parse(slurp(dir / (which + ".json")));
    const auto m = json::parse(slurp(dir / "manifest.json"));
    for (const auto& [k, v] : m["constants"].items())
      if (v.is_number()) values[which + "." + k] = v.get<double>();
    if (!s["pass"].get<bool>()) {
      pass = false;
      notes += " " + which + " failed;";
    }
    if (s.contains("scale_drift") && !(s["scale_drift"].get<double>() <= 1e-10)) {
      pass = false;
      notes += " " + which + " not scale invariant;";
    }
    return s;
  };

  summary("lowerbound");
  const auto vd = summary("vdoubling");
  values["vdoubling.min_ratio"] = vd["min_ratio"];
  const auto sd = summary("sdoubling");
  values["sdoubling.max_ratio"] = sd["max_ratio"];
  if (!sd["all_at_least_one"].get<bool>() || !std::isfinite(sd["max_ratio"].get<double>())) {
    pass = false;
    notes += " surface ratios out of range;";
  }
  summary("threespheres");
  summary("ap");

  // Regression against the first recorded run.
  const fs::path path = fs::path(IMPEDLAB_TEST_DATA) / "acceptance_baseline.json";
  if (!fs::exists(path)) {
    std::ofstream(path) << json(values).dump(2) << '\n';
    notes += " baseline recorded;";
  } else {
    const Baseline stored = json::parse(slurp(path)).get<Baseline>();
    for (const auto& [name, ref] : stored) {
      const auto it = values.find(name);
      const bool ok = it != values.end() && std::abs(it->second - ref) <= 0.1 * std::abs(ref);
      if (!ok) {
        pass = false;
        notes += " " + name + " drifted from " + fmt(ref) + ";";
      }
    }
    notes += " " + std::to_string(stored.size()) + " values checked against the baseline;";
  }
  return {pass, "R0 " + fmt(values["lowerbound.r0_hat"]) + ", K " + fmt(values["vdoubling.k_max"]) + ", surface c " +
                    fmt(values["sdoubling.c_max"]) + ", tau " + fmt(values["threespheres.tau_hat"]) + ", p " +
                    fmt(values["ap.p"]) + ";" + notes};
}

Outcome moduli() {
  const double e = std::numbers::e;
  const double half = std::abs(stability_modulus(1 - 1e-15, 1, 1).alpha - 0.5);
  const double third = std::abs(stability_modulus(std::exp(-(e * e - e)), 1, 1).alpha - 1.0 / 3.0);
  double worst = 0;
  for (auto [c, theta] : {std::pair{1.0, 0.5}, std::pair{2.0, 1.0}}) {
    std::vector<StabilityRecord> r;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6}) r.push_back({eps, stability_modulus(eps, c, theta).eta});
    const auto fit = fit_stability(r);
    worst = std::max({worst, std::abs(fit.c - c) / c, std::abs(fit.theta - theta) / theta});
  }
  return {half < 1e-12 && third < 1e-12 && worst < 1e-6,
          "alpha errors " + fmt(half) + " " + fmt(third) + ", fit error " + fmt(worst)};
}

Outcome determinism(const fs::path& first) {
  const auto second = run("sweep", "", "stability_sweep.json", "sweep_b");
  std::string diff;
  for (auto name : {"sweep.csv", "sweep_medians.csv"})
    if (slurp(first / name) != slurp(second / name)) diff += std::string(" ") + name;
  return {diff.empty() && !slurp(first / "sweep.csv").empty(),
          diff.empty() ? "sweep CSVs byte-identical" : "differs:" + diff};
}

}  // namespace

int main() {
  fs::path sweep_dir;
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, oracle_equivalence},
      {2, exact_solutions},
      {3, noiseless_reconstruction},
      {4, [&] { return stability_sweep(sweep_dir); }},
      {5, estimate_probes},
      {6, moduli},
      {7, [&] { return sweep_dir.empty() ? Outcome{false, "no first sweep to compare"} : determinism(sweep_dir); }},
  };
  int failed = 0;
  for (const auto& [n, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %d: %s %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
