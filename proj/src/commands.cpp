#include "impedlab/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "impedlab/output.hpp"
#include "json.hpp"

namespace impedlab {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// A failure inside a named pipeline stage; carries the original cause.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(ErrorCode::StageFailed, stage + ": " + cause.what()), stage_(std::move(stage)), cause_(cause.code()) {}

  const std::string& stage() const { return stage_; }
  ErrorCode cause() const { return cause_; }

 private:
  std::string stage_;
  ErrorCode cause_;
};

template <typename F>
auto stage(RunOutput& out, const std::string& name, F&& f) {
  auto timer = out.time(name);
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

json finite_or_string(double v) { return std::isfinite(v) ? json(v) : json(format_number(v)); }

std::shared_ptr<const BoundaryMesh> build_mesh(const ExperimentConfig& c) {
  const StarSurface surface = StarSurface::build(c.surface);
  return std::make_shared<const BoundaryMesh>(build_quadrature(surface, c.partition, c.mesh, c.grading));
}

bool series_applies(const ExperimentConfig& c) {
  return c.surface.harmonics.empty() && c.partition.kind == CoatingPartition::Kind::FullyImpedance &&
         c.impedance.model == "constant";
}

ImpedanceField impedance_of(const ExperimentConfig& c, std::optional<double> lambda_override) {
  if (!lambda_override) return c.impedance.build();
  return ImpedanceField::constant(*lambda_override, c.impedance.lambda0, c.impedance.lipschitz_bound);
}

std::string method_name(const ScatterSolution& s) { return s.is_series() ? "series" : "bie"; }

SphereGrid far_grid(const ExperimentConfig& c) { return SphereGrid(c.inverse.far_theta, c.inverse.far_phi); }

void write_json(RunOutput& out, const std::string& name, const json& j) { out.write(name, j.dump(2) + "\n"); }

std::vector<double> scaled_ratios(const DoublingReport& r) {
  std::vector<double> v;
  for (const auto& row : r.rows) v.push_back(row.ratio);
  return v;
}

double max_relative_change(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(a[i]), 1e-300));
  return worst;
}

constexpr double kScaleTolerance = 1e-10;
const cplx kProbeScale(0.0, 3.7);

struct SweepEntry {
  double eps = 0;
  int seed_index = 0;
  std::uint64_t seed = 0;
  int order = 0;
  double alpha = kNaN;
  double residual = kNaN;
  int trusted = 0;
  double sup_error = kNaN;
  double l2_error = kNaN;
  std::string status = "ok";
};

}  // namespace

ScatterSolution forward_solution(const ExperimentConfig& c, std::optional<double> lambda_override) {
  const auto mesh = build_mesh(c);
  const ImpedanceField lambda = impedance_of(c, lambda_override);
  lambda.validate(*mesh);
  const bool use_series = c.forward.method == ForwardMethod::Series ||
                          (c.forward.method == ForwardMethod::Auto && series_applies(c));
  if (use_series) {
    require(series_applies(c), ErrorCode::ArgumentOutOfRange, "series solution needs a fully coated sphere");
    const auto sphere = sphere_series(c.wave, c.surface.base_radius, lambda(0.0, 0.0));
    return attach_mesh(sphere, mesh);
  }
  return solve_direct_bie(mesh, c.wave, lambda, c.forward.bie);
}

int cmd_solve(const ExperimentConfig& c, const std::string& out_dir) {
  RunOutput out(out_dir, "solve", config_to_json(c));
  const ScatterSolution sol = stage(out, "forward", [&] { return forward_solution(c); });
  const auto& mesh = *sol.mesh;
  CsvTable csv({"theta", "phi", "x", "y", "z", "lambda", "u_re", "u_im", "dnu_re", "dnu_im", "dirichlet"});
  for (Eigen::Index i = 0; i < mesh.size(); ++i) {
    const auto p = mesh.points().col(i);
    csv.row({mesh.node_theta(i), mesh.node_phi(i), p.x(), p.y(), p.z(), sol.lambda_nodes(i), sol.u_trace(i).real(),
             sol.u_trace(i).imag(), sol.dnu_trace(i).real(), sol.dnu_trace(i).imag(),
             mesh.on_impedance(i) ? 0.0 : 1.0});
  }
  out.write("trace.csv", csv.str());
  json rec{{"method", method_name(sol)},
           {"nodes", mesh.size()},
           {"n_theta", mesh.n_theta()},
           {"n_phi", mesh.n_phi()},
           {"rcond", sol.rcond},
           {"checkpoint_dirichlet_max", sol.residual.dirichlet_max},
           {"checkpoint_impedance_max", sol.residual.impedance_max},
           {"checkpoint_scale", sol.residual.scale}};
  if (sol.is_series()) rec["series_order"] = sol.series().order();
  write_json(out, "solution.json", rec);
  out.set_info("method", method_name(sol));
  out.finish(0);
  return 0;
}

int cmd_farfield(const ExperimentConfig& c, const std::string& out_dir) {
  RunOutput out(out_dir, "farfield", config_to_json(c));
  const ScatterSolution sol = stage(out, "forward", [&] { return forward_solution(c); });
  const FarFieldPattern pattern = stage(out, "farfield", [&] { return eval_far_field(sol, far_grid(c)); });
  CsvTable csv({"theta", "phi", "weight", "u_inf_re", "u_inf_im"});
  for (Eigen::Index i = 0; i < pattern.grid.size(); ++i)
    csv.row({pattern.grid.node_theta(i), pattern.grid.node_phi(i), pattern.grid.weights()(i), pattern.values(i).real(),
             pattern.values(i).imag()});
  out.write("farfield.csv", csv.str());
  out.set_constant("l2_norm", l2_sphere_norm(pattern));
  out.set_info("method", method_name(sol));
  out.finish(0);
  return 0;
}

int cmd_reconstruct(const ExperimentConfig& c, const std::string& out_dir) {
  RunOutput out(out_dir, "reconstruct", config_to_json(c));
  const ScatterSolution sol = stage(out, "forward", [&] { return forward_solution(c); });
  const FarFieldPattern clean = stage(out, "farfield", [&] { return eval_far_field(sol, far_grid(c)); });
  const FarFieldPattern data =
      stage(out, "add_noise", [&] { return add_noise(clean, c.inverse.eps, stream_seed(c.seed, 0)); });
  const NearFieldAnnulus near = stage(out, "far_to_near", [&] {
    return far_to_near(data, c.wave.k, c.inverse.r1, sol.obstacle_diameter(), c.inverse.truncation);
  });
  const BoundaryTrace trace = stage(out, "near_to_boundary", [&] {
    return near_to_boundary(near, sol.mesh, c.wave, c.inverse.rho, c.inverse.mfs);
  });
  const double tau = c.inverse.tau.value_or(default_trust_threshold(trace));
  const ReconstructionResult rec = stage(out, "recover_impedance", [&] { return recover_impedance(trace, tau); });
  const ImpedanceField truth = c.impedance.build();

  const auto& mesh = *rec.mesh;
  CsvTable csv({"theta", "phi", "lambda_true", "lambda_hat", "trusted", "abs_u"});
  for (std::size_t i = 0; i < rec.nodes.size(); ++i) {
    const Eigen::Index node = rec.nodes[i];
    const auto e = static_cast<Eigen::Index>(i);
    const double th = mesh.node_theta(node), ph = mesh.node_phi(node);
    csv.row({th, ph, truth(th, ph), rec.lambda_hat(e), rec.trusted[i] ? 1.0 : 0.0, rec.abs_u(e)});
  }
  out.write("reconstruction.csv", csv.str());

  CsvTable curve({"alpha", "residual"});
  for (const auto& [a, r] : trace.residual_curve) curve.row({a, r});
  out.write("discrepancy.csv", curve.str());

  const double sup = impedance_error(truth, rec, ErrorNorm::Sup);
  const double l2 = impedance_error(truth, rec, ErrorNorm::L2);
  json summary{{"eps", c.inverse.eps},
               {"order", near.order},
               {"propagated_error", near.propagated_error},
               {"alpha", trace.alpha},
               {"residual", trace.residual},
               {"discrepancy_target", trace.target},
               {"floor_active", trace.floor_active},
               {"estimated_trace_error", trace.estimated_error},
               {"tau", tau},
               {"nodes", rec.nodes.size()},
               {"trusted", rec.trusted_count()},
               {"max_imag", rec.max_imag},
               {"sup_error", sup},
               {"l2_error", l2}};
  write_json(out, "summary.json", summary);
  out.set_constant("sup_error", sup);
  out.set_constant("l2_error", l2);
  out.set_constant("alpha", trace.alpha);
  out.set_constant("order", near.order);
  out.finish(0);
  return 0;
}

int cmd_verify(const ExperimentConfig& c, const std::string& which, const std::string& out_dir) {
  RunOutput out(out_dir, "verify " + which, config_to_json(c));
  const auto& ck = c.checks;
  json summary{{"check", which}};
  bool pass = true;

  if (which == "psi0") {
    CsvTable csv({"k", "lambda", "case", "radius", "points", "pde_residual", "bc_residual", "fd_gradient",
                  "fd_pde_residual", "fd_bc_residual", "min_abs"});
    json cases = json::array();
    stage(out, "psi0", [&] {
      for (const auto& [k, lambda] : ck.psi0.cases) {
        const double r = psi0_radius(k, lambda);
        const Psi0Report rep = psi0_residual(k, lambda, lower_half_ball_points(r, ck.psi0.points), ck.psi0.fd_step);
        const int sign = rep.which == Psi0Case::Below ? -1 : rep.which == Psi0Case::Above ? 1 : 0;
        csv.row({k, lambda, static_cast<double>(sign), r, static_cast<double>(ck.psi0.points), rep.pde_residual,
                 rep.bc_residual, rep.fd_gradient, rep.fd_pde_residual, rep.fd_bc_residual, rep.min_abs});
        const bool analytic_ok = rep.pde_residual < 1e-12 && rep.bc_residual < 1e-12;
        const bool fd_ok = rep.fd_gradient < 1e-6 && rep.fd_pde_residual < 1e-6 && rep.fd_bc_residual < 1e-6;
        const bool floor_ok = rep.min_abs >= 2.0;
        pass = pass && analytic_ok && fd_ok && floor_ok;
        cases.push_back({{"k", k},
                         {"lambda", lambda},
                         {"analytic_pass", analytic_ok},
                         {"fd_pass", fd_ok},
                         {"min_abs_pass", floor_ok}});
      }
      return 0;
    });
    out.write("psi0.csv", csv.str());
    summary["cases"] = cases;
  } else {
    const ScatterSolution sol = stage(out, "forward", [&] { return forward_solution(c); });
    const StarSurface& surface = sol.mesh->surface();
    const FieldSource field = solution_field(sol);
    const FieldSource probe = solution_field(sol, kProbeScale);

    if (which == "lowerbound") {
      const LowerBoundReport rep =
          stage(out, "lowerbound", [&] { return check_lower_bound(field, ck.lower_bound_radii, ck.sphere_samples); });
      CsvTable csv({"radius", "min_abs_u"});
      for (std::size_t i = 0; i < rep.radii.size(); ++i) csv.row({rep.radii[i], rep.min_abs_u[i]});
      out.write("lowerbound.csv", csv.str());
      summary["r0_hat"] = finite_or_string(rep.r0_hat);
      summary["found"] = rep.found();
      out.set_constant("r0_hat", rep.r0_hat);
      pass = rep.found();
    } else if (which == "vdoubling" || which == "sdoubling") {
      const bool volume = which == "vdoubling";
      auto run = [&](const FieldSource& f) {
        return volume ? check_volume_doubling(f, surface, c.partition, ck.centers, ck.rhos, ck.betas, ck.sampling)
                      : check_surface_doubling(f, surface, c.partition, ck.centers, ck.surface_radii, ck.sampling);
      };
      const DoublingReport rep = stage(out, which, [&] { return run(field); });
      const DoublingReport scaled = stage(out, which + "_scaled", [&] { return run(probe); });
      const double drift = max_relative_change(scaled_ratios(rep), scaled_ratios(scaled));
      CsvTable csv({"center", "theta0", "phi0", "rho", "beta", "inner", "outer", "ratio"});
      for (const auto& r : rep.rows)
        csv.row({static_cast<double>(r.center), r.theta0, r.phi0, r.rho, r.beta, r.inner, r.outer, r.ratio});
      out.write(which + ".csv", csv.str());
      CsvTable fits({"center", "rho", "k_hat", "c_hat"});
      for (const auto& f : rep.fits) fits.row({static_cast<double>(f.center), f.rho, f.k_hat, f.c_hat});
      out.write(which + "_fit.csv", fits.str());
      summary["min_ratio"] = rep.min_ratio;
      summary["max_ratio"] = rep.max_ratio;
      summary["k_max"] = rep.k_max;
      summary["c_max"] = rep.c_max;
      summary["all_at_least_one"] = rep.all_at_least_one();
      summary["scale_drift"] = drift;
      summary["scale_invariant"] = drift <= kScaleTolerance;
      out.set_constant("k_max", rep.k_max);
      out.set_constant("c_max", rep.c_max);
      pass = rep.all_at_least_one() && std::isfinite(rep.k_max) && drift <= kScaleTolerance;
    } else if (which == "threespheres") {
      const auto& ts = ck.three_spheres;
      const ScatterSolution alt = stage(out, "forward_alt", [&] { return forward_solution(c, ts.lambda_alt); });
      const FieldSource diff = difference_field(field, solution_field(alt));
      const FieldSource diff_probe = difference_field(probe, solution_field(alt, kProbeScale));
      std::vector<Eigen::Vector3d> centers = ts.centers;
      if (centers.empty()) centers.push_back(2.0 * surface.r_max() * Eigen::Vector3d::UnitZ());
      const ThreeSpheresReport rep = stage(out, "threespheres", [&] {
        return check_three_spheres(diff, centers, ts.rho, ts.beta1, ts.beta2, ts.candidates);
      });
      const ThreeSpheresReport scaled = stage(out, "threespheres_scaled", [&] {
        return check_three_spheres(diff_probe, centers, ts.rho, ts.beta1, ts.beta2, ts.candidates);
      });
      std::vector<double> a, b;
      CsvTable csv({"x", "y", "z", "rho", "beta1", "beta2", "mass_inner", "mass_middle", "mass_outer", "tau_hat",
                    "defect"});
      for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        csv.row({r.center.x(), r.center.y(), r.center.z(), r.rho, r.beta1, r.beta2, r.mass_inner, r.mass_middle,
                 r.mass_outer, r.tau_hat, r.defect});
        a.push_back(r.tau_hat);
        b.push_back(scaled.rows[i].tau_hat);
      }
      out.write("threespheres.csv", csv.str());
      const double drift = max_relative_change(a, b);
      summary["tau_in_unit_interval"] = rep.tau_in_unit_interval();
      summary["scale_drift"] = drift;
      summary["scale_invariant"] = drift <= kScaleTolerance;
      if (!rep.rows.empty()) out.set_constant("tau_hat", rep.rows.front().tau_hat);
      pass = rep.tau_in_unit_interval() && drift <= kScaleTolerance;
    } else if (which == "ap") {
      auto run = [&](const FieldSource& f) {
        return check_reverse_holder_ap(f, surface, c.partition, ck.centers, ck.ap_radii, ck.ps, ck.ap_bound,
                                       ck.sampling);
      };
      const ApReport rep = stage(out, "ap", [&] { return run(field); });
      const ApReport scaled = stage(out, "ap_scaled", [&] { return run(probe); });
      std::vector<double> a, b;
      CsvTable csv({"center", "theta0", "phi0", "radius", "p", "mean_u2", "mean_inverse", "product",
                    "reverse_holder", "masked_fraction"});
      for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        csv.row({static_cast<double>(r.center), r.theta0, r.phi0, r.radius, r.p, r.mean_u2, r.mean_inverse, r.product,
                 r.reverse_holder, r.masked_fraction});
        a.push_back(r.product);
        a.push_back(r.reverse_holder);
        b.push_back(scaled.rows[i].product);
        b.push_back(scaled.rows[i].reverse_holder);
      }
      out.write("ap.csv", csv.str());
      const double drift = max_relative_change(a, b);
      summary["smallest_bounded_p"] = finite_or_string(rep.smallest_bounded_p);
      summary["scale_drift"] = drift;
      summary["scale_invariant"] = drift <= kScaleTolerance;
      out.set_constant("p", rep.smallest_bounded_p);
      pass = std::isfinite(rep.smallest_bounded_p) && drift <= kScaleTolerance;
    } else {
      fail(ErrorCode::ConfigInvalid, "unknown check '" + which +
                                         "'; expected lowerbound, vdoubling, sdoubling, threespheres, ap or psi0");
    }
  }
  summary["pass"] = pass;
  write_json(out, which + ".json", summary);
  out.set_flag("pass", pass);
  out.finish(0);
  return 0;
}

int cmd_sweep(const ExperimentConfig& c, const std::string& out_dir) {
  RunOutput out(out_dir, "sweep", config_to_json(c));
  const ScatterSolution sol = stage(out, "forward", [&] { return forward_solution(c); });
  const SphereGrid grid = far_grid(c);
  const FarFieldPattern clean = stage(out, "farfield", [&] { return eval_far_field(sol, grid); });
  const FundamentalSolutionFit fit = stage(out, "mfs_setup", [&] {
    return FundamentalSolutionFit(sol.mesh, c.wave, grid, c.inverse.r1, c.inverse.rho, c.inverse.mfs);
  });
  const ImpedanceField truth = c.impedance.build();

  const int seeds = c.sweep.seeds;
  const auto n = static_cast<int>(c.sweep.eps.size()) * seeds;
  std::vector<SweepEntry> entries(static_cast<std::size_t>(n));
  {
    auto timer = out.time("grid");
#pragma omp parallel for schedule(dynamic, 1)
    for (int idx = 0; idx < n; ++idx) {
      SweepEntry& e = entries[static_cast<std::size_t>(idx)];
      e.eps = c.sweep.eps[static_cast<std::size_t>(idx / seeds)];
      e.seed_index = idx % seeds;
      e.seed = stream_seed(c.seed, static_cast<std::uint64_t>(idx));
      try {
        const FarFieldPattern data = add_noise(clean, e.eps, e.seed);
        const NearFieldAnnulus near =
            far_to_near(data, c.wave.k, c.inverse.r1, sol.obstacle_diameter(), c.inverse.truncation);
        e.order = near.order;
        const BoundaryTrace trace = fit.fit(near);
        e.alpha = trace.alpha;
        e.residual = trace.residual;
        const ReconstructionResult rec =
            recover_impedance(trace, c.inverse.tau.value_or(default_trust_threshold(trace)));
        e.trusted = rec.trusted_count();
        e.sup_error = impedance_error(truth, rec, ErrorNorm::Sup);
        e.l2_error = impedance_error(truth, rec, ErrorNorm::L2);
      } catch (const Error& err) {
        e.status = std::string(to_string(err.code()));
      }
    }
  }

  CsvTable csv({"eps", "seed_index", "seed", "order", "alpha", "residual", "trusted", "sup_error", "l2_error",
                "status"});
  std::vector<StabilityRecord> records;
  for (const auto& e : entries) {
    csv.text_row({format_number(e.eps), std::to_string(e.seed_index), std::to_string(e.seed), std::to_string(e.order),
                  format_number(e.alpha), format_number(e.residual), std::to_string(e.trusted),
                  format_number(e.sup_error), format_number(e.l2_error), e.status});
    if (e.status == "ok" && std::isfinite(e.sup_error) && e.sup_error > 0) records.push_back({e.eps, e.sup_error});
  }
  out.write("sweep.csv", csv.str());

  // Median error per noise level, ordered by decreasing eps.
  std::vector<double> levels = c.sweep.eps;
  std::sort(levels.begin(), levels.end(), std::greater<>());
  CsvTable medians({"eps", "median_sup_error", "samples"});
  std::vector<double> med;
  for (double eps : levels) {
    std::vector<double> v;
    for (const auto& r : records)
      if (r.eps == eps) v.push_back(r.error);
    std::sort(v.begin(), v.end());
    const double m = v.empty() ? kNaN
                     : v.size() % 2 ? v[v.size() / 2]
                                    : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
    med.push_back(m);
    medians.row({eps, m, static_cast<double>(v.size())});
  }
  out.write("sweep_medians.csv", medians.str());
  bool monotone = true;
  for (std::size_t i = 1; i < med.size(); ++i) monotone = monotone && med[i] <= med[i - 1];

  json summary{{"records", records.size()}, {"failed", entries.size() - records.size()}, {"median_monotone", monotone}};
  try {
    const StabilityFit sf = fit_stability(records);
    const PowerLawFit pf = fit_power_law(records);
    const double gain = pf.residual > 0 ? sf.residual / pf.residual : std::numeric_limits<double>::infinity();
    summary["log_fit"] = {{"c", sf.c}, {"theta", sf.theta}, {"residual", sf.residual}, {"non_decaying", sf.non_decaying}};
    summary["power_fit"] = {{"c", pf.c}, {"exponent", pf.exponent}, {"residual", pf.residual}};
    summary["power_law_gain"] = finite_or_string(gain);
    summary["power_law_not_better"] = gain <= 2.0;
    summary["theta_positive"] = sf.theta > 0 && !sf.non_decaying;
    out.set_constant("theta_hat", sf.theta);
    out.set_constant("c_hat", sf.c);
  } catch (const Error& e) {
    summary["fit_error"] = e.what();
  }
  write_json(out, "fit.json", summary);
  out.finish(0);
  return 0;
}

int cmd_oracle_compare(const ExperimentConfig& c, const std::string& out_dir) {
  RunOutput out(out_dir, "oracle-compare", config_to_json(c));
  require(series_applies(c), ErrorCode::ConfigInvalid,
          "oracle-compare needs a fully coated sphere with constant impedance");
  ExperimentConfig bie_cfg = c;
  bie_cfg.forward.method = ForwardMethod::Bie;
  ExperimentConfig series_cfg = c;
  series_cfg.forward.method = ForwardMethod::Series;
  const ScatterSolution ref = stage(out, "series", [&] { return forward_solution(series_cfg); });
  const ScatterSolution bie = stage(out, "bie", [&] { return forward_solution(bie_cfg); });
  const SphereGrid grid = far_grid(c);
  const FarFieldPattern fr = eval_far_field(ref, grid);
  const FarFieldPattern fb = eval_far_field(bie, grid);
  const double rel = l2_sphere_distance(fb, fr) / l2_sphere_norm(fr);

  CsvTable csv({"theta", "phi", "series_re", "series_im", "bie_re", "bie_im", "abs_diff"});
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    csv.row({grid.node_theta(i), grid.node_phi(i), fr.values(i).real(), fr.values(i).imag(), fb.values(i).real(),
             fb.values(i).imag(), std::abs(fr.values(i) - fb.values(i))});
  out.write("oracle_farfield.csv", csv.str());
  const double trace_u = (bie.u_trace - ref.u_trace).cwiseAbs().maxCoeff();
  const double trace_dnu = (bie.dnu_trace - ref.dnu_trace).cwiseAbs().maxCoeff();
  json summary{{"far_field_relative_l2", rel},
               {"trace_u_max_diff", trace_u},
               {"trace_dnu_max_diff", trace_dnu},
               {"series_order", ref.series().order()},
               {"rcond", bie.rcond},
               {"n_theta", c.mesh.n_theta},
               {"n_phi", c.mesh.n_phi}};
  write_json(out, "oracle_compare.json", summary);
  out.set_constant("far_field_relative_l2", rel);
  out.finish(0);
  return 0;
}

int run_command(const std::string& command, const std::string& which, const CommandOptions& options,
                std::ostream& err) {
  try {
    ExperimentConfig config = load_config(options.config_path);
    if (options.seed) config.seed = *options.seed;
    int threads = config.threads;
    if (options.threads) {
      threads = *options.threads;
    } else if (const char* env = std::getenv("IMPEDLAB_THREADS")) {
      try {
        threads = std::stoi(env);
      } catch (const std::exception&) {
        fail(ErrorCode::ConfigInvalid, "IMPEDLAB_THREADS is not an integer");
      }
    }
    require(threads >= 0, ErrorCode::ConfigInvalid, "thread count must be non-negative");
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif
    config.threads = threads;
    if (command == "solve") return cmd_solve(config, options.out_dir);
    if (command == "farfield") return cmd_farfield(config, options.out_dir);
    if (command == "reconstruct") return cmd_reconstruct(config, options.out_dir);
    if (command == "verify") return cmd_verify(config, which, options.out_dir);
    if (command == "sweep") return cmd_sweep(config, options.out_dir);
    if (command == "oracle-compare") return cmd_oracle_compare(config, options.out_dir);
    fail(ErrorCode::ConfigInvalid, "unknown command '" + command + "'");
  } catch (const StageError& e) {
    err << json{{"error", "StageFailed"}, {"stage", e.stage()}, {"cause", to_string(e.cause())}, {"message", e.what()}}
               .dump()
        << '\n';
    return 3;
  } catch (const Error& e) {
    err << json{{"error", to_string(e.code())}, {"message", e.what()}}.dump() << '\n';
    return e.code() == ErrorCode::ConfigInvalid ? 2 : 3;
  } catch (const std::exception& e) {
    err << json{{"error", "StageFailed"}, {"message", e.what()}}.dump() << '\n';
    return 3;
  }
}

}  // namespace impedlab
