#include "impedlab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace impedlab {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
  fail(ErrorCode::ConfigInvalid, (where.empty() ? "/" : where) + ": " + what);
}

// Read access to one JSON object that remembers which keys were consumed,
// so anything left over is reported as unknown.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) invalid(path_, "expected an object");
  }

  ~Node() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) invalid(path_ + "/" + key, "unknown key");
  }

  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  std::string at(const std::string& key) const { return path_ + "/" + key; }

  Node child(const std::string& key) {
    seen_.insert(key);
    return Node(j_.at(key), at(key));
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number()) invalid(at(key), "expected a number");
    return v.get<double>();
  }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) invalid(at(key), "expected an integer");
    return v.get<int>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_unsigned()) invalid(at(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_string()) invalid(at(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_array()) invalid(at(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) invalid(at(key) + "/" + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  Eigen::Vector3d vector3(const std::string& key, const Eigen::Vector3d& fallback) {
    if (!has(key)) return fallback;
    const auto v = numbers(key, {});
    if (v.size() != 3) invalid(at(key), "expected three numbers");
    return {v[0], v[1], v[2]};
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void check(bool ok, const std::string& where, const std::string& what) {
  if (!ok) invalid(where, what);
}

void check_positive(const std::vector<double>& v, const std::string& where) {
  for (std::size_t i = 0; i < v.size(); ++i) check(v[i] > 0, where + "/" + std::to_string(i), "must be positive");
}

// Runs a module constructor and reports its failure at a config location.
template <typename F>
auto at_location(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    invalid(where, e.what());
  }
}

void read_surface(Node& n, SurfaceDescriptor& s) {
  s.base_radius = n.number("base_radius", s.base_radius);
  s.diam_bound = n.number("diam_bound", s.diam_bound);
  s.lipschitz_bound = n.number("lipschitz_bound", s.lipschitz_bound);
  s.patch_scale = n.number("patch_scale", s.patch_scale);
  if (n.has("harmonics")) {
    const auto& arr = n.raw("harmonics");
    check(arr.is_array(), n.at("harmonics"), "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Node t(arr[i], n.at("harmonics") + "/" + std::to_string(i));
      s.harmonics.push_back({t.integer("n", 0), t.integer("m", 0), t.number("coeff", 0.0)});
    }
  }
}

void read_partition(Node& n, CoatingPartition& p) {
  const std::string kind = n.string("kind", "fully_impedance");
  if (kind == "fully_impedance") {
    p = CoatingPartition::fully_impedance();
    check(!n.has("cap_angle"), n.at("cap_angle"), "only valid for kind polar_cap");
  } else if (kind == "polar_cap") {
    check(n.has("cap_angle"), n.at("cap_angle"), "required for kind polar_cap");
    const double angle = n.number("cap_angle", 0.0);
    p = at_location(n.at("cap_angle"), [&] { return CoatingPartition::polar_cap(angle); });
  } else {
    invalid(n.at("kind"), "expected fully_impedance or polar_cap");
  }
}

void read_impedance(Node& n, ImpedanceSpec& s) {
  s.model = n.string("model", s.model);
  s.params = n.numbers("params", s.params);
  s.lambda0 = n.number("lambda0", s.lambda0);
  s.lipschitz_bound = n.number("lipschitz_bound", s.lipschitz_bound);
}

void read_forward(Node& n, ForwardSettings& f) {
  const std::string method = n.string("method", "auto");
  if (method == "auto") f.method = ForwardMethod::Auto;
  else if (method == "series") f.method = ForwardMethod::Series;
  else if (method == "bie") f.method = ForwardMethod::Bie;
  else invalid(n.at("method"), "expected auto, series or bie");
  f.bie.polar_refinement = n.number("polar_refinement", f.bie.polar_refinement);
  f.bie.local_cutoff = n.number("local_cutoff", f.bie.local_cutoff);
  f.bie.rcond_floor = n.number("rcond_floor", f.bie.rcond_floor);
  f.bie.checkpoint_tolerance = n.number("checkpoint_tolerance", f.bie.checkpoint_tolerance);
  f.bie.interface_band = n.number("interface_band", f.bie.interface_band);
  f.bie.max_checkpoints = n.integer("max_checkpoints", f.bie.max_checkpoints);
  check(f.bie.polar_refinement >= 1, n.at("polar_refinement"), "must be at least 1");
  check(f.bie.local_cutoff >= 0, n.at("local_cutoff"), "must be non-negative");
  check(f.bie.checkpoint_tolerance > 0, n.at("checkpoint_tolerance"), "must be positive");
}

void read_inverse(Node& n, InverseSettings& s) {
  s.r1 = n.number("r1", s.r1);
  s.rho = n.number("rho", s.rho);
  s.eps = n.number("eps", s.eps);
  s.mfs.gamma_in = n.number("gamma_in", s.mfs.gamma_in);
  s.mfs.sources = n.integer("sources", s.mfs.sources);
  s.mfs.alpha = n.number("alpha", s.mfs.alpha);
  s.mfs.alpha_floor = n.number("alpha_floor", s.mfs.alpha_floor);
  s.truncation.max_order = n.integer("max_order", s.truncation.max_order);
  s.truncation.forced_order = n.integer("forced_order", s.truncation.forced_order);
  if (n.has("tau")) s.tau = n.number("tau", 0.0);
  s.far_theta = n.integer("far_theta", s.far_theta);
  s.far_phi = n.integer("far_phi", s.far_phi);
  check(s.r1 > 0, n.at("r1"), "must be positive");
  check(s.rho >= 0, n.at("rho"), "must be non-negative");
  check(s.eps >= 0, n.at("eps"), "must be non-negative");
  check(s.mfs.gamma_in > 0 && s.mfs.gamma_in < 1, n.at("gamma_in"), "must lie in (0, 1)");
  check(s.mfs.sources > 0, n.at("sources"), "must be positive");
  check(s.mfs.alpha_floor > 0, n.at("alpha_floor"), "must be positive");
  check(s.truncation.max_order >= 0, n.at("max_order"), "must be non-negative");
  check(!s.tau || *s.tau > 0, n.at("tau"), "must be positive");
  check(s.far_theta >= 2 && s.far_phi >= 3, n.at("far_theta"), "far-field grid too coarse");
  check(s.truncation.max_order <= std::min(s.far_theta - 1, (s.far_phi - 1) / 2), n.at("max_order"),
        "exceeds the degree resolved by the far-field grid");
}

void read_sweep(Node& n, SweepSettings& s) {
  s.eps = n.numbers("eps", s.eps);
  s.seeds = n.integer("seeds", s.seeds);
  for (std::size_t i = 0; i < s.eps.size(); ++i)
    check(s.eps[i] > 0 && s.eps[i] < 1, n.at("eps") + "/" + std::to_string(i), "must lie in (0, 1)");
  check(s.seeds > 0, n.at("seeds"), "must be positive");
}

void read_checks(Node& n, CheckSettings& c) {
  if (n.has("centers")) {
    c.centers.clear();
    const auto& arr = n.raw("centers");
    check(arr.is_array(), n.at("centers"), "expected an array of [theta, phi]");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string where = n.at("centers") + "/" + std::to_string(i);
      check(arr[i].is_array() && arr[i].size() == 2 && arr[i][0].is_number() && arr[i][1].is_number(), where,
            "expected [theta, phi]");
      c.centers.push_back({arr[i][0].get<double>(), arr[i][1].get<double>()});
    }
  }
  c.rhos = n.numbers("rhos", c.rhos);
  c.betas = n.numbers("betas", c.betas);
  c.surface_radii = n.numbers("surface_radii", c.surface_radii);
  c.ap_radii = n.numbers("ap_radii", c.ap_radii);
  c.ps = n.numbers("ps", c.ps);
  c.ap_bound = n.number("ap_bound", c.ap_bound);
  c.lower_bound_radii = n.numbers("lower_bound_radii", c.lower_bound_radii);
  c.sphere_samples = n.integer("sphere_samples", c.sphere_samples);
  c.sampling.volume_candidates = n.integer("volume_candidates", c.sampling.volume_candidates);
  c.sampling.surface_radial = n.integer("surface_radial", c.sampling.surface_radial);
  c.sampling.surface_angular = n.integer("surface_angular", c.sampling.surface_angular);
  check_positive(c.rhos, n.at("rhos"));
  check_positive(c.surface_radii, n.at("surface_radii"));
  check_positive(c.ap_radii, n.at("ap_radii"));
  check_positive(c.lower_bound_radii, n.at("lower_bound_radii"));
  for (std::size_t i = 0; i < c.betas.size(); ++i)
    check(c.betas[i] > 1, n.at("betas") + "/" + std::to_string(i), "must exceed 1");
  for (std::size_t i = 0; i < c.ps.size(); ++i)
    check(c.ps[i] > 1, n.at("ps") + "/" + std::to_string(i), "must exceed 1");
  check(c.sphere_samples > 0, n.at("sphere_samples"), "must be positive");
  check(c.sampling.volume_candidates > 0 && c.sampling.surface_radial > 0 && c.sampling.surface_angular > 0,
        n.at("volume_candidates"), "sampling sizes must be positive");

  if (n.has("three_spheres")) {
    Node t = n.child("three_spheres");
    auto& s = c.three_spheres;
    if (t.has("centers")) {
      const auto& arr = t.raw("centers");
      check(arr.is_array(), t.at("centers"), "expected an array of points");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string where = t.at("centers") + "/" + std::to_string(i);
        check(arr[i].is_array() && arr[i].size() == 3, where, "expected [x, y, z]");
        for (const auto& v : arr[i]) check(v.is_number(), where, "expected numbers");
        s.centers.emplace_back(arr[i][0].get<double>(), arr[i][1].get<double>(), arr[i][2].get<double>());
      }
    }
    s.rho = t.number("rho", s.rho);
    s.beta1 = t.number("beta1", s.beta1);
    s.beta2 = t.number("beta2", s.beta2);
    s.lambda_alt = t.number("lambda_alt", s.lambda_alt);
    s.candidates = t.integer("candidates", s.candidates);
    check(s.rho > 0, t.at("rho"), "must be positive");
    check(s.beta1 > 1 && s.beta2 > s.beta1, t.at("beta2"), "need 1 < beta1 < beta2");
    check(s.candidates > 0, t.at("candidates"), "must be positive");
  }
  if (n.has("psi0")) {
    Node t = n.child("psi0");
    auto& s = c.psi0;
    if (t.has("cases")) {
      s.cases.clear();
      const auto& arr = t.raw("cases");
      check(arr.is_array(), t.at("cases"), "expected an array of [k, lambda]");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string where = t.at("cases") + "/" + std::to_string(i);
        check(arr[i].is_array() && arr[i].size() == 2 && arr[i][0].is_number() && arr[i][1].is_number(), where,
              "expected [k, lambda]");
        const double k = arr[i][0].get<double>(), lambda = arr[i][1].get<double>();
        check(k > 0 && lambda > 0, where, "k and lambda must be positive");
        s.cases.emplace_back(k, lambda);
      }
    }
    s.points = t.integer("points", s.points);
    s.fd_step = t.number("fd_step", s.fd_step);
    check(s.points > 0, t.at("points"), "must be positive");
    check(s.fd_step > 0, t.at("fd_step"), "must be positive");
  }
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

ImpedanceField ImpedanceSpec::build() const {
  ImpedanceField::Model m;
  if (model == "constant") m = ImpedanceField::Model::Constant;
  else if (model == "harmonic_expansion") m = ImpedanceField::Model::HarmonicExpansion;
  else if (model == "bump") m = ImpedanceField::Model::Bump;
  else fail(ErrorCode::ConfigInvalid, "/impedance/model: expected constant, harmonic_expansion or bump");
  return ImpedanceField(m, params, lambda0, lipschitz_bound);
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ConfigInvalid, std::string("malformed JSON: ") + e.what());
  }
  ExperimentConfig c;
  c.source_text = text;
  {
    Node root(doc, "");
    check(root.has("schema_version"), "/schema_version", "required");
    c.schema_version = root.integer("schema_version", 0);
    check(c.schema_version == kConfigSchemaVersion, "/schema_version",
          "unsupported version " + std::to_string(c.schema_version));
    c.name = root.string("name", c.name);
    c.seed = root.unsigned_integer("seed", c.seed);
    c.threads = root.integer("threads", c.threads);
    check(c.threads >= 0, "/threads", "must be non-negative");

    if (root.has("wave")) {
      Node w = root.child("wave");
      const double k = w.number("k", 1.0);
      const Eigen::Vector3d dir = w.vector3("direction", Eigen::Vector3d::UnitZ());
      c.wave = at_location("/wave", [&] { return WaveConfig::make(k, dir); });
    }
    if (root.has("surface")) {
      Node s = root.child("surface");
      read_surface(s, c.surface);
    }
    if (root.has("partition")) {
      Node p = root.child("partition");
      read_partition(p, c.partition);
    }
    if (root.has("impedance")) {
      Node i = root.child("impedance");
      read_impedance(i, c.impedance);
    }
    if (root.has("mesh")) {
      Node m = root.child("mesh");
      c.mesh.n_theta = m.integer("n_theta", c.mesh.n_theta);
      c.mesh.n_phi = m.integer("n_phi", c.mesh.n_phi);
      c.grading = m.number("grading", c.grading);
      check(c.mesh.n_theta >= kMinThetaNodes, m.at("n_theta"),
            "needs at least " + std::to_string(kMinThetaNodes) + " nodes");
      check(c.mesh.n_phi >= kMinPhiNodes, m.at("n_phi"), "needs at least " + std::to_string(kMinPhiNodes) + " nodes");
      check(c.grading >= 1, m.at("grading"), "must be at least 1");
    }
    if (root.has("forward")) {
      Node f = root.child("forward");
      read_forward(f, c.forward);
    }
    if (root.has("inverse")) {
      Node i = root.child("inverse");
      read_inverse(i, c.inverse);
    }
    if (root.has("sweep")) {
      Node s = root.child("sweep");
      read_sweep(s, c.sweep);
    }
    if (root.has("checks")) {
      Node k = root.child("checks");
      read_checks(k, c.checks);
    }
  }

  // Cross-field preconditions of the modules.
  const StarSurface surface = at_location("/surface", [&] { return StarSurface::build(c.surface); });
  at_location("/impedance", [&] { return c.impedance.build(); });
  check(c.impedance.params.empty() || c.impedance.model != "constant" || c.impedance.params[0] >= c.impedance.lambda0,
        "/impedance/params", "constant impedance below lambda0");
  check(c.inverse.r1 > surface.diameter(), "/inverse/r1",
        "must exceed the obstacle diameter " + std::to_string(surface.diameter()));
  check(c.inverse.mfs.gamma_in * surface.r_max() < surface.r_min(), "/inverse/gamma_in",
        "sources must lie inside the obstacle");
  if (c.forward.method == ForwardMethod::Series)
    check(surface.is_sphere() && c.partition.kind == CoatingPartition::Kind::FullyImpedance &&
              c.impedance.model == "constant",
          "/forward/method", "series needs a fully coated sphere with constant impedance");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ConfigInvalid, "cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["wave"] = {{"k", c.wave.k}, {"direction", {c.wave.direction.x(), c.wave.direction.y(), c.wave.direction.z()}}};
  json harm = json::array();
  for (const auto& t : c.surface.harmonics) harm.push_back({{"n", t.n}, {"m", t.m}, {"coeff", t.coeff}});
  j["surface"] = {{"base_radius", c.surface.base_radius},
                  {"harmonics", harm},
                  {"diam_bound", number_or_null(c.surface.diam_bound)},
                  {"lipschitz_bound", number_or_null(c.surface.lipschitz_bound)},
                  {"patch_scale", c.surface.patch_scale}};
  if (c.partition.kind == CoatingPartition::Kind::PolarCap)
    j["partition"] = {{"kind", "polar_cap"}, {"cap_angle", c.partition.cap_angle}};
  else
    j["partition"] = {{"kind", "fully_impedance"}};
  j["impedance"] = {{"model", c.impedance.model},
                    {"params", c.impedance.params},
                    {"lambda0", c.impedance.lambda0},
                    {"lipschitz_bound", number_or_null(c.impedance.lipschitz_bound)}};
  j["mesh"] = {{"n_theta", c.mesh.n_theta}, {"n_phi", c.mesh.n_phi}, {"grading", c.grading}};
  const char* method = c.forward.method == ForwardMethod::Series ? "series"
                       : c.forward.method == ForwardMethod::Bie  ? "bie"
                                                                 : "auto";
  const auto& b = c.forward.bie;
  j["forward"] = {{"method", method},
                  {"polar_refinement", b.polar_refinement},
                  {"local_cutoff", b.local_cutoff},
                  {"rcond_floor", b.rcond_floor},
                  {"checkpoint_tolerance", b.checkpoint_tolerance},
                  {"interface_band", b.interface_band},
                  {"max_checkpoints", b.max_checkpoints}};
  const auto& inv = c.inverse;
  j["inverse"] = {{"r1", inv.r1},
                  {"rho", inv.rho},
                  {"eps", inv.eps},
                  {"gamma_in", inv.mfs.gamma_in},
                  {"sources", inv.mfs.sources},
                  {"alpha", inv.mfs.alpha},
                  {"alpha_floor", inv.mfs.alpha_floor},
                  {"max_order", inv.truncation.max_order},
                  {"forced_order", inv.truncation.forced_order},
                  {"tau", inv.tau ? json(*inv.tau) : json(nullptr)},
                  {"far_theta", inv.far_theta},
                  {"far_phi", inv.far_phi}};
  j["sweep"] = {{"eps", c.sweep.eps}, {"seeds", c.sweep.seeds}};
  json centers = json::array();
  for (const auto& p : c.checks.centers) centers.push_back({p.theta, p.phi});
  json ts_centers = json::array();
  for (const auto& p : c.checks.three_spheres.centers) ts_centers.push_back({p.x(), p.y(), p.z()});
  json cases = json::array();
  for (const auto& [k, l] : c.checks.psi0.cases) cases.push_back({k, l});
  const auto& ck = c.checks;
  j["checks"] = {{"centers", centers},
                 {"rhos", ck.rhos},
                 {"betas", ck.betas},
                 {"surface_radii", ck.surface_radii},
                 {"ap_radii", ck.ap_radii},
                 {"ps", ck.ps},
                 {"ap_bound", ck.ap_bound},
                 {"lower_bound_radii", ck.lower_bound_radii},
                 {"sphere_samples", ck.sphere_samples},
                 {"volume_candidates", ck.sampling.volume_candidates},
                 {"surface_radial", ck.sampling.surface_radial},
                 {"surface_angular", ck.sampling.surface_angular},
                 {"three_spheres",
                  {{"centers", ts_centers},
                   {"rho", ck.three_spheres.rho},
                   {"beta1", ck.three_spheres.beta1},
                   {"beta2", ck.three_spheres.beta2},
                   {"lambda_alt", ck.three_spheres.lambda_alt},
                   {"candidates", ck.three_spheres.candidates}}},
                 {"psi0", {{"cases", cases}, {"points", ck.psi0.points}, {"fd_step", ck.psi0.fd_step}}}};
  return j.dump(2);
}

}  // namespace impedlab
