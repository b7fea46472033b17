#ifndef IMPEDLAB_CONFIG_HPP
#define IMPEDLAB_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "impedlab/geometry.hpp"
#include "impedlab/inverse.hpp"
#include "impedlab/quantlab.hpp"
#include "impedlab/scatter.hpp"

namespace impedlab {

inline constexpr int kConfigSchemaVersion = 1;

enum class ForwardMethod { Auto, Series, Bie };

struct ImpedanceSpec {
  std::string model = "constant";  // constant | harmonic_expansion | bump
  std::vector<double> params{1.0};
  double lambda0 = 0.0;
  double lipschitz_bound = std::numeric_limits<double>::infinity();

  ImpedanceField build() const;
};

struct ForwardSettings {
  ForwardMethod method = ForwardMethod::Auto;
  BieOptions bie;
};

struct InverseSettings {
  double r1 = 3.0;
  double rho = 0.1;  // Gamma_I^rho margin from Gamma_D
  double eps = 0.0;
  MfsOptions mfs;
  TruncationPolicy truncation;
  std::optional<double> tau;  // trust threshold; default from the fit
  int far_theta = 24;         // far-field grid
  int far_phi = 48;
};

struct SweepSettings {
  std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
  int seeds = 16;
};

struct ThreeSpheresSettings {
  std::vector<Eigen::Vector3d> centers;
  double rho = 0.25;
  double beta1 = 1.5;
  double beta2 = 2.0;
  double lambda_alt = 1.1;  // impedance of the second solution
  int candidates = 20000;
};

struct Psi0Settings {
  std::vector<std::pair<double, double>> cases{{1.0, 2.0}, {1.0, 1.0}, {2.0, 1.0}};  // (k, lambda)
  int points = 1000;
  double fd_step = 1e-5;
};

struct CheckSettings {
  std::vector<PatchCenter> centers{{0.0, 0.0}};
  std::vector<double> rhos{0.05, 0.1};
  std::vector<double> betas{1.5, 2.0, 3.0};
  std::vector<double> surface_radii{0.05, 0.1, 0.2};
  std::vector<double> ap_radii{0.1};
  std::vector<double> ps{1.5, 2.0, 3.0};
  double ap_bound = 1e6;
  std::vector<double> lower_bound_radii{4, 8, 16, 32, 64, 128};
  int sphere_samples = 400;
  PatchSampling sampling;
  ThreeSpheresSettings three_spheres;
  Psi0Settings psi0;
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::string name = "experiment";
  WaveConfig wave;
  SurfaceDescriptor surface;
  CoatingPartition partition;
  ImpedanceSpec impedance;
  MeshResolution mesh{24, 48};
  double grading = 2.0;
  ForwardSettings forward;
  InverseSettings inverse;
  SweepSettings sweep;
  CheckSettings checks;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = leave to the runtime

  std::string source_text;  // the document as loaded, for the manifest
};

/// Parses and validates a configuration document. Unknown keys and invalid
/// values raise ConfigInvalid naming the offending JSON pointer.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON form of a configuration (all fields, defaults filled in).
std::string config_to_json(const ExperimentConfig& config);

}  // namespace impedlab

#endif
