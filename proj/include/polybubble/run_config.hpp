#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "polybubble/config_geometry.hpp"
#include "polybubble/space.hpp"

namespace polybubble {

// Rejected config files report through this type so the driver can map
// them to the usage exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key=value run description. Unknown keys are errors: a silent typo
// in a regime constant would invalidate the scaling arithmetic.
struct RunConfig {
  // space
  int N = 0;
  int m = 0;
  double iota = 0.5;
  // regime
  int case_id = 0;
  double M1 = 1.0;
  double M2 = 1.0;
  double a = 0.0;
  double L0 = 1e-3;
  double L1 = 50.0;
  double theta = 0.15;
  double A = 0.0;
  // anchor and potential
  double delta = 0.1;
  double r0 = 1.0;
  Vec y20;  // defaults to zeros(N-3)
  std::string preset = "gaussian_well";
  double width = 0.25;
  double amplitude = 0.05;
  // sweeps: lambda = t k^rho over the listed (k, t) grid
  std::vector<int> sweep_k;
  std::vector<double> sweep_t;
  // geometry knobs for the lattice / norms commands
  int lattice_k = 4096;
  double h_bar = 0.05;
  double r_bar = 1.0;
  int ansatz_k = 2;
  double lambda = 0.0;  // 0 = derive from the regime window
  // sampling
  int mass_samples = 200000;
  double window_rho = 0.35;
  // run plumbing
  uint64_t seed = 20260816u;
  int jobs = 0;
  std::string out_dir = "reports";

  SpaceParams space() const;
  RegimeParams regime() const;
  // Sorted effective key=value text; its hash is the report provenance.
  // Covers every key that can change a computed number (jobs and out_dir
  // cannot, so they are omitted).
  std::string canonical() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

}  // namespace polybubble
