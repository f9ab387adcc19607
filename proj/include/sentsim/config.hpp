#pragma once

#include <string>
#include <vector>

#include "sentsim/sent.hpp"

namespace sentsim::io {

struct EnvironmentSpec {
  std::string schedule_file;                              // direct table
  double constant_wtppm = -1.0;                           // fixed surface concentration
  double h2s_pct = -1.0;                                  // log-interpolated from anchors
  std::vector<std::pair<double, std::string>> anchors;    // (percent, schedule file)

  std::string name() const;
};

struct GeometrySpec {
  double W = 7.0, B = 7.0, a0 = 2.45, half_height = 12.7;
  std::string preset = "desk";  // desk | paper
  // explicit overrides; <= 0 keeps the preset value
  double band_h = 0.0, band_ymax = 0.0, band_xmargin = 0.0, growth = 0.0, hmax = 0.0;
  int quad_order = 0;
};

struct LoadSpec {
  double P = 0.0;          // N  (exactly one of P, K)
  double K = 0.0;          // MPa sqrt(m)
  double horizon_h = 720.0;
};

struct OutputSpec {
  std::string dir = "out";
  double frame_every_h = 0.0;  // 0 = final frame only
  bool csv = true;
  int checkpoint_every_steps = 0;  // 0 = off
};

struct RunConfig {
  MaterialParams material;
  GeometrySpec geometry;
  couple::StepControls solver;
  EnvironmentSpec environment;
  LoadSpec load;
  OutputSpec output;
  std::string base_dir;  // directory of the config file (for relative paths)
};

/// Strict parse: unknown keys are fatal and named; invariants checked.
RunConfig parse_config(const std::string& path);

/// Canonical echo of every resolved value, plus run metadata (energy split,
/// unit conversion constants).
void write_config_echo(const RunConfig& cfg, const std::string& path);

fem::MeshParams resolve_mesh_params(const GeometrySpec& g, double ell);
diff::EnvSchedule resolve_environment(const EnvironmentSpec& e, const std::string& base_dir);
harness::SentCase to_case(const RunConfig& cfg, fem::AssemblyMode mode);

struct ManifestEntry {
  double P = 0.0, K = 0.0, a0 = 0.0;
  std::string env_name;
};

struct Manifest {
  std::string config_path;  // base RunConfig
  std::vector<std::pair<std::string, EnvironmentSpec>> environments;
  std::vector<ManifestEntry> entries;
};

Manifest parse_manifest(const std::string& path);

}  // namespace sentsim::io
