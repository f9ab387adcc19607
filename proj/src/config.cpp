#include "sentsim/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "sentsim/permeation.hpp"
#include "sentsim/units.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sentsim::io {

namespace {

/// Strict-mode accessor: every key must be consumed, leftovers are fatal.
class StrictObj {
 public:
  StrictObj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <typename T>
  bool get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return false;
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
    return true;
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json* sub(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      (void)value;
      if (!seen_.count(key))
        throw ConfigError(path_ + ": unknown key \"" + key + "\" (strict mode)");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void check_file(const std::string& base, const std::string& rel, const std::string& what) {
  const fs::path p = fs::path(rel).is_absolute() ? fs::path(rel) : fs::path(base) / rel;
  if (!fs::exists(p)) throw ConfigError(what + ": file not found: " + p.string());
}

std::string join(const std::string& base, const std::string& rel) {
  const fs::path p = fs::path(rel).is_absolute() ? fs::path(rel) : fs::path(base) / rel;
  return p.string();
}

void parse_material(const json& j, MaterialParams& m) {
  StrictObj o(j, "material");
  o.get("E", m.E);
  o.get("nu", m.nu);
  o.get("sigma_y", m.sigma_y);
  o.get("N", m.N);
  o.get("Gc0", m.Gc0);
  o.get("q", m.q);
  o.get("Gc_min", m.Gc_min);
  o.get("ell", m.ell);
  o.get("beta", m.beta);
  o.get("D0", m.D0);
  o.get("V_H", m.V_H);
  o.get("T", m.T);
  o.get("k_d", m.k_d);
  o.get("phi_th", m.phi_th);
  o.get("k_res", m.k_res);
  o.get("subtract_psi_p_offset", m.subtract_psi_p_offset);
  std::string split = m.split == EnergySplit::spectral ? "spectral" : "none";
  o.get("energy_split", split);
  if (split == "none")
    m.split = EnergySplit::none;
  else if (split == "spectral")
    m.split = EnergySplit::spectral;
  else
    throw ConfigError("material.energy_split: expected \"none\" or \"spectral\"");
  o.finish();
  m.validate();
}

void parse_geometry(const json& j, GeometrySpec& g) {
  StrictObj o(j, "geometry");
  o.get("W", g.W);
  o.get("B", g.B);
  o.get("a0", g.a0);
  o.get("half_height", g.half_height);
  o.get("preset", g.preset);
  o.get("band_h", g.band_h);
  o.get("band_ymax", g.band_ymax);
  o.get("band_xmargin", g.band_xmargin);
  o.get("growth", g.growth);
  o.get("hmax", g.hmax);
  o.get("quad_order", g.quad_order);
  o.finish();
  if (g.preset != "desk" && g.preset != "paper")
    throw ConfigError("geometry.preset: expected \"desk\" or \"paper\"");
  if (!(g.W > 0 && g.B > 0 && g.half_height > 0))
    throw ConfigError("geometry: dimensions must be positive");
}

void parse_solver(const json& j, couple::StepControls& s) {
  StrictObj o(j, "solver");
  o.get("dt_initial", s.dt_initial);
  o.get("dt_min", s.dt_min);
  o.get("dt_max", s.dt_max);
  o.get("ramp_s", s.ramp_s);
  o.get("stagger_max", s.stagger_max);
  o.get("stagger_tol", s.stagger_tol);
  o.get("dphi_refine", s.dphi_refine);
  o.get("dphi_grow", s.dphi_grow);
  o.get("dt_growth", s.dt_growth);
  o.get("failure_extent_frac", s.failure_extent_frac);
  o.get("phi_crack", s.phi_crack);
  o.get("neg_c_node_frac", s.neg_c_node_frac);
  o.get("newton_tol_rel", s.newton.tol_rel);
  o.get("newton_tol_abs", s.newton.tol_abs);
  o.get("newton_max_iter", s.newton.max_iter);
  o.finish();
  s.validate();
}

void parse_environment(const json& j, EnvironmentSpec& e, const std::string& base) {
  StrictObj o(j, "environment");
  o.get("schedule_file", e.schedule_file);
  o.get("constant_wtppm", e.constant_wtppm);
  o.get("h2s_pct", e.h2s_pct);
  if (const json* a = o.sub("anchors")) {
    if (!a->is_array()) throw ConfigError("environment.anchors: expected an array");
    for (std::size_t i = 0; i < a->size(); ++i) {
      StrictObj ao((*a)[i], "environment.anchors[" + std::to_string(i) + "]");
      double pct = 0;
      std::string file;
      if (!ao.get("percent", pct) || !ao.get("schedule", file))
        throw ConfigError("environment.anchors: each entry needs percent and schedule");
      ao.finish();
      e.anchors.emplace_back(pct, file);
    }
  }
  o.finish();

  const int modes = (!e.schedule_file.empty()) + (e.constant_wtppm >= 0) + (e.h2s_pct > 0);
  if (modes != 1)
    throw ConfigError(
        "environment: specify exactly one of schedule_file, constant_wtppm, h2s_pct");
  if (e.h2s_pct > 0 && e.anchors.size() < 2)
    throw ConfigError("environment: h2s_pct needs at least two anchors");
  if (!e.schedule_file.empty()) check_file(base, e.schedule_file, "environment.schedule_file");
  for (const auto& [pct, file] : e.anchors) check_file(base, file, "environment.anchors");
}

void parse_load(const json& j, LoadSpec& l) {
  StrictObj o(j, "load");
  o.get("P", l.P);
  o.get("K", l.K);
  o.get("horizon_h", l.horizon_h);
  o.finish();
  if ((l.P > 0) == (l.K > 0))
    throw ConfigError("load: specify exactly one of P [N] or K [MPa sqrt(m)]");
  if (!(l.horizon_h > 0)) throw ConfigError("load.horizon_h must be positive");
}

void parse_output(const json& j, OutputSpec& out) {
  StrictObj o(j, "output");
  o.get("dir", out.dir);
  o.get("frame_every_h", out.frame_every_h);
  o.get("csv", out.csv);
  o.get("checkpoint_every_steps", out.checkpoint_every_steps);
  o.finish();
}

}  // namespace

std::string EnvironmentSpec::name() const {
  if (!schedule_file.empty()) return fs::path(schedule_file).stem().string();
  if (constant_wtppm >= 0) return "constant_" + std::to_string(constant_wtppm) + "wtppm";
  return std::to_string(h2s_pct) + "pct_h2s";
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("parse_config: cannot open " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError("parse_config: " + path + ": " + e.what());
  }

  RunConfig cfg;
  cfg.base_dir = fs::path(path).parent_path().string();
  StrictObj o(j, "config");
  if (const json* s = o.sub("material")) parse_material(*s, cfg.material);
  if (const json* s = o.sub("geometry")) parse_geometry(*s, cfg.geometry);
  if (const json* s = o.sub("solver")) parse_solver(*s, cfg.solver);
  if (const json* s = o.sub("environment"))
    parse_environment(*s, cfg.environment, cfg.base_dir);
  else
    throw ConfigError("config: missing environment block");
  if (const json* s = o.sub("load")) parse_load(*s, cfg.load);
  if (const json* s = o.sub("output")) parse_output(*s, cfg.output);
  o.finish();
  return cfg;
}

fem::MeshParams resolve_mesh_params(const GeometrySpec& g, double ell) {
  fem::MeshParams p =
      g.preset == "paper" ? fem::MeshParams::paper() : fem::MeshParams::desk(ell);
  if (g.band_h > 0) p.band_h = g.band_h;
  if (g.band_ymax > 0) p.band_ymax = g.band_ymax;
  if (g.band_xmargin > 0) p.band_xmargin = g.band_xmargin;
  if (g.growth > 0) p.growth = g.growth;
  if (g.hmax > 0) p.hmax = g.hmax;
  if (g.quad_order > 0) p.quad_order = g.quad_order;
  return p;
}

diff::EnvSchedule resolve_environment(const EnvironmentSpec& e, const std::string& base_dir) {
  if (e.constant_wtppm >= 0) return diff::EnvSchedule::constant(e.constant_wtppm);
  if (!e.schedule_file.empty())
    return diff::EnvSchedule::from_file(join(base_dir, e.schedule_file));

  // h2s_pct via log-linear interpolation between the bracketing anchors
  std::vector<std::pair<double, diff::EnvSchedule>> anchors;
  for (const auto& [pct, file] : e.anchors)
    anchors.emplace_back(pct, diff::EnvSchedule::from_file(join(base_dir, file)));
  std::sort(anchors.begin(), anchors.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [pct, sched] : anchors)
    if (std::abs(pct - e.h2s_pct) < 1e-12) return sched;
  if (e.h2s_pct < anchors.front().first || e.h2s_pct > anchors.back().first)
    throw RangeError("environment: h2s_pct outside the anchor hull");
  std::size_t lo = 0;
  while (lo + 2 < anchors.size() && anchors[lo + 1].first < e.h2s_pct) ++lo;
  return perm::interpolate_schedules(e.h2s_pct, anchors[lo].first, anchors[lo].second,
                                     anchors[lo + 1].first, anchors[lo + 1].second);
}

harness::SentCase to_case(const RunConfig& cfg, fem::AssemblyMode mode) {
  harness::SentCase c;
  c.material = cfg.material;
  c.controls = cfg.solver;
  c.mesh = resolve_mesh_params(cfg.geometry, cfg.material.ell);
  c.W = cfg.geometry.W;
  c.B = cfg.geometry.B;
  c.a0 = cfg.geometry.a0;
  c.half_height = cfg.geometry.half_height;
  c.horizon_h = cfg.load.horizon_h;
  c.schedule = resolve_environment(cfg.environment, cfg.base_dir);
  c.P = cfg.load.P > 0 ? cfg.load.P
                       : harness::load_for_k(cfg.load.K, cfg.geometry.B, cfg.geometry.W,
                                             cfg.geometry.a0);
  c.mode = mode;
  return c;
}

void write_config_echo(const RunConfig& cfg, const std::string& path) {
  json j;
  const MaterialParams& m = cfg.material;
  j["material"] = {{"E", m.E},       {"nu", m.nu},          {"sigma_y", m.sigma_y},
                   {"N", m.N},       {"Gc0", m.Gc0},        {"q", m.q},
                   {"Gc_min", m.Gc_min}, {"ell", m.ell},    {"beta", m.beta},
                   {"D0", m.D0},     {"V_H", m.V_H},        {"T", m.T},
                   {"k_d", m.k_d},   {"phi_th", m.phi_th},  {"k_res", m.k_res},
                   {"subtract_psi_p_offset", m.subtract_psi_p_offset},
                   {"energy_split", m.split == EnergySplit::spectral ? "spectral" : "none"}};
  const GeometrySpec& g = cfg.geometry;
  const fem::MeshParams mp = resolve_mesh_params(g, m.ell);
  j["geometry"] = {{"W", g.W},
                   {"B", g.B},
                   {"a0", g.a0},
                   {"half_height", g.half_height},
                   {"preset", g.preset},
                   {"band_h", mp.band_h},
                   {"band_ymax", mp.band_ymax},
                   {"band_xmargin", mp.band_xmargin},
                   {"growth", mp.growth},
                   {"hmax", mp.hmax},
                   {"quad_order", mp.quad_order}};
  const couple::StepControls& s = cfg.solver;
  j["solver"] = {{"dt_initial", s.dt_initial},
                 {"dt_min", s.dt_min},
                 {"dt_max", s.dt_max},
                 {"ramp_s", s.ramp_s},
                 {"stagger_max", s.stagger_max},
                 {"stagger_tol", s.stagger_tol},
                 {"dphi_refine", s.dphi_refine},
                 {"dphi_grow", s.dphi_grow},
                 {"dt_growth", s.dt_growth},
                 {"failure_extent_frac", s.failure_extent_frac},
                 {"phi_crack", s.phi_crack},
                 {"neg_c_node_frac", s.neg_c_node_frac},
                 {"newton_tol_rel", s.newton.tol_rel},
                 {"newton_tol_abs", s.newton.tol_abs},
                 {"newton_max_iter", s.newton.max_iter}};
  json env;
  if (!cfg.environment.schedule_file.empty()) env["schedule_file"] = cfg.environment.schedule_file;
  if (cfg.environment.constant_wtppm >= 0) env["constant_wtppm"] = cfg.environment.constant_wtppm;
  if (cfg.environment.h2s_pct > 0) {
    env["h2s_pct"] = cfg.environment.h2s_pct;
    json a = json::array();
    for (const auto& [pct, file] : cfg.environment.anchors)
      a.push_back({{"percent", pct}, {"schedule", file}});
    env["anchors"] = a;
  }
  j["environment"] = env;
  j["load"] = {{"P", cfg.load.P}, {"K", cfg.load.K}, {"horizon_h", cfg.load.horizon_h}};
  j["output"] = {{"dir", cfg.output.dir},
                 {"frame_every_h", cfg.output.frame_every_h},
                 {"csv", cfg.output.csv},
                 {"checkpoint_every_steps", cfg.output.checkpoint_every_steps}};
  j["metadata"] = {{"units", "mm, N, MPa, s, K; concentrations in wt ppm at interfaces"},
                   {"wtppm_per_molmm3", units::wtppm_per_molmm3},
                   {"gas_constant_Nmm_per_molK", units::gas_constant},
                   {"faraday_C_per_mol", units::faraday}};

  std::ofstream out(path);
  if (!out) throw Error("write_config_echo: cannot write " + path);
  out << j.dump(2) << "\n";
}

Manifest parse_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("parse_manifest: cannot open " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError("parse_manifest: " + path + ": " + e.what());
  }
  const std::string base = fs::path(path).parent_path().string();

  Manifest man;
  StrictObj o(j, "manifest");
  if (!o.get("config", man.config_path)) throw ConfigError("manifest: missing config path");
  check_file(base, man.config_path, "manifest.config");
  man.config_path = join(base, man.config_path);

  if (const json* envs = o.sub("environments")) {
    if (!envs->is_array()) throw ConfigError("manifest.environments: expected an array");
    for (std::size_t i = 0; i < envs->size(); ++i) {
      StrictObj eo((*envs)[i], "manifest.environments[" + std::to_string(i) + "]");
      std::string name;
      if (!eo.get("name", name))
        throw ConfigError("manifest.environments: each entry needs a name");
      EnvironmentSpec spec;
      const json* sj = eo.sub("environment");
      if (!sj) throw ConfigError("manifest.environments: each entry needs an environment block");
      parse_environment(*sj, spec, base);
      eo.finish();
      // anchor the file paths to the manifest directory
      if (!spec.schedule_file.empty()) spec.schedule_file = join(base, spec.schedule_file);
      for (auto& [pct, file] : spec.anchors) file = join(base, file);
      man.environments.emplace_back(name, spec);
    }
  }

  if (const json* runs = o.sub("runs")) {
    if (!runs->is_array()) throw ConfigError("manifest.runs: expected an array");
    for (std::size_t i = 0; i < runs->size(); ++i) {
      StrictObj ro((*runs)[i], "manifest.runs[" + std::to_string(i) + "]");
      ManifestEntry e;
      ro.get("P", e.P);
      ro.get("K", e.K);
      ro.get("a0", e.a0);
      ro.get("environment", e.env_name);
      ro.finish();
      if ((e.P > 0) == (e.K > 0))
        throw ConfigError("manifest.runs[" + std::to_string(i) +
                          "]: specify exactly one of P or K");
      man.entries.push_back(std::move(e));
    }
  }
  if (man.entries.empty()) throw ConfigError("manifest: no runs listed");
  o.finish();
  return man;
}

}  // namespace sentsim::io
