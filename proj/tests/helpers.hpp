#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "sentsim/material.hpp"
#include "sentsim/sent.hpp"

namespace sentsim::test {

inline MaterialParams c110() { return MaterialParams{}; }

/// Coarse coupled case for machinery tests: a large length scale so the
/// band-resolution rule is satisfied by a cheap mesh (~900 elements).
inline harness::SentCase tiny_case() {
  harness::SentCase c;
  c.material = c110();
  c.material.ell = 0.3;
  c.mesh = fem::MeshParams::desk(0.3);
  c.mesh.band_ymax = 0.3;
  c.mesh.band_xmargin = 0.3;
  c.controls.dt_initial = 2.0;
  c.controls.dt_max = 3600.0;
  c.controls.dt_min = 0.05;
  c.P = 6000.0;
  c.horizon_h = 1.0;
  c.schedule = diff::EnvSchedule::constant(0.0);
  return c;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("sentsim_test_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace sentsim::test
