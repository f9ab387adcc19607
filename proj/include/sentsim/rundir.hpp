#pragma once

#include <fstream>
#include <string>

#include "sentsim/coupling.hpp"
#include "sentsim/sent.hpp"

namespace sentsim::io {

const char* version_string();

inline constexpr const char* kSummaryCsvHeader =
    "time_h,dt_s,passes,newton,crack_extent_mm,peak_C_wtppm,peak_sigma_h_MPa,reaction_N,phi_max";

inline constexpr const char* kCampaignCsvHeader = "P_N,a0_mm,K_MPa_sqrt_m,env,outcome,time_h";

/// Output directory of one run: version stamp, per-step scalar log, frames,
/// machine-readable result.
class RunDir {
 public:
  explicit RunDir(const std::string& root);

  const std::string& root() const { return root_; }
  std::string file(const std::string& rel) const;

  void open_summary();
  void log_step(const couple::SimState& s);

  void write_result(const harness::TestRecord& rec);

  /// frames/frame_000012_t0000036.000h.vtk
  std::string frame_path(long index, double time_s) const;

 private:
  std::string root_;
  std::ofstream csv_;
};

void append_campaign_csv(std::ofstream& out, const harness::TestRecord& rec);

}  // namespace sentsim::io
