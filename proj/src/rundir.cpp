#include "sentsim/rundir.hpp"

#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "sentsim/units.hpp"

namespace fs = std::filesystem;

namespace sentsim::io {

const char* version_string() { return "sentsim 1.0.0"; }

RunDir::RunDir(const std::string& root) : root_(root) {
  fs::create_directories(root_);
  fs::create_directories(fs::path(root_) / "frames");
  std::ofstream v(file("version.txt"));
  v << version_string() << "\n";
}

std::string RunDir::file(const std::string& rel) const {
  return (fs::path(root_) / rel).string();
}

void RunDir::open_summary() {
  csv_.open(file("summary.csv"));
  if (!csv_) throw Error("RunDir: cannot open summary.csv");
  csv_ << kSummaryCsvHeader << "\n";
}

void RunDir::log_step(const couple::SimState& s) {
  if (!csv_.is_open()) return;
  char buf[320];
  std::snprintf(buf, sizeof buf, "%.8g,%.6g,%d,%d,%.6g,%.8g,%.8g,%.8g,%.8g\n",
                units::s_to_hours(s.time), s.dt, s.last_passes, s.last_newton, s.crack_extent,
                s.peak_c_wtppm, s.peak_sigma_h, s.reaction, s.phi.size() ? s.phi.maxCoeff() : 0.0);
  csv_ << buf;
  csv_.flush();
}

void RunDir::write_result(const harness::TestRecord& rec) {
  nlohmann::json j;
  j["P_N"] = rec.P;
  j["a0_mm"] = rec.a0;
  j["K_MPa_sqrt_m"] = rec.K;
  j["outcome"] = harness::outcome_name(rec.outcome);
  j["time_h"] = rec.time_h;
  j["environment"] = rec.env;
  j["note"] = rec.note;
  j["version"] = version_string();
  std::ofstream out(file("result.json"));
  out << j.dump(2) << "\n";
}

std::string RunDir::frame_path(long index, double time_s) const {
  char name[96];
  std::snprintf(name, sizeof name, "frames/frame_%06ld_t%011.3fh.vtk", index,
                units::s_to_hours(time_s));
  return file(name);
}

void append_campaign_csv(std::ofstream& out, const harness::TestRecord& rec) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.8g,%.5g,%.6g,%s,%s,%.8g\n", rec.P, rec.a0, rec.K,
                rec.env.c_str(), harness::outcome_name(rec.outcome), rec.time_h);
  out << buf;
}

}  // namespace sentsim::io
