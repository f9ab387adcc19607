#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "sentsim/coupling.hpp"
#include "sentsim/mesh.hpp"

namespace sentsim::harness {

/// SENT geometry factor f(a/W), quintic polynomial for the clamped
/// configuration. Hard domain (0,1); warns outside the validated 0.1-0.6 band.
double geometry_factor(double a_over_W);

/// K_I = P/(B sqrt(W)) f(a/W), returned in MPa sqrt(m).
double applied_k(double P_newton, double B_mm, double W_mm, double a_mm);

/// Inverse of applied_k at fixed geometry.
double load_for_k(double k_mpa_sqrt_m, double B_mm, double W_mm, double a_mm);

/// One virtual SENT test: geometry, environment, load and solver settings.
struct SentCase {
  MaterialParams material;
  couple::StepControls controls;
  fem::MeshParams mesh;
  double W = 7.0, B = 7.0, a0 = 2.45, half_height = 12.7;  // mm
  double horizon_h = 720.0;
  diff::EnvSchedule schedule;
  double P = 0.0;  // N
  fem::AssemblyMode mode = fem::AssemblyMode::serial;

  void validate() const;
};

struct TestRecord {
  double P = 0.0;
  double a0 = 0.0;
  double K = 0.0;  // MPa sqrt(m)
  couple::Outcome outcome = couple::Outcome::intact;
  double time_h = 0.0;
  std::string env;
  std::string note;
};

const char* outcome_name(couple::Outcome o);

using StepCallback =
    std::function<void(const couple::SimState&, const couple::CoupledProblem&)>;

TestRecord run_virtual_test(const SentCase& c, const StepCallback& cb = {});

struct KthResult {
  double K_runout = 0.0;  // largest K that ran out
  double K_fail = 0.0;    // smallest K that failed
  std::vector<TestRecord> evaluations;
};

/// Bisection on the applied load (K derived at fixed a0) between a running-out
/// k_min and a failing k_max, until the bracket width is at most tol_k.
KthResult find_kth(const SentCase& base, double k_min, double k_max, double tol_k,
                   const std::function<void(const TestRecord&)>& on_record = {});

struct CampaignEntry {
  double P = 0.0;  // N; if 0, K is used
  double K = 0.0;
  double a0 = 0.0;  // 0 = base case value
  std::string env_name;
  diff::EnvSchedule schedule;  // empty = base case schedule
};

/// Independent constant-load tests executed by a bounded worker pool; records
/// come back in manifest order.
std::vector<TestRecord> run_campaign(const SentCase& base, const std::vector<CampaignEntry>& entries,
                                     int workers);

/// K_th interval from a set of records of one environment: largest runout and
/// smallest failure. Throws StateError when the records are inconsistent.
std::pair<double, double> kth_interval(const std::vector<TestRecord>& records);

enum class StationaryMode { constant_cmax, scheduled };

struct StationaryReport {
  double surface_wtppm = 0.0;  // peak boundary concentration of the applied mode
  std::vector<double> t_h;
  std::vector<double> peak_wtppm;  // max C on the ligament ahead of the tip
  // (time, [(distance ahead of tip, C in wt ppm)])
  std::vector<std::pair<double, std::vector<std::array<double, 2>>>> profiles;
};

/// Deformation-diffusion run with phi frozen at its initial field.
StationaryReport stationary_crack_study(const SentCase& c, StationaryMode mode,
                                        const std::vector<double>& profile_times_h,
                                        const StepCallback& cb = {});

}  // namespace sentsim::harness
