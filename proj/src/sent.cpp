#include "sentsim/sent.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "sentsim/units.hpp"

namespace sentsim::harness {

double geometry_factor(double a_over_W) {
  if (!(a_over_W > 0.0) || !(a_over_W < 1.0))
    throw RangeError("geometry_factor: a/W = " + std::to_string(a_over_W) +
                     " outside (0, 1)");
  if (a_over_W < 0.1 || a_over_W > 0.6)
    warnf("geometry_factor: a/W = %.3f outside the validated 0.1-0.6 range", a_over_W);
  const double r = a_over_W;
  return ((((43.367 * r - 99.18) * r + 87.038) * r - 31.762) * r + 8.8764) * r;
}

double applied_k(double P_newton, double B_mm, double W_mm, double a_mm) {
  if (!(B_mm > 0) || !(W_mm > 0)) throw RangeError("applied_k: non-positive section");
  const double k_mpa_sqrt_mm = P_newton / (B_mm * std::sqrt(W_mm)) * geometry_factor(a_mm / W_mm);
  return units::mpa_sqrt_mm_to_m(k_mpa_sqrt_mm);
}

double load_for_k(double k_mpa_sqrt_m, double B_mm, double W_mm, double a_mm) {
  const double f = geometry_factor(a_mm / W_mm);
  return units::mpa_sqrt_m_to_mm(k_mpa_sqrt_m) * B_mm * std::sqrt(W_mm) / f;
}

void SentCase::validate() const {
  material.validate();
  controls.validate();
  if (!(P > 0)) throw ConfigError("SentCase: P must be positive");
  if (!(horizon_h > 0)) throw ConfigError("SentCase: horizon must be positive");
  const double r = a0 / W;
  if (r < 0.2 || r > 0.5)
    throw ConfigError("SentCase: a0/W = " + std::to_string(r) + " outside [0.2, 0.5]");
  if (r < 0.3 || r > 0.4)
    warnf("SentCase: a0/W = %.3f outside the tested 0.3-0.4 band", r);
  schedule.validate();
}

const char* outcome_name(couple::Outcome o) {
  switch (o) {
    case couple::Outcome::intact: return "runout";
    case couple::Outcome::failed: return "failed";
    case couple::Outcome::inconclusive: return "inconclusive";
  }
  return "?";
}

TestRecord run_virtual_test(const SentCase& c, const StepCallback& cb) {
  c.validate();
  if (units::hours_to_s(c.schedule.t_hours.back()) < units::hours_to_s(c.horizon_h))
    warnf("run_virtual_test: schedule (%.0f h) shorter than horizon (%.0f h); clamping at the last knot",
          c.schedule.t_hours.back(), c.horizon_h);

  TestRecord rec;
  rec.P = c.P;
  rec.a0 = c.a0;
  rec.K = applied_k(c.P, c.B, c.W, c.a0);

  const fem::Mesh mesh = fem::build_sent_mesh(c.W, c.half_height, c.a0, c.material.ell, c.mesh);
  couple::CoupledProblem prob(mesh, c.material, c.controls, c.schedule, c.P, c.B, c.mode);
  try {
    const auto rr = prob.run(c.horizon_h, [&](const couple::SimState& s) {
      if (cb) cb(s, prob);
    });
    rec.outcome = rr.outcome;
    rec.time_h = rr.time_h;
    rec.note = rr.note;
  } catch (const StepError& e) {
    // below dt_min without convergence: flagged for review, not censored
    rec.outcome = couple::Outcome::inconclusive;
    rec.time_h = units::s_to_hours(prob.state().time);
    rec.note = e.what();
  }
  return rec;
}

KthResult find_kth(const SentCase& base, double k_min, double k_max, double tol_k,
                   const std::function<void(const TestRecord&)>& on_record) {
  if (!(k_min > 0) || !(k_max > k_min)) throw RangeError("find_kth: bad K range");
  if (!(tol_k > 0)) throw RangeError("find_kth: tolerance must be positive");

  KthResult res;
  auto evaluate = [&](double k) -> TestRecord {
    SentCase c = base;
    c.P = load_for_k(k, base.B, base.W, base.a0);
    TestRecord r = run_virtual_test(c);
    if (r.outcome == couple::Outcome::inconclusive)
      throw StepError("find_kth: inconclusive run at K = " + std::to_string(k) +
                      " (" + r.note + "); review mesh/step controls");
    res.evaluations.push_back(r);
    if (on_record) on_record(res.evaluations.back());
    return r;
  };

  auto check_monotone = [&]() {
    double max_runout = -1, min_fail = 1e300;
    for (const auto& r : res.evaluations) {
      if (r.outcome == couple::Outcome::intact) max_runout = std::max(max_runout, r.K);
      if (r.outcome == couple::Outcome::failed) min_fail = std::min(min_fail, r.K);
    }
    if (max_runout > min_fail)
      throw StateError("find_kth: non-monotone outcomes across the grid (runout at K = " +
                       std::to_string(max_runout) + " above failure at K = " +
                       std::to_string(min_fail) + "); bisection aborted");
  };

  const TestRecord lo_rec = evaluate(k_min);
  if (lo_rec.outcome != couple::Outcome::intact)
    throw RangeError("find_kth: K range does not bracket the threshold (K = " +
                     std::to_string(k_min) + " already fails)");
  const TestRecord hi_rec = evaluate(k_max);
  if (hi_rec.outcome != couple::Outcome::failed)
    throw RangeError("find_kth: K range does not bracket the threshold (K = " +
                     std::to_string(k_max) + " runs out)");

  double lo = k_min, hi = k_max;
  while (hi - lo > tol_k) {
    const double mid = 0.5 * (lo + hi);
    const TestRecord r = evaluate(mid);
    check_monotone();
    (r.outcome == couple::Outcome::failed ? hi : lo) = mid;
  }
  res.K_runout = lo;
  res.K_fail = hi;
  return res;
}

std::vector<TestRecord> run_campaign(const SentCase& base,
                                     const std::vector<CampaignEntry>& entries, int workers) {
  std::vector<TestRecord> records(entries.size());
  std::atomic<std::size_t> next{0};
  workers = std::max(1, std::min<int>(workers, static_cast<int>(entries.size())));

  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= entries.size()) return;
      const CampaignEntry& e = entries[i];
      SentCase c = base;
      if (workers > 1) c.mode = fem::AssemblyMode::serial;  // parallel across runs instead
      if (e.a0 > 0) c.a0 = e.a0;
      if (!e.schedule.t_hours.empty()) c.schedule = e.schedule;
      c.P = e.P > 0 ? e.P : load_for_k(e.K, c.B, c.W, c.a0);
      TestRecord r;
      try {
        r = run_virtual_test(c);
      } catch (const std::exception& ex) {
        // exceptions must not escape worker threads; surface as a flagged record
        r.P = c.P;
        r.a0 = c.a0;
        r.outcome = couple::Outcome::inconclusive;
        r.note = ex.what();
      }
      r.env = e.env_name;
      records[i] = std::move(r);
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return records;
}

std::pair<double, double> kth_interval(const std::vector<TestRecord>& records) {
  double max_runout = -1, min_fail = 1e300;
  for (const auto& r : records) {
    if (r.outcome == couple::Outcome::intact) max_runout = std::max(max_runout, r.K);
    if (r.outcome == couple::Outcome::failed) min_fail = std::min(min_fail, r.K);
  }
  if (max_runout < 0 || min_fail > 1e299)
    throw StateError("kth_interval: need at least one runout and one failure");
  if (max_runout > min_fail)
    throw StateError("kth_interval: inconsistent records (runout above a failure)");
  return {max_runout, min_fail};
}

StationaryReport stationary_crack_study(const SentCase& c, StationaryMode mode,
                                        const std::vector<double>& profile_times_h,
                                        const StepCallback& cb) {
  c.validate();
  diff::EnvSchedule sched = c.schedule;
  if (mode == StationaryMode::constant_cmax)
    sched = diff::EnvSchedule::constant(c.schedule.peak());

  const fem::Mesh mesh = fem::build_sent_mesh(c.W, c.half_height, c.a0, c.material.ell, c.mesh);
  couple::CoupledProblem prob(mesh, c.material, c.controls, sched, c.P, c.B, c.mode,
                              /*evolve_phase=*/false);

  // ligament nodes ahead of the tip, sorted by x
  std::vector<int> ahead;
  for (int n : mesh.ligament)
    if (mesh.X[n] >= mesh.a0 - 1e-9) ahead.push_back(n);
  std::sort(ahead.begin(), ahead.end(), [&](int a, int b) { return mesh.X[a] < mesh.X[b]; });

  StationaryReport rep;
  rep.surface_wtppm = sched.peak();
  std::vector<double> targets = profile_times_h;
  std::sort(targets.begin(), targets.end());
  std::size_t next_target = 0;

  prob.run(c.horizon_h, [&](const couple::SimState& s) {
    const double th = units::s_to_hours(s.time);
    double peak = 0;
    for (int n : ahead) peak = std::max(peak, units::molmm3_to_wtppm(s.conc[n]));
    rep.t_h.push_back(th);
    rep.peak_wtppm.push_back(peak);
    while (next_target < targets.size() && th >= targets[next_target] - 1e-9) {
      std::vector<std::array<double, 2>> prof;
      prof.reserve(ahead.size());
      for (int n : ahead)
        prof.push_back({mesh.X[n] - mesh.a0, units::molmm3_to_wtppm(s.conc[n])});
      rep.profiles.emplace_back(th, std::move(prof));
      ++next_target;
    }
    if (cb) cb(s, prob);
  });
  return rep;
}

}  // namespace sentsim::harness
