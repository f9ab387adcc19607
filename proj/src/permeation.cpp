#include "sentsim/permeation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "sentsim/units.hpp"

namespace sentsim::perm {

double normalized_flux(double tau) {
  if (tau < 0) throw RangeError("normalized_flux: tau must be non-negative");
  if (tau == 0.0) return 0.0;
  double f;
  if (tau < 0.1) {
    // dual (short-time) theta series: 2/sqrt(pi tau) sum exp(-(2k+1)^2/(4 tau))
    f = 0.0;
    const double pref = 2.0 / std::sqrt(M_PI * tau);
    for (int k = 0; k < 10000; ++k) {
      const double m = 2.0 * k + 1.0;
      const double term = pref * std::exp(-m * m / (4.0 * tau));
      f += term;
      if (term < 1e-12) break;
    }
  } else {
    f = 1.0;
    for (int n = 1; n < 10000; ++n) {
      const double term = 2.0 * std::exp(-static_cast<double>(n) * n * M_PI * M_PI * tau);
      f += (n % 2 ? -term : term);
      if (term < 1e-12) break;
    }
  }
  return std::min(1.0, std::max(0.0, f));
}

void PermeationTransient::validate() const {
  if (t_s.size() != j_Am2.size() || t_s.size() < 2)
    throw ConfigError("PermeationTransient: need matching t/j arrays");
  for (std::size_t i = 0; i < t_s.size(); ++i) {
    if (i > 0 && !(t_s[i] > t_s[i - 1]))
      throw ConfigError("PermeationTransient: times must be increasing (sample " +
                        std::to_string(i) + ")");
    if (!std::isfinite(j_Am2[i])) throw ConfigError("PermeationTransient: non-finite current");
  }
  if (!(thickness_m > 0)) throw ConfigError("PermeationTransient: thickness must be positive");
}

PermeationTransient PermeationTransient::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("PermeationTransient: cannot open " + path);
  PermeationTransient tr;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) {
      std::istringstream hs(line.substr(1));
      std::string key, eq;
      if (hs >> key >> eq && eq == "=") {
        std::string rest;
        std::getline(hs, rest);
        rest.erase(0, rest.find_first_not_of(" \t"));
        if (key == "thickness_m")
          tr.thickness_m = std::stod(rest);
        else if (key == "area_m2")
          tr.area_m2 = std::stod(rest);
        else if (key == "label")
          tr.label = rest;
      }
      continue;
    }
    std::istringstream ls(line);
    double t, j;
    if (ls >> t >> j) {
      tr.t_s.push_back(t);
      tr.j_Am2.push_back(j);
    }
  }
  tr.validate();
  return tr;
}

void PermeationTransient::to_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("PermeationTransient: cannot write " + path);
  out << "# thickness_m = " << thickness_m << "\n";
  out << "# area_m2 = " << area_m2 << "\n";
  if (!label.empty()) out << "# label = " << label << "\n";
  out << "# t [s]   j [A/m^2]\n";
  char buf[80];
  for (std::size_t i = 0; i < t_s.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g %.12g\n", t_s[i], j_Am2[i]);
    out << buf;
  }
}

void PermeationFit::validate() const {
  if (!(D_m2s > 0)) throw FitError("PermeationFit: D must be positive");
  if (!(j_inf > j0)) throw FitError("PermeationFit: j_inf must exceed j0");
  if (!(r2 >= 0.0 && r2 <= 1.0)) throw FitError("PermeationFit: R^2 outside [0,1]");
}

namespace {

double decile_mean(const std::vector<double>& v, bool first) {
  const std::size_t n = std::max<std::size_t>(1, v.size() / 10);
  double s = 0;
  if (first)
    s = std::accumulate(v.begin(), v.begin() + n, 0.0);
  else
    s = std::accumulate(v.end() - n, v.end(), 0.0);
  return s / n;
}

double tau_at_63() {
  // normalized_flux(tau63) = 1 - 1/e, solved once by bisection
  static const double tau63 = [] {
    double lo = 1e-4, hi = 5.0;
    const double target = 1.0 - std::exp(-1.0);
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (normalized_flux(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return tau63;
}

}  // namespace

PermeationFit fit_transient(const PermeationTransient& data, const FitOptions& opt) {
  data.validate();

  // Fit window: the rise portion. Auto mode keeps everything up to 1.5x the
  // time of first attainment of 98% of the global maximum.
  std::vector<double> t, j;
  {
    double t_win = opt.window_hours > 0 ? units::hours_to_s(opt.window_hours)
                                        : std::numeric_limits<double>::infinity();
    if (opt.window_hours <= 0) {
      const double j_first = decile_mean(data.j_Am2, true);
      const double j_max = *std::max_element(data.j_Am2.begin(), data.j_Am2.end());
      const double target = j_first + 0.98 * (j_max - j_first);
      for (std::size_t i = 0; i < data.t_s.size(); ++i)
        if (data.j_Am2[i] >= target) {
          t_win = 1.5 * data.t_s[i];
          break;
        }
    }
    for (std::size_t i = 0; i < data.t_s.size(); ++i)
      if (data.t_s[i] <= t_win) {
        t.push_back(data.t_s[i]);
        j.push_back(data.j_Am2[i]);
      }
  }
  if (t.size() < 20) throw FitError("fit_transient: fewer than 20 samples span the rise");

  const double j0_init = decile_mean(j, true);
  const double jinf_init = decile_mean(j, false);

  // Rise detection against the noise floor of the baseline decile.
  {
    const std::size_t n10 = std::max<std::size_t>(1, j.size() / 10);
    double var = 0;
    for (std::size_t i = 0; i < n10; ++i) var += (j[i] - j0_init) * (j[i] - j0_init);
    const double noise = std::sqrt(var / n10);
    if (!(jinf_init - j0_init > 5.0 * std::max(noise, 1e-300)) || !(jinf_init > j0_init))
      throw FitError("fit_transient: no rise detected (amplitude below 5x noise floor)");
  }

  const double l2 = data.thickness_m * data.thickness_m;
  double t63 = t.back();
  for (std::size_t i = 0; i < t.size(); ++i)
    if (j[i] >= j0_init + 0.632 * (jinf_init - j0_init)) {
      t63 = std::max(t[i], t[1]);
      break;
    }
  const double D_init = tau_at_63() * l2 / t63;

  // Levenberg-Marquardt on p = (ln D, j_inf, j0), numeric Jacobian.
  Eigen::Vector3d p(std::log(D_init), jinf_init, j0_init);
  const auto residuals = [&](const Eigen::Vector3d& pp, Eigen::VectorXd& r) {
    const double D = std::exp(pp[0]);
    for (std::size_t i = 0; i < t.size(); ++i)
      r[static_cast<long>(i)] = pp[2] + (pp[1] - pp[2]) * normalized_flux(D * t[i] / l2) - j[i];
  };

  Eigen::VectorXd r(t.size()), r_try(t.size());
  residuals(p, r);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  bool converged = false;

  for (int it = 0; it < opt.max_iter; ++it) {
    Eigen::MatrixXd J(t.size(), 3);
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d ph = p, pl = p;
      const double h = 1e-6 * std::max(1.0, std::abs(p[k]));
      ph[k] += h;
      pl[k] -= h;
      Eigen::VectorXd rh(t.size()), rl(t.size());
      residuals(ph, rh);
      residuals(pl, rl);
      J.col(k) = (rh - rl) / (2 * h);
    }
    const Eigen::Matrix3d JtJ = J.transpose() * J;
    const Eigen::Vector3d g = J.transpose() * r;

    bool accepted = false;
    for (int sub = 0; sub < 25; ++sub) {
      Eigen::Matrix3d A = JtJ;
      A.diagonal() += lambda * JtJ.diagonal();
      const Eigen::Vector3d dp = A.ldlt().solve(-g);
      const Eigen::Vector3d p_try = p + dp;
      residuals(p_try, r_try);
      const double cost_try = r_try.squaredNorm();
      if (cost_try < cost) {
        if (std::abs(cost - cost_try) < 1e-14 * (1.0 + cost) || dp.norm() < 1e-12) converged = true;
        p = p_try;
        r = r_try;
        cost = cost_try;
        lambda = std::max(lambda * 0.3, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted || converged) {
      converged = converged || accepted;
      break;
    }
  }
  const double amp = p[1] - p[2];
  if (!converged && cost > 0.05 * amp * amp * static_cast<double>(t.size()))
    throw FitError("fit_transient: Levenberg-Marquardt did not converge (SSR = " +
                   std::to_string(cost) + ", amplitude = " + std::to_string(amp) + ")");

  PermeationFit fit;
  fit.D_m2s = std::exp(p[0]);
  fit.j_inf = p[1];
  fit.j0 = p[2];
  const double mean_j = std::accumulate(j.begin(), j.end(), 0.0) / j.size();
  double ss_tot = 0;
  for (double v : j) ss_tot += (v - mean_j) * (v - mean_j);
  fit.r2 = ss_tot > 0 ? std::max(0.0, 1.0 - cost / ss_tot) : 0.0;
  fit.validate();
  return fit;
}

double subsurface_concentration_molm3(double j_inf, double l_m, double D_m2s) {
  if (!(l_m > 0) || !(D_m2s > 0))
    throw RangeError("subsurface_concentration: thickness and D must be positive");
  return j_inf * l_m / (units::faraday * D_m2s);
}

double subsurface_concentration_wtppm(double j_inf, double l_m, double D_m2s) {
  return units::molm3_to_wtppm(subsurface_concentration_molm3(j_inf, l_m, D_m2s));
}

double interpolate_h2s(double fraction_pct, std::vector<Anchor> anchors,
                       bool allow_extrapolation) {
  if (anchors.size() < 2) throw ConfigError("interpolate_h2s: need at least two anchors");
  if (!(fraction_pct > 0)) throw RangeError("interpolate_h2s: fraction must be positive");
  std::sort(anchors.begin(), anchors.end(),
            [](const Anchor& a, const Anchor& b) { return a.fraction_pct < b.fraction_pct; });
  for (std::size_t i = 0; i + 1 < anchors.size(); ++i)
    if (!(anchors[i].fraction_pct < anchors[i + 1].fraction_pct))
      throw ConfigError("interpolate_h2s: duplicate anchor fractions");

  for (const auto& a : anchors)
    if (std::abs(std::log10(fraction_pct / a.fraction_pct)) < 1e-12) return a.value;

  std::size_t lo = 0;
  if (fraction_pct < anchors.front().fraction_pct) {
    if (!allow_extrapolation)
      throw RangeError("interpolate_h2s: " + std::to_string(fraction_pct) +
                       "% below the anchor hull (pass allow_extrapolation to override)");
    lo = 0;
  } else if (fraction_pct > anchors.back().fraction_pct) {
    if (!allow_extrapolation)
      throw RangeError("interpolate_h2s: " + std::to_string(fraction_pct) +
                       "% above the anchor hull (pass allow_extrapolation to override)");
    lo = anchors.size() - 2;
  } else {
    while (lo + 2 < anchors.size() && anchors[lo + 1].fraction_pct < fraction_pct) ++lo;
  }
  const double w = std::log10(fraction_pct / anchors[lo].fraction_pct) /
                   std::log10(anchors[lo + 1].fraction_pct / anchors[lo].fraction_pct);
  return anchors[lo].value + (anchors[lo + 1].value - anchors[lo].value) * w;
}

namespace {

// Largest-deviation knot insertion (Douglas-Peucker) until the piecewise
// linear reconstruction stays within tol.
std::vector<std::size_t> select_knots(const std::vector<double>& t, const std::vector<double>& c,
                                      double tol, std::size_t max_knots) {
  std::vector<std::size_t> keep = {0, t.size() - 1};
  for (;;) {
    std::sort(keep.begin(), keep.end());
    double worst = 0;
    std::size_t worst_i = 0;
    for (std::size_t s = 0; s + 1 < keep.size(); ++s) {
      const std::size_t i0 = keep[s], i1 = keep[s + 1];
      for (std::size_t i = i0 + 1; i < i1; ++i) {
        const double w = (t[i] - t[i0]) / (t[i1] - t[i0]);
        const double lin = (1 - w) * c[i0] + w * c[i1];
        const double dev = std::abs(c[i] - lin);
        if (dev > worst) {
          worst = dev;
          worst_i = i;
        }
      }
    }
    if (worst <= tol || keep.size() >= max_knots) break;
    keep.push_back(worst_i);
  }
  std::sort(keep.begin(), keep.end());
  return keep;
}

}  // namespace

diff::EnvSchedule build_env_schedule(const PermeationTransient& data, const PermeationFit& fit,
                                     std::size_t max_knots) {
  data.validate();
  fit.validate();
  std::vector<double> t_h(data.t_s.size()), c(data.t_s.size());
  for (std::size_t i = 0; i < data.t_s.size(); ++i) {
    t_h[i] = units::s_to_hours(data.t_s[i]);
    c[i] = std::max(
        0.0, subsurface_concentration_wtppm(data.j_Am2[i] - fit.j0, data.thickness_m, fit.D_m2s));
  }
  const double peak = *std::max_element(c.begin(), c.end());
  auto keep = select_knots(t_h, c, 0.005 * peak, max_knots);

  // Always retain the peak knot.
  const std::size_t ipeak =
      static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin());
  if (std::find(keep.begin(), keep.end(), ipeak) == keep.end()) {
    keep.push_back(ipeak);
    std::sort(keep.begin(), keep.end());
    if (keep.size() > max_knots) keep.erase(keep.begin() + 1);
  }

  diff::EnvSchedule s;
  for (auto i : keep) {
    s.t_hours.push_back(t_h[i]);
    s.c_wtppm.push_back(c[i]);
  }
  s.validate();

  // Reconstruction check against the raw curve.
  double err = 0;
  for (std::size_t i = 0; i < t_h.size(); ++i)
    err = std::max(err, std::abs(s.eval_wtppm(units::hours_to_s(t_h[i])) - c[i]));
  if (err > 0.02 * peak)
    warnf("build_env_schedule: knot cap forces reconstruction error %.2f%% of peak",
          100.0 * err / peak);
  return s;
}

diff::EnvSchedule interpolate_schedules(double fraction_pct, double f_lo,
                                        const diff::EnvSchedule& lo, double f_hi,
                                        const diff::EnvSchedule& hi, std::size_t max_knots) {
  lo.validate();
  hi.validate();
  std::vector<double> grid = lo.t_hours;
  grid.insert(grid.end(), hi.t_hours.begin(), hi.t_hours.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-9; }),
             grid.end());

  std::vector<double> c(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double ts = units::hours_to_s(grid[i]);
    c[i] = interpolate_h2s(fraction_pct,
                           {{f_lo, lo.eval_wtppm(ts)}, {f_hi, hi.eval_wtppm(ts)}});
    c[i] = std::max(0.0, c[i]);
  }
  const double peak = *std::max_element(c.begin(), c.end());
  const auto keep = select_knots(grid, c, 0.005 * std::max(peak, 1e-12), max_knots);
  diff::EnvSchedule s;
  for (auto i : keep) {
    s.t_hours.push_back(grid[i]);
    s.c_wtppm.push_back(c[i]);
  }
  s.validate();
  return s;
}

}  // namespace sentsim::perm
