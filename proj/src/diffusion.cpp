#include "sentsim/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sentsim/units.hpp"

namespace sentsim::diff {

double effective_diffusivity(double phi, const MaterialParams& m) {
  phi = std::min(1.0, std::max(0.0, phi));
  const double mac = std::max(0.0, phi - m.phi_th);
  return m.D0 * (1.0 + m.k_d * mac);
}

double steady_amplification(double sigma_h, const MaterialParams& m) {
  return std::exp(m.V_H * sigma_h / (m.R() * m.T));
}

void EnvSchedule::validate() const {
  if (t_hours.size() != c_wtppm.size() || t_hours.empty())
    throw ConfigError("EnvSchedule: empty or inconsistent knot arrays");
  for (size_t i = 0; i < t_hours.size(); ++i) {
    if (i > 0 && !(t_hours[i] > t_hours[i - 1]))
      throw ConfigError("EnvSchedule: times must be strictly increasing (knot " +
                        std::to_string(i) + ")");
    if (c_wtppm[i] < 0)
      throw ConfigError("EnvSchedule: negative concentration at knot " + std::to_string(i));
  }
}

double EnvSchedule::eval_wtppm(double t_seconds) const {
  const double t = units::s_to_hours(t_seconds);
  if (t <= t_hours.front()) return c_wtppm.front();
  if (t >= t_hours.back()) return c_wtppm.back();
  const auto it = std::upper_bound(t_hours.begin(), t_hours.end(), t);
  const size_t i = static_cast<size_t>(it - t_hours.begin());
  const double w = (t - t_hours[i - 1]) / (t_hours[i] - t_hours[i - 1]);
  return (1.0 - w) * c_wtppm[i - 1] + w * c_wtppm[i];
}

double EnvSchedule::peak() const {
  return *std::max_element(c_wtppm.begin(), c_wtppm.end());
}

EnvSchedule EnvSchedule::constant(double c) {
  EnvSchedule s;
  s.t_hours = {0.0, 1.0};
  s.c_wtppm = {c, c};
  return s;
}

EnvSchedule EnvSchedule::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("EnvSchedule: cannot open " + path);
  EnvSchedule s;
  std::string line;
  while (std::getline(in, line)) {
    const auto h = line.find('#');
    if (h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    double t, c;
    if (ls >> t >> c) {
      s.t_hours.push_back(t);
      s.c_wtppm.push_back(c);
    }
  }
  s.validate();
  return s;
}

void EnvSchedule::to_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("EnvSchedule: cannot write " + path);
  out << "# time [h]   C_env [wt ppm]\n";
  char buf[64];
  for (size_t i = 0; i < t_hours.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g %.10g\n", t_hours[i], c_wtppm[i]);
    out << buf;
  }
}

}  // namespace sentsim::diff
