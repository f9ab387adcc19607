#pragma once

// Internal unit system: mm, N, MPa (= N/mm^2), s, K, mol/mm^3.
// Concentrations cross the API boundary in wt ppm; toughness in N/mm.

namespace sentsim::units {

constexpr double gas_constant = 8314.0;     // N*mm/(mol*K)  (= 8.314 J/(mol*K))
constexpr double faraday = 96485.33212;     // C/mol
constexpr double rho_steel = 7.87e-3;       // g/mm^3
constexpr double molar_mass_h = 1.008;      // g/mol

// 1 mol/mm^3 of H in steel expressed as a mass fraction in ppm.
constexpr double wtppm_per_molmm3 = molar_mass_h * 1e6 / rho_steel;

constexpr double wtppm_to_molmm3(double c_wtppm) { return c_wtppm / wtppm_per_molmm3; }
constexpr double molmm3_to_wtppm(double c) { return c * wtppm_per_molmm3; }

// mol/m^3 -> wt ppm (permeation analysis works in SI).
constexpr double molm3_to_wtppm(double c_molm3) { return molmm3_to_wtppm(c_molm3 * 1e-9); }

constexpr double hours_to_s(double h) { return h * 3600.0; }
constexpr double s_to_hours(double s) { return s / 3600.0; }

// MPa*sqrt(mm) -> MPa*sqrt(m)
constexpr double mpa_sqrt_mm_to_m(double k) { return k / 31.6227766016838; }
constexpr double mpa_sqrt_m_to_mm(double k) { return k * 31.6227766016838; }

}  // namespace sentsim::units
