#include "uqscale/similitude.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "uqscale/error.hpp"

namespace uqscale {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw config_error(std::string("similitude: ") + what + " must be positive");
}

}  // namespace

double mass_scale_factor(double density_full, double density_sub, double n) {
  require_positive(density_full, "full-scale density");
  require_positive(density_sub, "sub-scale density");
  if (!(n > 0.0) || n > 1.0)
    throw config_error("similitude: scale n must be in (0, 1]");
  return density_full / density_sub * n * n * n;
}

double bending_parameter(double ei, double density, double velocity, double length) {
  require_positive(ei, "EI");
  require_positive(density, "density");
  require_positive(velocity, "velocity");
  require_positive(length, "length");
  return ei / (density * velocity * velocity * std::pow(length, 4));
}

double torsion_parameter(double gj, double density, double velocity, double length) {
  require_positive(gj, "GJ");
  require_positive(density, "density");
  require_positive(velocity, "velocity");
  require_positive(length, "length");
  return gj / (density * velocity * velocity * std::pow(length, 4));
}

double reynolds_number(double density, double velocity, double length, double viscosity) {
  require_positive(density, "density");
  require_positive(velocity, "velocity");
  require_positive(length, "length");
  require_positive(viscosity, "viscosity");
  return density * velocity * length / viscosity;
}

SimilitudeReport similitude_report(const ScaleReference& full, const ScaleReference& sub,
                                   double n) {
  SimilitudeReport report;
  report.geometric_scale = n;
  report.mass_scale = mass_scale_factor(full.density_kg_m3, sub.density_kg_m3, n);

  const auto add = [&](const std::string& name, double f, double s) {
    SimilitudeGroup g;
    g.name = name;
    g.full_value = f;
    g.sub_value = s;
    g.ratio = s / f;
    g.within_band = std::isfinite(g.ratio) && g.ratio >= 0.9 && g.ratio <= 1.1;
    report.groups.push_back(g);
  };

  add("Re", full.reynolds, sub.reynolds);
  add("Ma", full.mach, sub.mach);
  add("S_b",
      bending_parameter(full.bending_stiffness_nm2, full.density_kg_m3,
                        full.velocity_m_s, full.reference_length_m),
      bending_parameter(sub.bending_stiffness_nm2, sub.density_kg_m3,
                        sub.velocity_m_s, sub.reference_length_m));
  add("S_t",
      torsion_parameter(full.torsional_stiffness_nm2, full.density_kg_m3,
                        full.velocity_m_s, full.reference_length_m),
      torsion_parameter(sub.torsional_stiffness_nm2, sub.density_kg_m3,
                        sub.velocity_m_s, sub.reference_length_m));
  return report;
}

std::string to_json(const SimilitudeReport& report) {
  nlohmann::json j;
  j["geometric_scale"] = report.geometric_scale;
  j["mass_scale"] = report.mass_scale;
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : report.groups)
    groups.push_back({{"name", g.name},
                      {"full", g.full_value},
                      {"sub", g.sub_value},
                      {"ratio", g.ratio},
                      {"within_band", g.within_band}});
  j["groups"] = groups;
  return j.dump(2);
}

void write_table(const SimilitudeReport& report, std::ostream& os) {
  os << "group        full            sub             ratio     in-band\n";
  for (const auto& g : report.groups) {
    std::ostringstream line;
    line << std::left << std::setw(12) << g.name << ' ' << std::scientific
         << std::setprecision(6) << g.full_value << "    " << g.sub_value << "    "
         << std::fixed << std::setprecision(4) << g.ratio << "    "
         << (g.within_band ? "yes" : "no");
    os << line.str() << '\n';
  }
  os << "geometric scale n = " << report.geometric_scale
     << ", mass scale n_mass = " << report.mass_scale << '\n';
}

}  // namespace uqscale
