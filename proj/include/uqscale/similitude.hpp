#ifndef UQSCALE_SIMILITUDE_HPP
#define UQSCALE_SIMILITUDE_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace uqscale {

/// Flow and stiffness state of one scale (full or sub) used to evaluate the
/// similarity groups. L is the mean aerodynamic chord throughout.
struct ScaleReference {
  double density_kg_m3 = 0.0;
  double velocity_m_s = 0.0;
  double reference_length_m = 0.0;
  double bending_stiffness_nm2 = 0.0;   // root EI
  double torsional_stiffness_nm2 = 0.0; // root GJ
  double reynolds = 0.0;
  double mach = 0.0;
  double l_over_d = 0.0;
};

/// Mass scale for a sub-scale free-flight model: n_mass = (rho_F / rho_S) n^3.
double mass_scale_factor(double density_full, double density_sub, double n);

/// Aeroelastic bending similarity parameter S_b = EI / (rho V^2 L^4).
double bending_parameter(double ei, double density, double velocity, double length);

/// Aeroelastic torsion similarity parameter S_t = GJ / (rho V^2 L^4).
double torsion_parameter(double gj, double density, double velocity, double length);

/// Re = rho V L / mu.
double reynolds_number(double density, double velocity, double length, double viscosity);

struct SimilitudeGroup {
  std::string name;
  double full_value = 0.0;
  double sub_value = 0.0;
  double ratio = 0.0;  // sub / full
  bool within_band = true;  // ratio in [0.9, 1.1]
};

struct SimilitudeReport {
  std::vector<SimilitudeGroup> groups;  // Re, Ma, S_b, S_t
  double mass_scale = 0.0;              // n_mass
  double geometric_scale = 0.0;         // n
};

SimilitudeReport similitude_report(const ScaleReference& full, const ScaleReference& sub,
                                   double n);

std::string to_json(const SimilitudeReport& report);
void write_table(const SimilitudeReport& report, std::ostream& os);

}  // namespace uqscale

#endif
