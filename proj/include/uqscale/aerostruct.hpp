#ifndef UQSCALE_AEROSTRUCT_HPP
#define UQSCALE_AEROSTRUCT_HPP

#include <string>
#include <variant>
#include <vector>

#include "uqscale/param_space.hpp"
#include "uqscale/range_model.hpp"

namespace uqscale {

enum class MeshLevel { coarse, medium, fine };

/// Spanwise stations used for both aero strips and beam elements.
int mesh_strip_count(MeshLevel level);
std::string to_string(MeshLevel level);
MeshLevel mesh_from_string(const std::string& s);

/// Circular spar with linearly tapered outer diameter and constant wall.
struct TubularSpar {
  double root_diameter_m = 0.46;
  double tip_diameter_m = 0.18;
  double wall_thickness_m = 0.016;
  double axis_chord_fraction = 0.35;
};

/// Thin-walled rectangular box between the spar chord fractions. Gauges are
/// the equivalent uniform thickness of the load-carrying material (fixed
/// sizing, no stress-driven loop).
struct WingboxSection {
  double front_spar_fraction = 0.10;
  double rear_spar_fraction = 0.60;
  double skin_thickness_m = 0.0013;
  double web_thickness_m = 0.0018;
};

/// Equivalent swept tapered wing standing in for the BWB planform
/// (vertical surfaces ignored; centerbody lumped into cd0_misc).
struct WingGeometry {
  double span_m = 23.1;
  double root_chord_m = 5.47;
  double tip_chord_m = 1.64;
  double sweep_deg = 32.0;
  double thickness_ratio = 0.11;

  double taper() const { return tip_chord_m / root_chord_m; }
  double area_m2() const { return 0.5 * span_m * (root_chord_m + tip_chord_m); }
  double aspect_ratio() const { return span_m * span_m / area_m2(); }
  double mean_aero_chord_m() const;
  double chord_at(double y) const;  // y in [0, span/2]
};

struct AeroSettings {
  double oswald_e = 0.88;     // induced drag span efficiency
  double slope_e = 0.97;      // lifting-line slope correction factor
  double cd0_misc = 0.0080;   // centerbody/nacelle allowance
  double wetted_area_ratio = 2.06;
  double korn_kappa = 0.89;   // airfoil technology factor
  double wave_cl_ref = 0.40;  // fixed CL used in the drag-divergence estimate
  bool include_friction = true;
  bool include_induced = true;
  bool include_wave = true;
};

struct StructuralSettings {
  double material_density_kg_m3 = 2700.0;
  double poisson_ratio = 0.33;
  double relaxation = 0.35;  // fixed-point under-relaxation factor
  double tolerance = 1e-6;   // relative change on the deformation state
  int max_iterations = 50;
};

struct WingModelSpec {
  WingGeometry geometry;
  std::variant<TubularSpar, WingboxSection> structure = WingboxSection{};
  double young_modulus_pa = 73.1e9;
  MeshLevel mesh = MeshLevel::medium;
  AeroSettings aero;
  StructuralSettings structural;
  /// Fuel/system mass carried by the wing (both halves), distributed along
  /// the span proportionally to chord; relieves the aerodynamic loads.
  double nonstructural_mass_kg = 12000.0;

  double shear_modulus_pa() const {
    return young_modulus_pa / (2.0 * (1.0 + structural.poisson_ratio));
  }
  bool is_wingbox() const { return std::holds_alternative<WingboxSection>(structure); }

  /// Sub-scale derivative: all lengths scaled by n, carried mass by
  /// mass_scale. Material and aero settings are unchanged.
  WingModelSpec scaled(double n, double mass_scale) const;

  static WingModelSpec bwb_tubular(MeshLevel level);
  static WingModelSpec bwb_wingbox(MeshLevel level);
};

struct AeroStructResult {
  double cl = 0.0;
  double cd = 0.0;
  double l_over_d = 0.0;
  double reynolds = 0.0;  // reference length = mean aerodynamic chord
  double wing_mass_kg = 0.0;
  double root_ei = 0.0;
  double root_gj = 0.0;
  double tip_deflection_m = 0.0;
  double tip_twist_deg = 0.0;
  bool converged = false;
  int iterations = 0;
  double runtime_s = 0.0;
};

/// Strip-theory aerodynamics (Prandtl-Glauert swept lift slope, induced drag
/// CL^2/(pi e AR), turbulent flat-plate friction, Korn wave increment)
/// coupled to an Euler-Bernoulli / St. Venant cantilever beam by damped
/// fixed-point iteration on the deformation state. Throws model_error
/// ("evaluation failed") on non-finite intermediates; a diverged fixed point
/// returns converged = false with the last iterate.
AeroStructResult evaluate_aerostruct(const WingModelSpec& model, const CruiseCondition& cond);

/// Direct cantilever solvers shared with the coupled model, exposed for
/// verification against closed-form beam results.
namespace beam {
/// Nodes y[0..m]; ei at nodes; load constant per element (N/m); optional tip
/// point load (N). Returns deflection and slope at nodes.
struct BendingSolution {
  std::vector<double> deflection;
  std::vector<double> slope;
};
BendingSolution cantilever_bending(const std::vector<double>& y_nodes,
                                   const std::vector<double>& ei_nodes,
                                   const std::vector<double>& element_loads,
                                   double tip_load = 0.0);
/// Torque constant per element (N m / m); optional tip point torque (N m).
std::vector<double> cantilever_torsion(const std::vector<double>& y_nodes,
                                       const std::vector<double>& gj_nodes,
                                       const std::vector<double>& element_torques,
                                       double tip_torque = 0.0);
}  // namespace beam

/// One named structural variant of the shared planform.
struct StructureCase {
  std::string label;
  WingModelSpec model;
};
/// The five standard variants: tubular spar (coarse, medium) and wingbox
/// (coarse, medium, fine).
std::vector<StructureCase> bwb_structure_family();

struct LdStudyRow {
  std::size_t row = 0;
  std::string structure;
  double cl = 0.0, cd = 0.0, l_over_d = 0.0;
  double runtime_s = 0.0;
  bool ok = true;
};
struct LdStudySummary {
  std::string structure;
  std::size_t evaluated = 0;
  std::size_t failures = 0;
  double mean_ld = 0.0;
  double std_ld = 0.0;
  double mean_runtime_s = 0.0;
};
struct LdStudyOutput {
  std::vector<LdStudyRow> rows;
  std::vector<LdStudySummary> summary;
};

/// Evaluates every structure on the identical sample rows. The shared matrix
/// must provide columns alpha, mach, structure_location, young_modulus
/// (structure_location is the rear-spar chord fraction; tubular variants put
/// their spar axis at the midpoint of the implied box). Rows may be evaluated
/// concurrently; results are assembled in row order and are bit-identical to
/// sequential execution.
LdStudyOutput ld_variability_study(const std::vector<StructureCase>& structures,
                                   const SampleMatrix& shared, double altitude_m,
                                   int threads = 1);

}  // namespace uqscale

#endif
