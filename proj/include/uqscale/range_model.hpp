#ifndef UQSCALE_RANGE_MODEL_HPP
#define UQSCALE_RANGE_MODEL_HPP

#include "uqscale/atmosphere.hpp"

namespace uqscale {

/// Flight condition for a model evaluation. Velocity is derived, V = Ma a(h).
struct CruiseCondition {
  double mach = 0.84;
  double alpha_deg = 0.0;
  double altitude_m = 10000.0;

  double velocity_m_s() const { return mach * isa_atmosphere(altitude_m).speed_of_sound_m_s; }
};

/// Fixed reference constants behind the lumped range model: an equivalent
/// whole-vehicle weight breakdown, drag polar and engine. Values live in the
/// versioned baseline config; these are the built-in defaults.
struct RangeBaseline {
  // aero reference
  double wing_area_m2 = 740.0;
  double aspect_ratio = 5.6;
  double oswald_e0 = 0.88;
  double cd0 = 0.0075;
  // propulsion
  double tsfc_per_s = 1.58e-4;
  // weight breakdown, kg
  double airframe_weight_kg = 52000.0;
  double engine_weight_kg = 16000.0;
  double fuselage_weight_kg = 30000.0;
  double systems_weight_kg = 22000.0;
  double payload_kg = 35000.0;
  double fuel_capacity_kg = 52000.0;  // at the reference wingbox extent
  // wingbox fuel-volume proxy
  double front_spar_fraction = 0.10;
  double rear_spar_fraction_ref = 0.60;

  static RangeBaseline bwb() { return RangeBaseline{}; }
};

/// The nine lumped uncertainty factors plus the cruise condition. Scale
/// factors are dimensionless multipliers with nominal 1.0; the rear-spar
/// locations are chord fractions.
struct RangeModelInputs {
  double weng = 1.0;    // engine weight scaling
  double owfact = 1.0;  // operational empty weight scaling
  double fact = 1.0;    // fuel-flow (TSFC) scaling
  double fcdi = 1.0;    // lift-dependent drag scaling
  double fcdo = 1.0;    // lift-independent drag scaling
  double frfu = 1.0;    // fuselage weight scaling
  double e_span = 1.0;  // span-efficiency scaling
  double rspsob = 0.60; // rear spar chord fraction, side of body
  double rspchd = 0.60; // rear spar chord fraction, centerline
  CruiseCondition cruise;
  RangeBaseline baseline;
};

/// Breguet range of the lumped vehicle, meters:
///   R = V / (TSFC fact) * (CL/CD) * ln(W0/W1)
/// with the drag build-up CD = fcdo cd0 + fcdi CL^2 / (pi e0 e_span AR),
/// weights scaled by weng/owfact/frfu, and fuel mass proportional to the
/// wingbox chordwise extent implied by (rspsob, rspchd) as a linear proxy.
double lumped_range(const RangeModelInputs& inputs);

}  // namespace uqscale

#endif
