#include "uqscale/range_model.hpp"

#include <cmath>
#include <numbers>

#include "uqscale/error.hpp"

namespace uqscale {

namespace {

constexpr double kGravity = 9.80665;

void validate(const RangeModelInputs& in) {
  const double factors[] = {in.weng, in.owfact, in.fact, in.fcdi,
                            in.fcdo, in.frfu, in.e_span};
  for (double f : factors)
    if (f < 0.9 || f > 1.1)
      throw config_error("lumped_range: scale factor outside [0.9, 1.1]");
  for (double frac : {in.rspsob, in.rspchd})
    if (frac <= 0.0 || frac >= 1.0)
      throw config_error("lumped_range: rear-spar fraction outside (0, 1)");
  if (in.cruise.mach <= 0.0 || in.cruise.mach >= 1.0)
    throw config_error("lumped_range: Mach must be in (0, 1)");
}

}  // namespace

double lumped_range(const RangeModelInputs& in) {
  validate(in);
  const RangeBaseline& base = in.baseline;

  const double oew = in.owfact * (base.airframe_weight_kg +
                                  in.weng * base.engine_weight_kg +
                                  in.frfu * base.fuselage_weight_kg +
                                  base.systems_weight_kg);

  // Fuel volume follows the wingbox chordwise extent between the fixed front
  // spar and the mean rear-spar location.
  const double rear_mean = 0.5 * (in.rspsob + in.rspchd);
  const double extent_ref = base.rear_spar_fraction_ref - base.front_spar_fraction;
  const double fuel = base.fuel_capacity_kg *
                      (rear_mean - base.front_spar_fraction) / extent_ref;

  const double w0 = oew + base.payload_kg + fuel;
  const double w1 = w0 - fuel;
  if (!(w1 < w0) || w1 <= 0.0) throw model_error("negative fuel fraction");

  const AtmosphereState air = isa_atmosphere(in.cruise.altitude_m);
  const double v = in.cruise.mach * air.speed_of_sound_m_s;
  const double q = 0.5 * air.density_kg_m3 * v * v;

  // Mid-cruise weight for the representative lift coefficient.
  const double w_mid = std::sqrt(w0 * w1) * kGravity;
  const double cl = w_mid / (q * base.wing_area_m2);
  const double cd = in.fcdo * base.cd0 +
                    in.fcdi * cl * cl /
                        (std::numbers::pi * base.oswald_e0 * in.e_span * base.aspect_ratio);

  const double tsfc = base.tsfc_per_s * in.fact;
  return v / tsfc * (cl / cd) * std::log(w0 / w1);
}

}  // namespace uqscale
