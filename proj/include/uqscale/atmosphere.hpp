#ifndef UQSCALE_ATMOSPHERE_HPP
#define UQSCALE_ATMOSPHERE_HPP

namespace uqscale {

struct AtmosphereState {
  double altitude_m = 0.0;
  double temperature_k = 0.0;
  double pressure_pa = 0.0;
  double density_kg_m3 = 0.0;
  double speed_of_sound_m_s = 0.0;
  double dynamic_viscosity_pa_s = 0.0;
};

/// International Standard Atmosphere, troposphere and lower stratosphere
/// (geometric altitude 0..20000 m, converted internally to geopotential),
/// with Sutherland's law for viscosity.
AtmosphereState isa_atmosphere(double altitude_m);

}  // namespace uqscale

#endif
