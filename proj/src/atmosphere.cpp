#include "uqscale/atmosphere.hpp"

#include <cmath>

#include "uqscale/error.hpp"

namespace uqscale {

namespace {

constexpr double kSeaLevelTemperatureK = 288.15;
constexpr double kSeaLevelPressurePa = 101325.0;
constexpr double kGravity = 9.80665;
constexpr double kGasConstantAir = 287.05287;  // J/(kg K)
constexpr double kGamma = 1.4;
constexpr double kLapseRate = 0.0065;        // K/m, troposphere
constexpr double kTropopauseGeopotM = 11000.0;
constexpr double kEarthRadiusM = 6356766.0;  // for geometric -> geopotential

// Sutherland's law
constexpr double kMuRef = 1.716e-5;
constexpr double kTRef = 273.15;
constexpr double kSutherlandK = 110.4;

}  // namespace

AtmosphereState isa_atmosphere(double altitude_m) {
  if (altitude_m < 0.0 || altitude_m > 20000.0)
    throw model_error("isa_atmosphere: altitude outside [0, 20000] m");

  const double h_gp = kEarthRadiusM * altitude_m / (kEarthRadiusM + altitude_m);

  double temperature;
  double pressure;
  if (h_gp <= kTropopauseGeopotM) {
    temperature = kSeaLevelTemperatureK - kLapseRate * h_gp;
    pressure = kSeaLevelPressurePa *
               std::pow(temperature / kSeaLevelTemperatureK,
                        kGravity / (kLapseRate * kGasConstantAir));
  } else {
    const double t11 = kSeaLevelTemperatureK - kLapseRate * kTropopauseGeopotM;
    const double p11 = kSeaLevelPressurePa *
                       std::pow(t11 / kSeaLevelTemperatureK,
                                kGravity / (kLapseRate * kGasConstantAir));
    temperature = t11;
    pressure = p11 * std::exp(-kGravity * (h_gp - kTropopauseGeopotM) /
                              (kGasConstantAir * t11));
  }

  AtmosphereState out;
  out.altitude_m = altitude_m;
  out.temperature_k = temperature;
  out.pressure_pa = pressure;
  out.density_kg_m3 = pressure / (kGasConstantAir * temperature);
  out.speed_of_sound_m_s = std::sqrt(kGamma * kGasConstantAir * temperature);
  out.dynamic_viscosity_pa_s = kMuRef * std::pow(temperature / kTRef, 1.5) *
                               (kTRef + kSutherlandK) / (temperature + kSutherlandK);
  return out;
}

}  // namespace uqscale
