#ifndef UQSCALE_VEHICLE_CONFIG_HPP
#define UQSCALE_VEHICLE_CONFIG_HPP

#include <string>

#include "uqscale/aerostruct.hpp"
#include "uqscale/range_model.hpp"

namespace uqscale {

/// The versioned set of vehicle constants behind both stand-in models: the
/// equivalent-wing geometry with its two structural variants, the aero and
/// structural settings, and the lumped range baseline.
struct VehicleBaseline {
  std::string version = "1";
  WingGeometry geometry;
  AeroSettings aero;
  StructuralSettings structural;
  double nonstructural_mass_kg = 12000.0;
  double young_modulus_pa = 73.1e9;
  WingboxSection wingbox;
  TubularSpar tubular;
  RangeBaseline range;

  WingModelSpec make_model(bool use_wingbox, MeshLevel mesh) const;
  std::vector<StructureCase> structure_family() const;

  static VehicleBaseline builtin() { return VehicleBaseline{}; }
};

std::string to_json(const VehicleBaseline& baseline);
VehicleBaseline vehicle_baseline_from_json(const std::string& text);
VehicleBaseline load_vehicle_baseline(const std::string& path);

}  // namespace uqscale

#endif
