#include "uqscale/vehicle_config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "uqscale/error.hpp"

namespace uqscale {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) {
        known = true;
        break;
      }
    if (!known) throw config_error("unknown key '" + key + "' in " + where);
  }
}

double get_num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw config_error(std::string("key '") + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace

WingModelSpec VehicleBaseline::make_model(bool use_wingbox, MeshLevel mesh) const {
  WingModelSpec m;
  m.geometry = geometry;
  if (use_wingbox)
    m.structure = wingbox;
  else
    m.structure = tubular;
  m.mesh = mesh;
  m.aero = aero;
  m.structural = structural;
  m.nonstructural_mass_kg = nonstructural_mass_kg;
  m.young_modulus_pa = young_modulus_pa;
  return m;
}

std::vector<StructureCase> VehicleBaseline::structure_family() const {
  return {
      {"tubular_spar_coarse", make_model(false, MeshLevel::coarse)},
      {"tubular_spar_medium", make_model(false, MeshLevel::medium)},
      {"wingbox_coarse", make_model(true, MeshLevel::coarse)},
      {"wingbox_medium", make_model(true, MeshLevel::medium)},
      {"wingbox_fine", make_model(true, MeshLevel::fine)},
  };
}

std::string to_json(const VehicleBaseline& b) {
  json j;
  j["version"] = b.version;
  j["geometry"] = {{"span_m", b.geometry.span_m},
                   {"root_chord_m", b.geometry.root_chord_m},
                   {"tip_chord_m", b.geometry.tip_chord_m},
                   {"sweep_deg", b.geometry.sweep_deg},
                   {"thickness_ratio", b.geometry.thickness_ratio}};
  j["aero"] = {{"oswald_e", b.aero.oswald_e},
               {"slope_e", b.aero.slope_e},
               {"cd0_misc", b.aero.cd0_misc},
               {"wetted_area_ratio", b.aero.wetted_area_ratio},
               {"korn_kappa", b.aero.korn_kappa},
               {"wave_cl_ref", b.aero.wave_cl_ref}};
  j["structural"] = {{"material_density_kg_m3", b.structural.material_density_kg_m3},
                     {"poisson_ratio", b.structural.poisson_ratio},
                     {"relaxation", b.structural.relaxation},
                     {"tolerance", b.structural.tolerance},
                     {"max_iterations", b.structural.max_iterations}};
  j["nonstructural_mass_kg"] = b.nonstructural_mass_kg;
  j["young_modulus_pa"] = b.young_modulus_pa;
  j["wingbox"] = {{"front_spar_fraction", b.wingbox.front_spar_fraction},
                  {"rear_spar_fraction", b.wingbox.rear_spar_fraction},
                  {"skin_thickness_m", b.wingbox.skin_thickness_m},
                  {"web_thickness_m", b.wingbox.web_thickness_m}};
  j["tubular_spar"] = {{"root_diameter_m", b.tubular.root_diameter_m},
                       {"tip_diameter_m", b.tubular.tip_diameter_m},
                       {"wall_thickness_m", b.tubular.wall_thickness_m},
                       {"axis_chord_fraction", b.tubular.axis_chord_fraction}};
  j["range"] = {{"wing_area_m2", b.range.wing_area_m2},
                {"aspect_ratio", b.range.aspect_ratio},
                {"oswald_e0", b.range.oswald_e0},
                {"cd0", b.range.cd0},
                {"tsfc_per_s", b.range.tsfc_per_s},
                {"airframe_weight_kg", b.range.airframe_weight_kg},
                {"engine_weight_kg", b.range.engine_weight_kg},
                {"fuselage_weight_kg", b.range.fuselage_weight_kg},
                {"systems_weight_kg", b.range.systems_weight_kg},
                {"payload_kg", b.range.payload_kg},
                {"fuel_capacity_kg", b.range.fuel_capacity_kg},
                {"front_spar_fraction", b.range.front_spar_fraction},
                {"rear_spar_fraction_ref", b.range.rear_spar_fraction_ref}};
  return j.dump(2);
}

VehicleBaseline vehicle_baseline_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("vehicle baseline: invalid JSON: ") + e.what());
  }
  VehicleBaseline b;
  try {
  reject_unknown_keys(j, {"version", "geometry", "aero", "structural",
                          "nonstructural_mass_kg", "young_modulus_pa", "wingbox",
                          "tubular_spar", "range"},
                      "vehicle baseline");
  if (j.contains("version")) b.version = j.at("version").get<std::string>();
  if (j.contains("geometry")) {
    const auto& g = j.at("geometry");
    reject_unknown_keys(g, {"span_m", "root_chord_m", "tip_chord_m", "sweep_deg",
                            "thickness_ratio"},
                        "geometry");
    b.geometry.span_m = get_num(g, "span_m", b.geometry.span_m);
    b.geometry.root_chord_m = get_num(g, "root_chord_m", b.geometry.root_chord_m);
    b.geometry.tip_chord_m = get_num(g, "tip_chord_m", b.geometry.tip_chord_m);
    b.geometry.sweep_deg = get_num(g, "sweep_deg", b.geometry.sweep_deg);
    b.geometry.thickness_ratio = get_num(g, "thickness_ratio", b.geometry.thickness_ratio);
  }
  if (j.contains("aero")) {
    const auto& a = j.at("aero");
    reject_unknown_keys(a, {"oswald_e", "slope_e", "cd0_misc", "wetted_area_ratio",
                            "korn_kappa", "wave_cl_ref"},
                        "aero");
    b.aero.oswald_e = get_num(a, "oswald_e", b.aero.oswald_e);
    b.aero.slope_e = get_num(a, "slope_e", b.aero.slope_e);
    b.aero.cd0_misc = get_num(a, "cd0_misc", b.aero.cd0_misc);
    b.aero.wetted_area_ratio = get_num(a, "wetted_area_ratio", b.aero.wetted_area_ratio);
    b.aero.korn_kappa = get_num(a, "korn_kappa", b.aero.korn_kappa);
    b.aero.wave_cl_ref = get_num(a, "wave_cl_ref", b.aero.wave_cl_ref);
  }
  if (j.contains("structural")) {
    const auto& s = j.at("structural");
    reject_unknown_keys(s, {"material_density_kg_m3", "poisson_ratio", "relaxation",
                            "tolerance", "max_iterations"},
                        "structural");
    b.structural.material_density_kg_m3 =
        get_num(s, "material_density_kg_m3", b.structural.material_density_kg_m3);
    b.structural.poisson_ratio = get_num(s, "poisson_ratio", b.structural.poisson_ratio);
    b.structural.relaxation = get_num(s, "relaxation", b.structural.relaxation);
    b.structural.tolerance = get_num(s, "tolerance", b.structural.tolerance);
    b.structural.max_iterations = static_cast<int>(
        get_num(s, "max_iterations", b.structural.max_iterations));
  }
  b.nonstructural_mass_kg = get_num(j, "nonstructural_mass_kg", b.nonstructural_mass_kg);
  b.young_modulus_pa = get_num(j, "young_modulus_pa", b.young_modulus_pa);
  if (j.contains("wingbox")) {
    const auto& w = j.at("wingbox");
    reject_unknown_keys(w, {"front_spar_fraction", "rear_spar_fraction",
                            "skin_thickness_m", "web_thickness_m"},
                        "wingbox");
    b.wingbox.front_spar_fraction = get_num(w, "front_spar_fraction", b.wingbox.front_spar_fraction);
    b.wingbox.rear_spar_fraction = get_num(w, "rear_spar_fraction", b.wingbox.rear_spar_fraction);
    b.wingbox.skin_thickness_m = get_num(w, "skin_thickness_m", b.wingbox.skin_thickness_m);
    b.wingbox.web_thickness_m = get_num(w, "web_thickness_m", b.wingbox.web_thickness_m);
  }
  if (j.contains("tubular_spar")) {
    const auto& t = j.at("tubular_spar");
    reject_unknown_keys(t, {"root_diameter_m", "tip_diameter_m", "wall_thickness_m",
                            "axis_chord_fraction"},
                        "tubular_spar");
    b.tubular.root_diameter_m = get_num(t, "root_diameter_m", b.tubular.root_diameter_m);
    b.tubular.tip_diameter_m = get_num(t, "tip_diameter_m", b.tubular.tip_diameter_m);
    b.tubular.wall_thickness_m = get_num(t, "wall_thickness_m", b.tubular.wall_thickness_m);
    b.tubular.axis_chord_fraction =
        get_num(t, "axis_chord_fraction", b.tubular.axis_chord_fraction);
  }
  if (j.contains("range")) {
    const auto& r = j.at("range");
    reject_unknown_keys(r, {"wing_area_m2", "aspect_ratio", "oswald_e0", "cd0",
                            "tsfc_per_s", "airframe_weight_kg", "engine_weight_kg",
                            "fuselage_weight_kg", "systems_weight_kg", "payload_kg",
                            "fuel_capacity_kg", "front_spar_fraction",
                            "rear_spar_fraction_ref"},
                        "range");
    b.range.wing_area_m2 = get_num(r, "wing_area_m2", b.range.wing_area_m2);
    b.range.aspect_ratio = get_num(r, "aspect_ratio", b.range.aspect_ratio);
    b.range.oswald_e0 = get_num(r, "oswald_e0", b.range.oswald_e0);
    b.range.cd0 = get_num(r, "cd0", b.range.cd0);
    b.range.tsfc_per_s = get_num(r, "tsfc_per_s", b.range.tsfc_per_s);
    b.range.airframe_weight_kg = get_num(r, "airframe_weight_kg", b.range.airframe_weight_kg);
    b.range.engine_weight_kg = get_num(r, "engine_weight_kg", b.range.engine_weight_kg);
    b.range.fuselage_weight_kg = get_num(r, "fuselage_weight_kg", b.range.fuselage_weight_kg);
    b.range.systems_weight_kg = get_num(r, "systems_weight_kg", b.range.systems_weight_kg);
    b.range.payload_kg = get_num(r, "payload_kg", b.range.payload_kg);
    b.range.fuel_capacity_kg = get_num(r, "fuel_capacity_kg", b.range.fuel_capacity_kg);
    b.range.front_spar_fraction = get_num(r, "front_spar_fraction", b.range.front_spar_fraction);
    b.range.rear_spar_fraction_ref =
        get_num(r, "rear_spar_fraction_ref", b.range.rear_spar_fraction_ref);
  }
  } catch (const json::exception& e) {
    throw config_error(std::string("vehicle baseline: ") + e.what());
  }
  return b;
}

VehicleBaseline load_vehicle_baseline(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open vehicle baseline file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return vehicle_baseline_from_json(buf.str());
}

}  // namespace uqscale
