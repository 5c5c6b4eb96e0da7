#include "uqscale/aerostruct.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <thread>

#include "uqscale/error.hpp"

namespace uqscale {

namespace {

constexpr double kGravity = 9.80665;
constexpr double kPi = std::numbers::pi;

struct SectionProps {
  double bending_inertia;  // m^4
  double torsion_constant; // m^4
  double area;             // m^2
};

SectionProps section_at(const WingModelSpec& model, double y) {
  const double c = model.geometry.chord_at(y);
  if (const auto* tube = std::get_if<TubularSpar>(&model.structure)) {
    const double s = model.geometry.span_m / 2.0;
    const double d_out = tube->root_diameter_m +
                         (tube->tip_diameter_m - tube->root_diameter_m) * (y / s);
    const double d_in = std::max(d_out - 2.0 * tube->wall_thickness_m, 0.0);
    const double i = kPi / 64.0 * (std::pow(d_out, 4) - std::pow(d_in, 4));
    const double a = kPi / 4.0 * (d_out * d_out - d_in * d_in);
    return {i, 2.0 * i, a};
  }
  const auto& box = std::get<WingboxSection>(model.structure);
  const double width = (box.rear_spar_fraction - box.front_spar_fraction) * c;
  const double height = 0.75 * model.geometry.thickness_ratio * c;
  const double ts = box.skin_thickness_m;
  const double tw = box.web_thickness_m;
  // Thin-walled box: skins carry bending about the mid-plane, webs add their
  // own inertia; Bredt-Batho for torsion.
  const double i = width * ts * height * height / 2.0 + tw * std::pow(height, 3) / 6.0;
  const double j = 2.0 * width * width * height * height / (width / ts + height / tw);
  const double a = 2.0 * (width * ts + height * tw);
  return {i, j, a};
}

double elastic_axis_fraction(const WingModelSpec& model) {
  if (const auto* tube = std::get_if<TubularSpar>(&model.structure))
    return tube->axis_chord_fraction;
  const auto& box = std::get<WingboxSection>(model.structure);
  return 0.5 * (box.front_spar_fraction + box.rear_spar_fraction);
}

void require_valid(const WingModelSpec& model) {
  const auto& g = model.geometry;
  if (g.span_m <= 0 || g.root_chord_m <= 0 || g.tip_chord_m <= 0 ||
      g.thickness_ratio <= 0)
    throw config_error("wing model: geometry must be positive");
  if (model.young_modulus_pa <= 0)
    throw config_error("wing model: Young's modulus must be positive");
  if (const auto* box = std::get_if<WingboxSection>(&model.structure)) {
    if (!(box->front_spar_fraction < box->rear_spar_fraction))
      throw config_error("wing model: front spar fraction must be < rear");
    if (box->skin_thickness_m <= 0 || box->web_thickness_m <= 0)
      throw config_error("wing model: wingbox thickness must be positive");
  } else {
    const auto& tube = std::get<TubularSpar>(model.structure);
    if (tube.wall_thickness_m <= 0 || tube.root_diameter_m <= 0 ||
        tube.tip_diameter_m <= 0)
      throw config_error("wing model: tubular spar dimensions must be positive");
  }
}

}  // namespace

double WingGeometry::mean_aero_chord_m() const {
  const double l = taper();
  return (2.0 / 3.0) * root_chord_m * (1.0 + l + l * l) / (1.0 + l);
}

double WingGeometry::chord_at(double y) const {
  const double s = span_m / 2.0;
  return root_chord_m + (tip_chord_m - root_chord_m) * (y / s);
}

int mesh_strip_count(MeshLevel level) {
  switch (level) {
    case MeshLevel::coarse: return 10;
    case MeshLevel::medium: return 20;
    case MeshLevel::fine: return 40;
  }
  return 20;
}

std::string to_string(MeshLevel level) {
  switch (level) {
    case MeshLevel::coarse: return "coarse";
    case MeshLevel::medium: return "medium";
    case MeshLevel::fine: return "fine";
  }
  return "medium";
}

MeshLevel mesh_from_string(const std::string& s) {
  if (s == "coarse") return MeshLevel::coarse;
  if (s == "medium") return MeshLevel::medium;
  if (s == "fine") return MeshLevel::fine;
  throw config_error("unknown mesh level '" + s + "'");
}

WingModelSpec WingModelSpec::scaled(double n, double mass_scale) const {
  if (!(n > 0.0)) throw config_error("wing model: scale must be positive");
  WingModelSpec out = *this;
  out.geometry.span_m *= n;
  out.geometry.root_chord_m *= n;
  out.geometry.tip_chord_m *= n;
  if (auto* tube = std::get_if<TubularSpar>(&out.structure)) {
    tube->root_diameter_m *= n;
    tube->tip_diameter_m *= n;
    tube->wall_thickness_m *= n;
  } else {
    auto& box = std::get<WingboxSection>(out.structure);
    box.skin_thickness_m *= n;
    box.web_thickness_m *= n;
  }
  out.nonstructural_mass_kg *= mass_scale;
  return out;
}

WingModelSpec WingModelSpec::bwb_tubular(MeshLevel level) {
  WingModelSpec m;
  m.structure = TubularSpar{};
  m.mesh = level;
  return m;
}

WingModelSpec WingModelSpec::bwb_wingbox(MeshLevel level) {
  WingModelSpec m;
  m.structure = WingboxSection{};
  m.mesh = level;
  return m;
}

namespace beam {

BendingSolution cantilever_bending(const std::vector<double>& y_nodes,
                                   const std::vector<double>& ei_nodes,
                                   const std::vector<double>& element_loads,
                                   double tip_load) {
  const std::size_t m = element_loads.size();
  if (y_nodes.size() != m + 1 || ei_nodes.size() != m + 1)
    throw config_error("cantilever_bending: inconsistent grid sizes");

  std::vector<double> shear(m + 1, 0.0), moment(m + 1, 0.0);
  shear[m] = tip_load;
  for (std::size_t i = m; i-- > 0;) {
    const double dy = y_nodes[i + 1] - y_nodes[i];
    shear[i] = shear[i + 1] + element_loads[i] * dy;
    moment[i] = moment[i + 1] + shear[i + 1] * dy + element_loads[i] * dy * dy / 2.0;
  }

  std::vector<double> curvature(m + 1);
  for (std::size_t i = 0; i <= m; ++i) curvature[i] = moment[i] / ei_nodes[i];

  BendingSolution out;
  out.slope.assign(m + 1, 0.0);
  out.deflection.assign(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double dy = y_nodes[i + 1] - y_nodes[i];
    out.slope[i + 1] = out.slope[i] + 0.5 * (curvature[i] + curvature[i + 1]) * dy;
    out.deflection[i + 1] =
        out.deflection[i] + 0.5 * (out.slope[i] + out.slope[i + 1]) * dy;
  }
  return out;
}

std::vector<double> cantilever_torsion(const std::vector<double>& y_nodes,
                                       const std::vector<double>& gj_nodes,
                                       const std::vector<double>& element_torques,
                                       double tip_torque) {
  const std::size_t m = element_torques.size();
  if (y_nodes.size() != m + 1 || gj_nodes.size() != m + 1)
    throw config_error("cantilever_torsion: inconsistent grid sizes");

  std::vector<double> torque(m + 1, 0.0);
  torque[m] = tip_torque;
  for (std::size_t i = m; i-- > 0;) {
    const double dy = y_nodes[i + 1] - y_nodes[i];
    torque[i] = torque[i + 1] + element_torques[i] * dy;
  }
  std::vector<double> rate(m + 1), twist(m + 1, 0.0);
  for (std::size_t i = 0; i <= m; ++i) rate[i] = torque[i] / gj_nodes[i];
  for (std::size_t i = 0; i < m; ++i) {
    const double dy = y_nodes[i + 1] - y_nodes[i];
    twist[i + 1] = twist[i] + 0.5 * (rate[i] + rate[i + 1]) * dy;
  }
  return twist;
}

}  // namespace beam

AeroStructResult evaluate_aerostruct(const WingModelSpec& model,
                                     const CruiseCondition& cond) {
  const auto t_start = std::chrono::steady_clock::now();
  require_valid(model);
  if (cond.mach <= 0.0 || cond.mach >= 1.0)
    throw config_error("evaluate_aerostruct: Mach must be in (0, 1)");

  const AtmosphereState air = isa_atmosphere(cond.altitude_m);
  const double v = cond.mach * air.speed_of_sound_m_s;
  const double q = 0.5 * air.density_kg_m3 * v * v;

  const WingGeometry& geo = model.geometry;
  const double semi_span = geo.span_m / 2.0;
  const double area = geo.area_m2();
  const double ar = geo.aspect_ratio();
  const double sweep = geo.sweep_deg * kPi / 180.0;
  const double cos_sweep = std::cos(sweep);
  const double sin_sweep = std::sin(sweep);

  // Swept-wing lift-curve slope with Prandtl-Glauert correction on the
  // Mach component normal to the quarter-chord line.
  const double mach_normal = std::min(cond.mach * cos_sweep, 0.95);
  const double beta = std::sqrt(1.0 - mach_normal * mach_normal);
  const double a2d = 2.0 * kPi * cos_sweep / beta;
  const double a3d =
      a2d / (1.0 + a2d / (kPi * model.aero.slope_e * ar));

  const int m = mesh_strip_count(model.mesh);
  const double dy = semi_span / m;
  std::vector<double> y_nodes(m + 1), ei_nodes(m + 1), gj_nodes(m + 1);
  const double shear_mod = model.shear_modulus_pa();
  for (int i = 0; i <= m; ++i) {
    y_nodes[i] = dy * i;
    const SectionProps sp = section_at(model, y_nodes[i]);
    ei_nodes[i] = model.young_modulus_pa * sp.bending_inertia;
    gj_nodes[i] = shear_mod * sp.torsion_constant;
  }

  std::vector<double> chord_mid(m), mass_per_span(m);
  double structural_mass_half = 0.0;
  for (int k = 0; k < m; ++k) {
    const double y_mid = (k + 0.5) * dy;
    chord_mid[k] = geo.chord_at(y_mid);
    const SectionProps sp = section_at(model, y_mid);
    const double m_struct = sp.area * model.structural.material_density_kg_m3;
    // Carried (fuel/system) mass distributed proportionally to chord.
    const double m_ns = model.nonstructural_mass_kg * chord_mid[k] / area;
    mass_per_span[k] = m_struct + m_ns;
    structural_mass_half += m_struct * dy;
  }

  const double ea_fraction = elastic_axis_fraction(model);
  const double alpha_rad = cond.alpha_deg * kPi / 180.0;
  const double omega = model.structural.relaxation;

  std::vector<double> twist_nodes(m + 1, 0.0), slope_nodes(m + 1, 0.0);
  std::vector<double> loads(m), torques(m);
  beam::BendingSolution bending;
  std::vector<double> twist_new;

  const auto compute_loads = [&](const std::vector<double>& twist,
                                 const std::vector<double>& slope) {
    for (int k = 0; k < m; ++k) {
      const double tw = 0.5 * (twist[k] + twist[k + 1]);
      const double sl = 0.5 * (slope[k] + slope[k + 1]);
      const double alpha_eff = alpha_rad + tw * cos_sweep - sl * sin_sweep;
      const double cl = a3d * alpha_eff;
      const double lift = q * chord_mid[k] * cl;
      loads[k] = lift - kGravity * mass_per_span[k];
      torques[k] = lift * (ea_fraction - 0.25) * chord_mid[k];
    }
  };

  // Damped fixed point with Irons-Tuck (Aitken) adaptive relaxation, the
  // usual accelerator for partitioned aeroelastic coupling. The convergence
  // flag is decided at the 1e-6 relative criterion; iteration continues to
  // machine precision within the cap so that outputs are smooth enough for
  // finite-difference gradients downstream.
  bool converged = false;
  int iterations = 0;
  const std::size_t state_size = 2 * static_cast<std::size_t>(m + 1);
  std::vector<double> residual(state_size, 0.0), residual_prev;
  double relax = omega;
  for (int it = 1; it <= model.structural.max_iterations; ++it) {
    iterations = it;
    compute_loads(twist_nodes, slope_nodes);
    bending = beam::cantilever_bending(y_nodes, ei_nodes, loads);
    twist_new = beam::cantilever_torsion(y_nodes, gj_nodes, torques);

    residual_prev = residual;
    for (int i = 0; i <= m; ++i) {
      residual[static_cast<std::size_t>(i)] = twist_new[i] - twist_nodes[i];
      residual[static_cast<std::size_t>(m + 1 + i)] = bending.slope[i] - slope_nodes[i];
    }
    if (it > 1) {
      double num = 0.0, den = 0.0;
      for (std::size_t k = 0; k < state_size; ++k) {
        const double dr = residual[k] - residual_prev[k];
        num += residual_prev[k] * dr;
        den += dr * dr;
      }
      if (den > 0.0) relax = std::clamp(-relax * num / den, 0.05, 1.5);
    }

    double delta = 0.0, magnitude = 0.0;
    for (int i = 0; i <= m; ++i) {
      twist_nodes[i] += relax * residual[static_cast<std::size_t>(i)];
      slope_nodes[i] += relax * residual[static_cast<std::size_t>(m + 1 + i)];
      delta = std::max({delta, std::abs(relax * residual[static_cast<std::size_t>(i)]),
                        std::abs(relax * residual[static_cast<std::size_t>(m + 1 + i)])});
      magnitude = std::max({magnitude, std::abs(twist_nodes[i]), std::abs(slope_nodes[i])});
    }
    if (!std::isfinite(delta) || !std::isfinite(magnitude))
      throw model_error("evaluation failed");
    const double floor = std::max(magnitude, 1e-12);
    if (delta < 1e-12 || delta < model.structural.tolerance * floor) converged = true;
    if (delta < 1e-13 * floor || delta < 1e-15) break;  // polished
  }

  // Final aerodynamic pass on the converged (or last) deformation state.
  double cl_total = 0.0;
  for (int k = 0; k < m; ++k) {
    const double tw = 0.5 * (twist_nodes[k] + twist_nodes[k + 1]);
    const double sl = 0.5 * (slope_nodes[k] + slope_nodes[k + 1]);
    const double alpha_eff = alpha_rad + tw * cos_sweep - sl * sin_sweep;
    cl_total += a3d * alpha_eff * chord_mid[k] * dy;
  }
  const double cl = 2.0 * cl_total / area;

  const double mac = geo.mean_aero_chord_m();
  const double reynolds = air.density_kg_m3 * v * mac / air.dynamic_viscosity_pa_s;

  double cd = 0.0;
  if (model.aero.include_induced)
    cd += cl * cl / (kPi * model.aero.oswald_e * ar);
  if (model.aero.include_friction) {
    const double cf = 0.455 / std::pow(std::log10(reynolds), 2.58) *
                      std::pow(1.0 + 0.144 * cond.mach * cond.mach, -0.65);
    const double tc = geo.thickness_ratio;
    const double form_factor = 1.0 + 2.7 * tc + 100.0 * std::pow(tc, 4);
    cd += cf * form_factor * model.aero.wetted_area_ratio + model.aero.cd0_misc;
  }
  if (model.aero.include_wave) {
    const double tc = geo.thickness_ratio;
    const double m_dd = model.aero.korn_kappa / cos_sweep -
                        tc / (cos_sweep * cos_sweep) -
                        model.aero.wave_cl_ref / (10.0 * std::pow(cos_sweep, 3));
    const double m_crit = m_dd - std::cbrt(0.1 / 80.0);
    if (cond.mach > m_crit) cd += 20.0 * std::pow(cond.mach - m_crit, 4);
  }

  AeroStructResult out;
  out.cl = cl;
  out.cd = cd;
  out.l_over_d = cd > 0.0 ? cl / cd : 0.0;
  out.reynolds = reynolds;
  out.wing_mass_kg = 2.0 * structural_mass_half;
  out.root_ei = ei_nodes[0];
  out.root_gj = gj_nodes[0];
  out.tip_deflection_m = bending.deflection.empty() ? 0.0 : bending.deflection[m];
  out.tip_twist_deg = twist_nodes[m] * 180.0 / kPi;
  out.converged = converged;
  out.iterations = iterations;
  if (!std::isfinite(out.cl) || !std::isfinite(out.cd))
    throw model_error("evaluation failed");
  out.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

std::vector<StructureCase> bwb_structure_family() {
  return {
      {"tubular_spar_coarse", WingModelSpec::bwb_tubular(MeshLevel::coarse)},
      {"tubular_spar_medium", WingModelSpec::bwb_tubular(MeshLevel::medium)},
      {"wingbox_coarse", WingModelSpec::bwb_wingbox(MeshLevel::coarse)},
      {"wingbox_medium", WingModelSpec::bwb_wingbox(MeshLevel::medium)},
      {"wingbox_fine", WingModelSpec::bwb_wingbox(MeshLevel::fine)},
  };
}

namespace {

int column_index(const SampleMatrix& m, const std::string& name) {
  for (std::size_t i = 0; i < m.columns.size(); ++i)
    if (m.columns[i] == name) return static_cast<int>(i);
  throw config_error("ld study: sample matrix missing column '" + name + "'");
}

WingModelSpec apply_structure_location(WingModelSpec model, double rear_fraction) {
  if (auto* box = std::get_if<WingboxSection>(&model.structure)) {
    box->rear_spar_fraction = rear_fraction;
  } else {
    // Tubular variants put the spar axis at the midpoint of the implied box.
    auto& tube = std::get<TubularSpar>(model.structure);
    tube.axis_chord_fraction = 0.5 * (0.10 + rear_fraction);
  }
  return model;
}

void run_rows(const StructureCase& sc, const SampleMatrix& shared, double altitude_m,
              int threads, std::vector<LdStudyRow>& out) {
  const int col_alpha = column_index(shared, "alpha");
  const int col_mach = column_index(shared, "mach");
  const int col_loc = column_index(shared, "structure_location");
  const int col_e = column_index(shared, "young_modulus");
  const std::size_t n = static_cast<std::size_t>(shared.rows());
  out.assign(n, {});

  const auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const auto row = shared.values.row(static_cast<Eigen::Index>(r));
      LdStudyRow& dest = out[r];
      dest.row = r;
      dest.structure = sc.label;
      WingModelSpec model = apply_structure_location(sc.model, row[col_loc]);
      model.young_modulus_pa = row[col_e];
      const CruiseCondition cond{row[col_mach], row[col_alpha], altitude_m};
      try {
        const AeroStructResult res = evaluate_aerostruct(model, cond);
        dest.cl = res.cl;
        dest.cd = res.cd;
        dest.l_over_d = res.l_over_d;
        dest.runtime_s = res.runtime_s;
        dest.ok = res.converged;
      } catch (const Error&) {
        dest.ok = false;
      }
    }
  };

  if (threads <= 1) {
    worker(0, n);
    return;
  }
  const std::size_t chunk = (n + threads - 1) / threads;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(n, t * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    if (begin < end) pool.emplace_back(worker, begin, end);
  }
  for (auto& th : pool) th.join();
}

}  // namespace

LdStudyOutput ld_variability_study(const std::vector<StructureCase>& structures,
                                   const SampleMatrix& shared, double altitude_m,
                                   int threads) {
  if (structures.empty()) throw config_error("ld study: no structures given");
  if (shared.rows() == 0) throw config_error("ld study: empty sample matrix");

  LdStudyOutput out;
  std::vector<LdStudyRow> rows;
  for (const auto& sc : structures) {
    run_rows(sc, shared, altitude_m, threads, rows);

    LdStudySummary sum;
    sum.structure = sc.label;
    double acc = 0.0, acc_rt = 0.0;
    std::size_t n_ok = 0;
    for (const auto& r : rows) {
      if (!r.ok) continue;
      acc += r.l_over_d;
      acc_rt += r.runtime_s;
      ++n_ok;
    }
    sum.evaluated = n_ok;
    sum.failures = rows.size() - n_ok;
    if (n_ok > 0) {
      sum.mean_ld = acc / static_cast<double>(n_ok);
      sum.mean_runtime_s = acc_rt / static_cast<double>(n_ok);
      double ss = 0.0;
      for (const auto& r : rows)
        if (r.ok) ss += (r.l_over_d - sum.mean_ld) * (r.l_over_d - sum.mean_ld);
      sum.std_ld = n_ok > 1 ? std::sqrt(ss / static_cast<double>(n_ok - 1)) : 0.0;
    }
    out.summary.push_back(sum);
    out.rows.insert(out.rows.end(), rows.begin(), rows.end());
  }
  return out;
}

}  // namespace uqscale
