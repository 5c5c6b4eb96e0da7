#include <doctest.h>

#include <cmath>
#include <numbers>

#include "uqscale/aerostruct.hpp"
#include "uqscale/error.hpp"
#include "uqscale/param_space.hpp"

using namespace uqscale;

namespace {

CruiseCondition cruise(double alpha = 8.5) { return {0.84, alpha, 10000.0}; }

WingModelSpec wingbox(MeshLevel mesh = MeshLevel::medium) {
  return WingModelSpec::bwb_wingbox(mesh);
}

}  // namespace

TEST_CASE("geometry derived quantities") {
  const WingGeometry g = wingbox().geometry;
  CHECK(g.taper() == doctest::Approx(1.64 / 5.47));
  CHECK(g.area_m2() == doctest::Approx(0.5 * 23.1 * (5.47 + 1.64)));
  CHECK(g.aspect_ratio() == doctest::Approx(23.1 * 23.1 / g.area_m2()));
  CHECK(g.chord_at(0.0) == doctest::Approx(5.47));
  CHECK(g.chord_at(23.1 / 2.0) == doctest::Approx(1.64));
  // trapezoid MAC formula
  const double lam = g.taper();
  CHECK(g.mean_aero_chord_m() ==
        doctest::Approx(2.0 / 3.0 * 5.47 * (1 + lam + lam * lam) / (1 + lam)));
}

TEST_CASE("mesh levels have strictly increasing station counts") {
  CHECK(mesh_strip_count(MeshLevel::coarse) < mesh_strip_count(MeshLevel::medium));
  CHECK(mesh_strip_count(MeshLevel::medium) < mesh_strip_count(MeshLevel::fine));
  CHECK(mesh_from_string("fine") == MeshLevel::fine);
  CHECK_THROWS_AS(mesh_from_string("ultra"), Error);
}

TEST_CASE("cantilever bending matches closed forms") {
  const double s = 10.0, ei = 5e6;
  const int m = mesh_strip_count(MeshLevel::fine);
  std::vector<double> y(m + 1), ei_nodes(m + 1, ei);
  for (int i = 0; i <= m; ++i) y[i] = s * i / m;

  SUBCASE("tip point load: P L^3 / 3EI within 1 percent") {
    const double p = 1000.0;
    std::vector<double> no_load(m, 0.0);
    const auto sol = beam::cantilever_bending(y, ei_nodes, no_load, p);
    const double exact = p * s * s * s / (3.0 * ei);
    CHECK(std::abs(sol.deflection.back() - exact) / exact < 0.01);
    // slope at tip: P L^2 / 2EI
    CHECK(sol.slope.back() ==
          doctest::Approx(p * s * s / (2.0 * ei)).epsilon(0.01));
  }
  SUBCASE("uniform load: q L^4 / 8EI") {
    const double q = 300.0;
    std::vector<double> load(m, q);
    const auto sol = beam::cantilever_bending(y, ei_nodes, load);
    const double exact = q * std::pow(s, 4) / (8.0 * ei);
    CHECK(std::abs(sol.deflection.back() - exact) / exact < 0.01);
  }
  SUBCASE("varying EI against an independent quadrature oracle") {
    // EI(y) = ei (1 - 0.5 y/s), uniform load; unit-load theorem with Simpson.
    std::vector<double> ei_var(m + 1);
    for (int i = 0; i <= m; ++i) ei_var[i] = ei * (1.0 - 0.5 * y[i] / s);
    const double q = 450.0;
    std::vector<double> load(m, q);
    const auto sol = beam::cantilever_bending(y, ei_var, load);

    const auto integrand = [&](double yy) {
      const double moment = q * (s - yy) * (s - yy) / 2.0;
      const double ei_at = ei * (1.0 - 0.5 * yy / s);
      return moment * (s - yy) / ei_at;
    };
    const int n_simpson = 2000;
    double acc = integrand(0.0) + integrand(s);
    for (int i = 1; i < n_simpson; ++i)
      acc += integrand(s * i / n_simpson) * (i % 2 ? 4.0 : 2.0);
    const double oracle = acc * (s / n_simpson) / 3.0;
    CHECK(std::abs(sol.deflection.back() - oracle) / oracle < 0.005);
  }
}

TEST_CASE("cantilever torsion matches the closed form") {
  const double s = 8.0, gj = 2e6, t0 = 500.0;
  const int m = 40;
  std::vector<double> y(m + 1), gj_nodes(m + 1, gj), torque(m, t0);
  for (int i = 0; i <= m; ++i) y[i] = s * i / m;
  const auto twist = beam::cantilever_torsion(y, gj_nodes, torque);
  CHECK(twist.back() == doctest::Approx(t0 * s * s / (2.0 * gj)).epsilon(0.01));
  // tip point torque: T L / GJ is exact for the trapezoid rule
  std::vector<double> none(m, 0.0);
  const auto tw2 = beam::cantilever_torsion(y, gj_nodes, none, 750.0);
  CHECK(tw2.back() == doctest::Approx(750.0 * s / gj).epsilon(1e-12));
}

TEST_CASE("rigid limit decouples the aerodynamics") {
  WingModelSpec stiff = wingbox();
  stiff.young_modulus_pa = 1e15;
  const AeroStructResult r15 = evaluate_aerostruct(stiff, cruise());
  CHECK(r15.converged);
  CHECK(std::abs(r15.tip_twist_deg) < 1e-3);

  stiff.young_modulus_pa = 1e19;
  const AeroStructResult r19 = evaluate_aerostruct(stiff, cruise());
  stiff.young_modulus_pa = 1e21;
  const AeroStructResult r21 = evaluate_aerostruct(stiff, cruise());
  CHECK(std::abs(r19.l_over_d - r21.l_over_d) < 1e-6);
  // residual flexibility at 1e15 is already tiny
  CHECK(std::abs(r15.l_over_d - r19.l_over_d) / r19.l_over_d < 1e-3);
}

TEST_CASE("zero incidence with a symmetric section produces no lift") {
  WingModelSpec m = wingbox();
  m.nonstructural_mass_kg = 0.0;
  m.young_modulus_pa = 1e19;  // suppress gravity-driven wash-in of the bare structure
  const AeroStructResult r = evaluate_aerostruct(m, cruise(0.0));
  CHECK(std::abs(r.cl) < 1e-9);
  CHECK(std::abs(r.l_over_d) < 1e-7);
  CHECK(r.cd > 0.0);
}

TEST_CASE("stiffness scales linearly in the modulus") {
  const WingModelSpec base = wingbox();
  WingModelSpec half = base;
  half.young_modulus_pa = base.young_modulus_pa / 2.0;
  const AeroStructResult rb = evaluate_aerostruct(base, cruise());
  const AeroStructResult rh = evaluate_aerostruct(half, cruise());
  CHECK(rh.root_ei == doctest::Approx(rb.root_ei / 2.0).epsilon(1e-12));
  CHECK(rh.root_gj == doctest::Approx(rb.root_gj / 2.0).epsilon(1e-12));
  CHECK(rh.tip_deflection_m > rb.tip_deflection_m);
}

TEST_CASE("induced-drag identity with friction and wave drag disabled") {
  WingModelSpec m = wingbox();
  m.aero.include_friction = false;
  m.aero.include_wave = false;
  const AeroStructResult r = evaluate_aerostruct(m, cruise(6.0));
  const double pi_e_ar = std::numbers::pi * m.aero.oswald_e * m.geometry.aspect_ratio();
  CHECK(std::abs(r.cd * pi_e_ar - r.cl * r.cl) < 1e-10);
}

TEST_CASE("lift rises with Mach below the transonic clamp for a rigid wing") {
  WingModelSpec m = wingbox();
  m.young_modulus_pa = 1e19;
  double prev = 0.0;
  for (double mach = 0.40; mach <= 0.87; mach += 0.01) {
    const AeroStructResult r = evaluate_aerostruct(m, {mach, 4.0, 10000.0});
    CHECK(r.cl >= prev);
    prev = r.cl;
  }
}

TEST_CASE("reynolds field is rho V L / mu with L the mean aerodynamic chord") {
  const WingModelSpec m = wingbox();
  const CruiseCondition c = cruise();
  const AeroStructResult r = evaluate_aerostruct(m, c);
  const AtmosphereState air = isa_atmosphere(c.altitude_m);
  const double v = c.mach * air.speed_of_sound_m_s;
  const double expected =
      air.density_kg_m3 * v * m.geometry.mean_aero_chord_m() / air.dynamic_viscosity_pa_s;
  CHECK(std::abs(r.reynolds - expected) / expected < 1e-12);
}

TEST_CASE("geometric scaling contracts stiffness and mass with the right powers") {
  const WingModelSpec base = wingbox();
  const WingModelSpec sub = base.scaled(0.2, 0.01);
  const AeroStructResult rb = evaluate_aerostruct(base, cruise());
  const AeroStructResult rs = evaluate_aerostruct(sub, cruise());
  CHECK(rs.root_ei == doctest::Approx(rb.root_ei * std::pow(0.2, 4)).epsilon(1e-9));
  CHECK(rs.root_gj == doctest::Approx(rb.root_gj * std::pow(0.2, 4)).epsilon(1e-9));
  CHECK(rs.wing_mass_kg ==
        doctest::Approx(rb.wing_mass_kg * std::pow(0.2, 3)).epsilon(1e-9));
  CHECK(sub.nonstructural_mass_kg ==
        doctest::Approx(base.nonstructural_mass_kg * 0.01));
  CHECK_THROWS_AS(base.scaled(0.0, 1.0), Error);
}

TEST_CASE("evaluation is deterministic apart from the runtime field") {
  const WingModelSpec m = wingbox();
  const AeroStructResult a = evaluate_aerostruct(m, cruise());
  const AeroStructResult b = evaluate_aerostruct(m, cruise());
  CHECK(a.cl == b.cl);
  CHECK(a.cd == b.cd);
  CHECK(a.l_over_d == b.l_over_d);
  CHECK(a.tip_deflection_m == b.tip_deflection_m);
  CHECK(a.tip_twist_deg == b.tip_twist_deg);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("torsion-dominant configuration fails to converge and is flagged") {
  WingModelSpec m = WingModelSpec::bwb_tubular(MeshLevel::coarse);
  auto& tube = std::get<TubularSpar>(m.structure);
  tube.axis_chord_fraction = 0.95;  // elastic axis far behind the aero centre
  tube.wall_thickness_m = 0.002;
  m.young_modulus_pa = 2e9;
  bool flagged = false;
  try {
    const AeroStructResult r = evaluate_aerostruct(m, {0.86, 8.0, 0.0});
    flagged = !r.converged;
  } catch (const Error& e) {
    flagged = std::string(e.what()) == "evaluation failed";
  }
  CHECK(flagged);
}

TEST_CASE("model validation") {
  WingModelSpec bad = wingbox();
  std::get<WingboxSection>(bad.structure).front_spar_fraction = 0.7;
  CHECK_THROWS_AS(evaluate_aerostruct(bad, cruise()), Error);
  WingModelSpec bad2 = wingbox();
  bad2.young_modulus_pa = -1.0;
  CHECK_THROWS_AS(evaluate_aerostruct(bad2, cruise()), Error);
  CHECK_THROWS_AS(evaluate_aerostruct(wingbox(), {1.2, 2.0, 1000.0}), Error);
}

TEST_CASE("ld study") {
  ParameterSpace shared_space;
  shared_space.add({"alpha", 7.0, 10.0, 8.5});
  shared_space.add({"mach", 0.82, 0.86, 0.84});
  shared_space.add({"structure_location", 0.55, 0.65, 0.60});
  shared_space.add({"young_modulus", 0.9 * 73.1e9, 1.1 * 73.1e9, 73.1e9});

  SUBCASE("constant rows give zero spread for every structure") {
    SampleMatrix constant;
    constant.columns = shared_space.names();
    constant.values.resize(8, 4);
    for (int r = 0; r < 8; ++r) {
      constant.values(r, 0) = 8.5;
      constant.values(r, 1) = 0.84;
      constant.values(r, 2) = 0.60;
      constant.values(r, 3) = 73.1e9;
    }
    const LdStudyOutput out = ld_variability_study(bwb_structure_family(), constant, 10000.0);
    REQUIRE(out.summary.size() == 5);
    for (const auto& s : out.summary) {
      CHECK(s.evaluated == 8);
      CHECK(s.std_ld < 1e-12);  // identical rows; only mean-rounding noise remains
    }
    // determinism is exact: every row of a structure matches the first bit for bit
    for (std::size_t i = 0; i < out.rows.size(); ++i)
      CHECK(out.rows[i].l_over_d == out.rows[i - i % 8].l_over_d);
  }
  SUBCASE("five structures on shared rows, stats and determinism") {
    const SampleMatrix shared = lhs_sample(shared_space, 60, 2024);
    const LdStudyOutput a = ld_variability_study(bwb_structure_family(), shared, 10000.0, 1);
    const LdStudyOutput b = ld_variability_study(bwb_structure_family(), shared, 10000.0, 3);
    REQUIRE(a.rows.size() == 5 * 60);
    REQUIRE(a.summary.size() == 5);
    for (const auto& s : a.summary) {
      CHECK(s.evaluated == 60);
      CHECK(s.failures == 0);
      CHECK(s.std_ld > 0.0);
    }
    // threaded evaluation is bit-identical to sequential (runtime aside)
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      CHECK(a.rows[i].l_over_d == b.rows[i].l_over_d);
      CHECK(a.rows[i].cl == b.rows[i].cl);
      CHECK(a.rows[i].structure == b.rows[i].structure);
    }
  }
  SUBCASE("finer meshes of the same structure take longer on average") {
    const SampleMatrix shared = lhs_sample(shared_space, 80, 11);
    std::vector<StructureCase> pair = {
        {"wingbox_coarse", WingModelSpec::bwb_wingbox(MeshLevel::coarse)},
        {"wingbox_fine", WingModelSpec::bwb_wingbox(MeshLevel::fine)},
    };
    const LdStudyOutput out = ld_variability_study(pair, shared, 10000.0);
    CHECK(out.summary[1].mean_runtime_s > out.summary[0].mean_runtime_s);
  }
  SUBCASE("missing shared column is rejected") {
    SampleMatrix wrong;
    wrong.columns = {"alpha", "mach"};
    wrong.values.resize(4, 2);
    wrong.values.setConstant(0.84);
    CHECK_THROWS_AS(ld_variability_study(bwb_structure_family(), wrong, 10000.0), Error);
  }
}
