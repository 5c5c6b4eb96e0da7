#include <doctest.h>

#include <cmath>
#include <sstream>

#include "uqscale/atmosphere.hpp"
#include "uqscale/error.hpp"
#include "uqscale/scaling_problem.hpp"

using namespace uqscale;

namespace {

ScaleReference reference() {
  ScaleReference full;
  full.density_kg_m3 = 0.4135;
  full.velocity_m_s = 251.6;
  full.reference_length_m = 3.9;
  full.bending_stiffness_nm2 = 2.8e7;
  full.torsional_stiffness_nm2 = 3.5e7;
  full.reynolds = 2.78e7;
  full.mach = 0.84;
  full.l_over_d = 15.7;
  return full;
}

}  // namespace

TEST_CASE("cost terms follow the weighted quadratic deviations") {
  const ScaleReference full = reference();
  const ScalingWeights w;

  SUBCASE("zero deviation, zero cost") {
    const CostBreakdown cb =
        cost_from_outputs(full.l_over_d, full.reynolds, full.mach, full, w);
    CHECK(cb.total == 0.0);
    CHECK_FALSE(cb.penalty_applied);
  }
  SUBCASE("a one-percent Mach deviation costs exactly 0.3") {
    const CostBreakdown cb =
        cost_from_outputs(full.l_over_d, full.reynolds, full.mach * 1.01, full, w);
    CHECK(cb.ld_term == 0.0);
    CHECK(cb.re_term == 0.0);
    CHECK(cb.ma_term == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(cb.total == doctest::Approx(0.3).epsilon(1e-12));
  }
  SUBCASE("terms add up") {
    const CostBreakdown cb = cost_from_outputs(full.l_over_d * 0.9, full.reynolds * 0.5,
                                               full.mach * 1.02, full, w);
    CHECK(cb.total ==
          doctest::Approx(cb.ld_term + cb.re_term + cb.ma_term).epsilon(1e-14));
    CHECK(cb.ld_term == doctest::Approx(0.01).epsilon(1e-10));
    CHECK(cb.re_term == doctest::Approx(30.0 * 0.25).epsilon(1e-10));
  }
  SUBCASE("custom weights scale their terms") {
    ScalingWeights w2{2.0, 60.0, 6000.0};
    const CostBreakdown cb =
        cost_from_outputs(full.l_over_d, full.reynolds, full.mach * 1.01, full, w2);
    CHECK(cb.ma_term == doctest::Approx(0.6).epsilon(1e-12));
  }
}

TEST_CASE("design vector round trip and names") {
  const DesignVector x{0.17, 4.5, 0.85, 1234.0, 9.9e10};
  const DesignVector back = DesignVector::from_vector(x.to_vector());
  CHECK(back.scale_n == x.scale_n);
  CHECK(back.alpha_deg == x.alpha_deg);
  CHECK(back.mach == x.mach);
  CHECK(back.altitude_m == x.altitude_m);
  CHECK(back.young_modulus_pa == x.young_modulus_pa);
  CHECK(DesignVector::variable_names() ==
        std::vector<std::string>{"n", "alpha", "mach", "altitude", "young_modulus"});
}

TEST_CASE("evaluate_cost on the full problem") {
  const ScalingProblem prob = ScalingProblem::bwb_default();

  SUBCASE("replicating the full-scale state at unit scale gives zero cost") {
    DesignVector x;
    x.scale_n = 1.0;
    x.alpha_deg = prob.full_cruise.alpha_deg;
    x.mach = prob.full_cruise.mach;
    x.altitude_m = prob.full_cruise.altitude_m;
    x.young_modulus_pa = prob.full_model.young_modulus_pa;
    const CostBreakdown cb = evaluate_cost(x, prob);
    CHECK_FALSE(cb.penalty_applied);
    CHECK(cb.total < 1e-18);
  }
  SUBCASE("injected failure returns the documented penalty") {
    ScalingProblem withhook = prob;
    withhook.failure_injector = [](const DesignVector&) { return true; };
    const CostBreakdown cb = evaluate_cost(DesignVector{}, withhook);
    CHECK(cb.total == 1e6);
    CHECK(cb.penalty_applied);
  }
  SUBCASE("non-finite design vectors are rejected") {
    DesignVector x;
    x.mach = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(evaluate_cost(x, prob), Error);
  }
}

TEST_CASE("kkt report") {
  const ScalingProblem prob = ScalingProblem::bwb_default();
  SUBCASE("interior point has an empty active set") {
    const DesignVector x{0.1, 5.0, 0.84, 5000.0, 1.0e11};
    const KktReport k = check_kkt(x, prob);
    CHECK(k.active_set().empty());
    CHECK(k.max_violation == 0.0);
  }
  SUBCASE("bound-active point lists the bound") {
    const DesignVector x{0.2, 10.0, 0.84, 0.0, 1.0e11};
    const KktReport k = check_kkt(x, prob);
    const auto active = k.active_set();
    CHECK(std::find(active.begin(), active.end(), "n_upper") != active.end());
    CHECK(std::find(active.begin(), active.end(), "alpha_upper") != active.end());
    CHECK(std::find(active.begin(), active.end(), "altitude_lower") != active.end());
  }
  SUBCASE("violations are reported with magnitudes") {
    const DesignVector x{0.3, 11.0, 0.84, 5000.0, 1.0e11};
    const KktReport k = check_kkt(x, prob);
    CHECK(k.max_violation > 0.09);
  }
}

TEST_CASE("the default scaling problem reproduces the constrained optimum pattern") {
  const ScalingProblem prob = ScalingProblem::bwb_default();
  const OptimumResult res = optimize(prob);
  CHECK(res.termination == Termination::converged);
  CHECK(res.iterations <= 200);
  CHECK(res.x.scale_n == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(res.x.alpha_deg == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(res.x.altitude_m == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(std::abs(res.x.young_modulus_pa - 3.0 * 73.1e9) / (3.0 * 73.1e9) < 0.05);
  CHECK(res.x.mach >= 0.80);
  CHECK(res.x.mach <= 0.87);
  CHECK_FALSE(res.cost.penalty_applied);

  const auto active = res.kkt.active_set();
  for (const char* name : {"n_upper", "alpha_upper", "altitude_lower", "young_modulus_upper"})
    CHECK(std::find(active.begin(), active.end(), name) != active.end());

  SUBCASE("final cost beats the start and the trace is monotone") {
    CHECK(res.cost.total < res.trace.front().cost.total);
    for (std::size_t i = 1; i < res.trace.size(); ++i)
      CHECK(res.trace[i].cost.total <= res.trace[i - 1].cost.total + 1e-9);
  }
  SUBCASE("similitude report carries the mass scale and group ratios") {
    CHECK(res.similitude.geometric_scale == doctest::Approx(0.2).epsilon(1e-9));
    const double rho_f = isa_atmosphere(prob.full_cruise.altitude_m).density_kg_m3;
    const double rho_s = isa_atmosphere(res.x.altitude_m).density_kg_m3;
    CHECK(res.similitude.mass_scale ==
          doctest::Approx(rho_f / rho_s * 0.008).epsilon(1e-12));
    REQUIRE(res.similitude.groups.size() == 4);
  }
  SUBCASE("rerunning is deterministic") {
    const OptimumResult again = optimize(prob);
    REQUIRE(again.trace.size() == res.trace.size());
    for (std::size_t i = 0; i < res.trace.size(); ++i)
      CHECK(again.trace[i].cost.total == res.trace[i].cost.total);
    CHECK(again.x.mach == res.x.mach);
  }
}

TEST_CASE("optimization never returns a point from the injected-failure set") {
  ScalingProblem prob = ScalingProblem::bwb_default();
  prob.failure_injector = [](const DesignVector& x) {
    return std::abs(x.scale_n - 0.15) < 1e-6;  // measure-zero slice en route
  };
  const OptimumResult res = optimize(prob);
  CHECK_FALSE(res.cost.penalty_applied);
  CHECK(res.x.scale_n == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("failure at the start aborts with the documented error") {
  ScalingProblem prob = ScalingProblem::bwb_default();
  prob.failure_injector = [](const DesignVector& x) { return x.scale_n < 0.12; };
  CHECK_THROWS_WITH_AS(optimize(prob), "model fails at initial guess", Error);
}

TEST_CASE("trace csv has the documented columns") {
  const ScalingProblem prob = ScalingProblem::bwb_default();
  const OptimumResult res = optimize(prob);
  std::ostringstream os;
  write_trace_csv(res.trace, os);
  const std::string text = os.str();
  CHECK(text.rfind("iter,n,alpha,mach,altitude,young_modulus,ld_term,re_term,ma_term,"
                   "total,max_violation\n",
                   0) == 0);
  const std::string j = to_json(res);
  CHECK(j.find("\"active_set\"") != std::string::npos);
  CHECK(j.find("\"termination\": \"converged\"") != std::string::npos);
  CHECK(j.find("\"similitude\"") != std::string::npos);
}
