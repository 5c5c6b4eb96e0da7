#include "uqscale/scaling_problem.hpp"

#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

#include "uqscale/atmosphere.hpp"
#include "uqscale/csv.hpp"
#include "uqscale/error.hpp"

namespace uqscale {

namespace {

constexpr double kPenaltyCost = 1e6;

// Baseline full-scale trim incidence for the reference cruise state.
constexpr double kFullCruiseAlphaDeg = 8.5;

ScaleReference reference_from_result(const AeroStructResult& res, double density,
                                     double velocity, double length, double mach) {
  ScaleReference ref;
  ref.density_kg_m3 = density;
  ref.velocity_m_s = velocity;
  ref.reference_length_m = length;
  ref.bending_stiffness_nm2 = res.root_ei;
  ref.torsional_stiffness_nm2 = res.root_gj;
  ref.reynolds = res.reynolds;
  ref.mach = mach;
  ref.l_over_d = res.l_over_d;
  return ref;
}

}  // namespace

Eigen::VectorXd DesignVector::to_vector() const {
  Eigen::VectorXd v(5);
  v << scale_n, alpha_deg, mach, altitude_m, young_modulus_pa;
  return v;
}

DesignVector DesignVector::from_vector(const Eigen::VectorXd& v) {
  if (v.size() != 5) throw config_error("DesignVector: expected 5 entries");
  return {v[0], v[1], v[2], v[3], v[4]};
}

std::vector<std::string> DesignVector::variable_names() {
  return {"n", "alpha", "mach", "altitude", "young_modulus"};
}

BoxBounds ScalingBounds::to_box() const {
  BoxBounds b;
  b.lower.resize(5);
  b.upper.resize(5);
  b.lower << n_min, alpha_min, mach_min, altitude_min, e_min;
  b.upper << n_max, alpha_max, mach_max, altitude_max, e_max;
  return b;
}

ScalingProblem ScalingProblem::make(WingModelSpec full_model, CruiseCondition full_cruise,
                                    ScalingWeights weights, ScalingBounds bounds) {
  ScalingProblem prob;
  prob.full_model = std::move(full_model);
  prob.full_cruise = full_cruise;
  prob.weights = weights;
  prob.bounds = bounds;

  const AeroStructResult res = evaluate_aerostruct(prob.full_model, prob.full_cruise);
  if (!res.converged)
    throw model_error("scaling problem: full-scale reference did not converge");
  if (!(res.l_over_d > 0.0) || !(res.reynolds > 0.0))
    throw model_error("scaling problem: degenerate full-scale reference state");
  const AtmosphereState air = isa_atmosphere(full_cruise.altitude_m);
  prob.full_ref = reference_from_result(
      res, air.density_kg_m3, full_cruise.mach * air.speed_of_sound_m_s,
      prob.full_model.geometry.mean_aero_chord_m(), full_cruise.mach);
  return prob;
}

ScalingProblem ScalingProblem::bwb_default() {
  CruiseCondition cruise;
  cruise.mach = 0.84;
  cruise.altitude_m = 10000.0;
  cruise.alpha_deg = kFullCruiseAlphaDeg;
  return make(WingModelSpec::bwb_wingbox(MeshLevel::medium), cruise);
}

CostBreakdown cost_from_outputs(double ld_sub, double re_sub, double ma_sub,
                                const ScaleReference& full, const ScalingWeights& w) {
  CostBreakdown cb;
  const double d_ld = (ld_sub - full.l_over_d) / full.l_over_d;
  const double d_re = (re_sub - full.reynolds) / full.reynolds;
  const double d_ma = (ma_sub - full.mach) / full.mach;
  cb.ld_term = w.ld * d_ld * d_ld;
  cb.re_term = w.re * d_re * d_re;
  cb.ma_term = w.ma * d_ma * d_ma;
  cb.total = cb.ld_term + cb.re_term + cb.ma_term;
  return cb;
}

namespace {

CostBreakdown penalty_breakdown() {
  CostBreakdown cb;
  cb.total = kPenaltyCost;
  cb.penalty_applied = true;
  return cb;
}

struct SubEvaluation {
  AeroStructResult result;
  double density = 0.0;
  double velocity = 0.0;
  double n_mass = 0.0;
  bool ok = false;
};

SubEvaluation run_sub_model(const DesignVector& x, const ScalingProblem& prob) {
  SubEvaluation ev;
  if (prob.failure_injector && prob.failure_injector(x)) return ev;
  try {
    const AtmosphereState air = isa_atmosphere(x.altitude_m);
    ev.density = air.density_kg_m3;
    ev.velocity = x.mach * air.speed_of_sound_m_s;
    ev.n_mass = mass_scale_factor(prob.full_ref.density_kg_m3, air.density_kg_m3,
                                  x.scale_n);
    WingModelSpec sub = prob.full_model.scaled(x.scale_n, ev.n_mass);
    sub.young_modulus_pa = x.young_modulus_pa;
    const CruiseCondition cond{x.mach, x.alpha_deg, x.altitude_m};
    ev.result = evaluate_aerostruct(sub, cond);
    ev.ok = ev.result.converged;
  } catch (const Error&) {
    ev.ok = false;
  }
  return ev;
}

}  // namespace

CostBreakdown evaluate_cost(const DesignVector& x, const ScalingProblem& prob) {
  const Eigen::VectorXd v = x.to_vector();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i])) throw config_error("evaluate_cost: non-finite design vector");

  const SubEvaluation ev = run_sub_model(x, prob);
  if (!ev.ok) return penalty_breakdown();
  return cost_from_outputs(ev.result.l_over_d, ev.result.reynolds, x.mach,
                           prob.full_ref, prob.weights);
}

ScaleReference sub_scale_reference(const DesignVector& x, const ScalingProblem& prob) {
  const SubEvaluation ev = run_sub_model(x, prob);
  if (!ev.ok) throw model_error("sub-scale reference: evaluation failed");
  return reference_from_result(
      ev.result, ev.density, ev.velocity,
      x.scale_n * prob.full_model.geometry.mean_aero_chord_m(), x.mach);
}

KktReport check_kkt(const DesignVector& x, const ScalingProblem& prob) {
  const BoxBounds box = prob.bounds.to_box();
  const Eigen::VectorXd v = x.to_vector();
  const auto names = DesignVector::variable_names();

  KktReport report;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double range = box.upper[i] - box.lower[i];
    KktEntry lo{names[static_cast<std::size_t>(i)] + "_lower",
                (v[i] - box.lower[i]) / range, false};
    lo.active = std::abs(lo.slack) < 1e-6;
    KktEntry hi{names[static_cast<std::size_t>(i)] + "_upper",
                (box.upper[i] - v[i]) / range, false};
    hi.active = std::abs(hi.slack) < 1e-6;
    report.entries.push_back(lo);
    report.entries.push_back(hi);
    report.max_violation =
        std::max({report.max_violation, box.lower[i] - v[i], v[i] - box.upper[i]});
  }
  report.max_violation = std::max(report.max_violation, 0.0);

  const BoxObjective objective = [&prob](const Eigen::VectorXd& xv) {
    const CostBreakdown cb = evaluate_cost(DesignVector::from_vector(xv), prob);
    return ObjectiveValue{cb.total, cb.penalty_applied};
  };
  const CostBreakdown at_x = evaluate_cost(x, prob);
  const Eigen::VectorXd g = fd_gradient(objective, v, box, 1e-6, at_x.total);
  double norm = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double gi = g[i] * (box.upper[i] - box.lower[i]);
    const double tol = 1e-6;
    if ((v[i] - box.lower[i]) / (box.upper[i] - box.lower[i]) < tol && gi > 0.0) gi = 0.0;
    if ((box.upper[i] - v[i]) / (box.upper[i] - box.lower[i]) < tol && gi < 0.0) gi = 0.0;
    norm = std::max(norm, std::abs(gi));
  }
  report.projected_gradient_norm = norm;
  return report;
}

std::vector<std::string> KktReport::active_set() const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (e.active) out.push_back(e.name);
  return out;
}

OptimumResult optimize(const ScalingProblem& prob, const DesignVector& x0) {
  const BoxBounds box = prob.bounds.to_box();
  const BoxObjective objective = [&prob](const Eigen::VectorXd& xv) {
    const CostBreakdown cb = evaluate_cost(DesignVector::from_vector(xv), prob);
    return ObjectiveValue{cb.total, cb.penalty_applied};
  };

  const MinimizeResult mr = minimize_box(objective, box, x0.to_vector());

  OptimumResult out;
  out.x = DesignVector::from_vector(mr.x);
  out.cost = evaluate_cost(out.x, prob);
  out.termination = mr.termination;
  out.iterations = mr.iterations;
  out.trace.reserve(mr.trace.size());
  int k = 0;
  for (const auto& tp : mr.trace) {
    ScalingTracePoint sp;
    sp.iter = k++;
    sp.x = DesignVector::from_vector(tp.x);
    sp.cost = evaluate_cost(sp.x, prob);
    sp.max_violation = tp.max_violation;
    sp.gradient_norm = tp.gradient_norm;
    out.trace.push_back(sp);
  }
  out.kkt = check_kkt(out.x, prob);
  out.similitude =
      similitude_report(prob.full_ref, sub_scale_reference(out.x, prob), out.x.scale_n);
  return out;
}

void write_trace_csv(const std::vector<ScalingTracePoint>& trace, std::ostream& os) {
  csv::write_header(os, {"iter", "n", "alpha", "mach", "altitude", "young_modulus",
                         "ld_term", "re_term", "ma_term", "total", "max_violation"});
  for (const auto& tp : trace) {
    os << tp.iter << ',' << csv::num(tp.x.scale_n) << ',' << csv::num(tp.x.alpha_deg)
       << ',' << csv::num(tp.x.mach) << ',' << csv::num(tp.x.altitude_m) << ','
       << csv::num(tp.x.young_modulus_pa) << ',' << csv::num(tp.cost.ld_term) << ','
       << csv::num(tp.cost.re_term) << ',' << csv::num(tp.cost.ma_term) << ','
       << csv::num(tp.cost.total) << ',' << csv::num(tp.max_violation) << '\n';
  }
}

std::string to_json(const OptimumResult& res) {
  nlohmann::json j;
  j["x"] = {{"n", res.x.scale_n},
            {"alpha", res.x.alpha_deg},
            {"mach", res.x.mach},
            {"altitude", res.x.altitude_m},
            {"young_modulus", res.x.young_modulus_pa}};
  j["cost"] = {{"ld_term", res.cost.ld_term},
               {"re_term", res.cost.re_term},
               {"ma_term", res.cost.ma_term},
               {"total", res.cost.total},
               {"penalty_applied", res.cost.penalty_applied}};
  switch (res.termination) {
    case Termination::converged: j["termination"] = "converged"; break;
    case Termination::max_iterations: j["termination"] = "max_iterations"; break;
    case Termination::stalled: j["termination"] = "stalled"; break;
  }
  j["iterations"] = res.iterations;
  j["active_set"] = res.kkt.active_set();
  j["projected_gradient_norm"] = res.kkt.projected_gradient_norm;
  j["similitude"] = nlohmann::json::parse(to_json(res.similitude));
  return j.dump(2);
}

}  // namespace uqscale
