#ifndef UQSCALE_SCALING_PROBLEM_HPP
#define UQSCALE_SCALING_PROBLEM_HPP

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "uqscale/aerostruct.hpp"
#include "uqscale/box_minimize.hpp"
#include "uqscale/similitude.hpp"

namespace uqscale {

/// Sub-scale experiment design vector x = [n, alpha, Ma, h, E].
struct DesignVector {
  double scale_n = 0.1;
  double alpha_deg = 0.0;
  double mach = 0.84;
  double altitude_m = 10000.0;
  double young_modulus_pa = 73.1e9;

  Eigen::VectorXd to_vector() const;
  static DesignVector from_vector(const Eigen::VectorXd& v);
  static std::vector<std::string> variable_names();
};

struct ScalingWeights {
  double ld = 1.0;
  double re = 30.0;
  double ma = 3000.0;
};

/// Box bounds of the experiment-condition search. The open lower ends of the
/// scale and stiffness ranges are closed at small positive floors.
struct ScalingBounds {
  double n_min = 0.01, n_max = 0.2;
  double alpha_min = 0.0, alpha_max = 10.0;
  double mach_min = 0.80, mach_max = 0.87;
  double altitude_min = 0.0, altitude_max = 20000.0;
  double e_min = 1e9, e_max = 3.0 * 73.1e9;

  BoxBounds to_box() const;
};

struct ScalingProblem {
  WingModelSpec full_model;
  CruiseCondition full_cruise;
  ScaleReference full_ref;  // filled by make()/bwb_default()
  ScalingWeights weights;
  ScalingBounds bounds;
  /// Test hook: forces the penalty path for matching design points.
  std::function<bool(const DesignVector&)> failure_injector;

  /// Evaluates the full-scale reference state and assembles the problem.
  static ScalingProblem make(WingModelSpec full_model, CruiseCondition full_cruise,
                             ScalingWeights weights = {}, ScalingBounds bounds = {});
  /// Wingbox model at the baseline cruise condition.
  static ScalingProblem bwb_default();
};

struct CostBreakdown {
  double ld_term = 0.0;
  double re_term = 0.0;
  double ma_term = 0.0;
  double total = 0.0;
  bool penalty_applied = false;
};

/// Weighted quadratic deviations of (L/D, Re, Ma) from the full-scale
/// reference; pure arithmetic, no model evaluation.
CostBreakdown cost_from_outputs(double ld_sub, double re_sub, double ma_sub,
                                const ScaleReference& full, const ScalingWeights& weights);

/// Runs the sub-scale model at x (geometry scaled by n, carried mass by
/// n_mass = (rho_F/rho_S) n^3, atmosphere at h, stiffness E) and evaluates
/// the cost. Model failures and diverged evaluations return total = 1e6 with
/// penalty_applied set.
CostBreakdown evaluate_cost(const DesignVector& x, const ScalingProblem& prob);

/// Sub-scale reference state (for similitude reporting) at a design point.
ScaleReference sub_scale_reference(const DesignVector& x, const ScalingProblem& prob);

struct ScalingTracePoint {
  int iter = 0;
  DesignVector x;
  CostBreakdown cost;
  double max_violation = 0.0;
  double gradient_norm = 0.0;
};

struct KktEntry {
  std::string name;     // e.g. "n_upper"
  double slack = 0.0;   // scaled by the bound range
  bool active = false;  // |slack| < 1e-6
};

struct KktReport {
  std::vector<KktEntry> entries;
  double projected_gradient_norm = 0.0;
  double max_violation = 0.0;
  std::vector<std::string> active_set() const;
};

struct OptimumResult {
  DesignVector x;
  CostBreakdown cost;
  Termination termination = Termination::stalled;
  int iterations = 0;
  std::vector<ScalingTracePoint> trace;
  KktReport kkt;
  SimilitudeReport similitude;
};

/// Algorithm: SQP iteration on the box-constrained cost from the given start
/// (default start [0.1, 0, 0.84, 10000, 73.1e9]); returns the best feasible
/// iterate with its trace, constraint activity and similitude report.
OptimumResult optimize(const ScalingProblem& prob, const DesignVector& x0 = {});

/// Per-bound slack/activity and projected-gradient norm at a design point.
KktReport check_kkt(const DesignVector& x, const ScalingProblem& prob);

/// CSV: iter, x fields, cost terms, violation.
void write_trace_csv(const std::vector<ScalingTracePoint>& trace, std::ostream& os);
/// JSON with the optimum, cost breakdown, active set and similitude report.
std::string to_json(const OptimumResult& res);

}  // namespace uqscale

#endif
