#ifndef UQSCALE_BOX_MINIMIZE_HPP
#define UQSCALE_BOX_MINIMIZE_HPP

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace uqscale {

struct BoxBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// Objective sample. `penalized` marks a failed model evaluation whose value
/// is a placeholder high cost; penalized points are never accepted as the
/// incumbent and are avoided by the line search.
struct ObjectiveValue {
  double value = 0.0;
  bool penalized = false;
};

using BoxObjective = std::function<ObjectiveValue(const Eigen::VectorXd&)>;

enum class Termination { converged, max_iterations, stalled };

struct TracePoint {
  Eigen::VectorXd x;
  double cost = 0.0;
  double max_violation = 0.0;
  double gradient_norm = 0.0;
};

struct MinimizeOptions {
  int max_iterations = 200;
  double cost_tolerance = 1e-8;       // |delta cost| for convergence
  double violation_tolerance = 1e-6;  // max bound violation for convergence
  double fd_relative_step = 1e-6;     // central-difference relative step
};

struct MinimizeResult {
  Eigen::VectorXd x;  // best feasible non-penalized iterate
  double cost = 0.0;
  Termination termination = Termination::stalled;
  std::vector<TracePoint> trace;
  int iterations = 0;
};

/// SQP-style bound-constrained minimizer: damped BFGS model, central
/// finite-difference gradients, an active-set box QP for the step, and a
/// backtracking Armijo line search. Internally works on coordinates scaled
/// by the bound ranges. Throws when x0 is outside the bounds or the model
/// is penalized at x0.
MinimizeResult minimize_box(const BoxObjective& objective, const BoxBounds& bounds,
                            const Eigen::VectorXd& x0, const MinimizeOptions& options = {});

/// Central finite-difference gradient with the stencil clamped into the
/// bounds (one-sided within a step of a bound). Penalized probes fall back
/// to a one-sided difference against f_center; exposed for step-size
/// consistency checks.
Eigen::VectorXd fd_gradient(const BoxObjective& objective, const Eigen::VectorXd& x,
                            const BoxBounds& bounds, double rel_step, double f_center);

}  // namespace uqscale

#endif
