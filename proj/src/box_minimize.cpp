#include "uqscale/box_minimize.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>

#include "uqscale/error.hpp"

namespace uqscale {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double max_violation(const VectorXd& x, const BoxBounds& b) {
  double v = 0.0;
  for (Index i = 0; i < x.size(); ++i)
    v = std::max({v, b.lower[i] - x[i], x[i] - b.upper[i]});
  return std::max(v, 0.0);
}

/// min g'd + 0.5 d'Bd subject to lo <= d <= hi, via a primal active-set loop.
/// B must be positive definite; the dimension here is small.
VectorXd solve_box_qp(const MatrixXd& b_mat, const VectorXd& g, const VectorXd& lo,
                      const VectorXd& hi) {
  const Index n = g.size();
  std::vector<int> state(static_cast<std::size_t>(n), 0);  // -1 lo, 0 free, +1 hi
  VectorXd d = VectorXd::Zero(n);

  const int max_passes = static_cast<int>(4 * n + 8);
  for (int pass = 0; pass < max_passes; ++pass) {
    std::vector<Index> free_idx;
    for (Index i = 0; i < n; ++i) {
      if (state[static_cast<std::size_t>(i)] == 0)
        free_idx.push_back(i);
      else
        d[i] = state[static_cast<std::size_t>(i)] < 0 ? lo[i] : hi[i];
    }

    if (!free_idx.empty()) {
      const Index nf = static_cast<Index>(free_idx.size());
      MatrixXd bff(nf, nf);
      VectorXd rhs(nf);
      for (Index a = 0; a < nf; ++a) {
        rhs[a] = -g[free_idx[static_cast<std::size_t>(a)]];
        for (Index c = 0; c < n; ++c) {
          if (state[static_cast<std::size_t>(c)] != 0)
            rhs[a] -= b_mat(free_idx[static_cast<std::size_t>(a)], c) * d[c];
        }
        for (Index bcol = 0; bcol < nf; ++bcol)
          bff(a, bcol) = b_mat(free_idx[static_cast<std::size_t>(a)],
                               free_idx[static_cast<std::size_t>(bcol)]);
      }
      const VectorXd df = bff.ldlt().solve(rhs);
      for (Index a = 0; a < nf; ++a) d[free_idx[static_cast<std::size_t>(a)]] = df[a];
    }

    // Clamp any free variable that left the box.
    bool clamped = false;
    for (Index i : free_idx) {
      if (d[i] < lo[i] - 1e-14) {
        state[static_cast<std::size_t>(i)] = -1;
        d[i] = lo[i];
        clamped = true;
      } else if (d[i] > hi[i] + 1e-14) {
        state[static_cast<std::size_t>(i)] = 1;
        d[i] = hi[i];
        clamped = true;
      }
    }
    if (clamped) continue;

    // Release the most negative multiplier, if any.
    const VectorXd lambda = g + b_mat * d;
    Index worst = -1;
    double worst_val = 1e-12;
    for (Index i = 0; i < n; ++i) {
      const int st = state[static_cast<std::size_t>(i)];
      if (st == 0) continue;
      const double viol = st < 0 ? -lambda[i] : lambda[i];
      if (viol > worst_val) {
        worst_val = viol;
        worst = i;
      }
    }
    if (worst < 0) break;
    state[static_cast<std::size_t>(worst)] = 0;
  }

  for (Index i = 0; i < n; ++i) d[i] = std::clamp(d[i], lo[i], hi[i]);
  return d;
}

double projected_gradient_norm(const VectorXd& x, const VectorXd& g, const BoxBounds& b,
                               const VectorXd& range) {
  double norm = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    double gi = g[i] * range[i];  // scaled-coordinate gradient
    const double tol = 1e-10 * std::max(1.0, std::abs(b.upper[i]) + std::abs(b.lower[i]));
    if (x[i] <= b.lower[i] + tol && gi > 0.0) gi = 0.0;
    if (x[i] >= b.upper[i] - tol && gi < 0.0) gi = 0.0;
    norm = std::max(norm, std::abs(gi));
  }
  return norm;
}

}  // namespace

VectorXd fd_gradient(const BoxObjective& objective, const VectorXd& x,
                     const BoxBounds& bounds, double rel_step, double f_center) {
  const Index n = x.size();
  VectorXd g(n);
  for (Index i = 0; i < n; ++i) {
    const double range = bounds.upper[i] - bounds.lower[i];
    const double h = rel_step * std::max(std::abs(x[i]), range);
    VectorXd xp = x, xm = x;
    xp[i] = std::min(x[i] + h, bounds.upper[i]);
    xm[i] = std::max(x[i] - h, bounds.lower[i]);
    const double denom = xp[i] - xm[i];
    if (denom <= 0.0) {
      g[i] = 0.0;
      continue;
    }
    const ObjectiveValue fp = objective(xp);
    const ObjectiveValue fm = objective(xm);
    if (!fp.penalized && !fm.penalized) {
      g[i] = (fp.value - fm.value) / denom;
    } else if (!fp.penalized) {
      g[i] = (fp.value - f_center) / (xp[i] - x[i]);
    } else if (!fm.penalized) {
      g[i] = (f_center - fm.value) / (x[i] - xm[i]);
    } else {
      g[i] = 0.0;  // both probes failed; leave this direction to the others
    }
  }
  return g;
}

MinimizeResult minimize_box(const BoxObjective& objective, const BoxBounds& bounds,
                            const VectorXd& x0, const MinimizeOptions& options) {
  const Index n = x0.size();
  if (bounds.lower.size() != n || bounds.upper.size() != n)
    throw config_error("minimize_box: bounds dimension mismatch");
  for (Index i = 0; i < n; ++i)
    if (!(bounds.lower[i] <= bounds.upper[i]))
      throw estimator_error("infeasible problem");
  if (max_violation(x0, bounds) > 0.0)
    throw estimator_error("infeasible problem");

  VectorXd range(n);
  for (Index i = 0; i < n; ++i)
    range[i] = std::max(bounds.upper[i] - bounds.lower[i], 1e-30);

  VectorXd x = x0;
  ObjectiveValue f = objective(x);
  if (f.penalized) throw model_error("model fails at initial guess");

  MinimizeResult result;
  result.x = x;
  result.cost = f.value;

  MatrixXd b_mat = MatrixXd::Identity(n, n);  // model Hessian in scaled coords
  VectorXd g_x = fd_gradient(objective, x, bounds, options.fd_relative_step, f.value);
  VectorXd g_z = g_x.cwiseProduct(range);

  const auto record = [&](double cost) {
    result.trace.push_back({x, cost, max_violation(x, bounds),
                            projected_gradient_norm(x, g_x, bounds, range)});
  };
  record(f.value);

  bool hessian_reset = false;
  Termination termination = Termination::max_iterations;
  int it = 0;
  for (it = 1; it <= options.max_iterations; ++it) {
    if (projected_gradient_norm(x, g_x, bounds, range) < 1e-10) {
      termination = Termination::converged;
      break;
    }

    // Step bounds in scaled coordinates.
    VectorXd lo(n), hi(n);
    for (Index i = 0; i < n; ++i) {
      lo[i] = (bounds.lower[i] - x[i]) / range[i];
      hi[i] = (bounds.upper[i] - x[i]) / range[i];
    }
    VectorXd d_z = solve_box_qp(b_mat, g_z, lo, hi);
    double directional = g_z.dot(d_z);
    if (directional > -1e-16) {
      if (!hessian_reset) {
        hessian_reset = true;
        b_mat.setIdentity();
        d_z = solve_box_qp(b_mat, g_z, lo, hi);
        directional = g_z.dot(d_z);
      }
      if (directional > -1e-16) {
        termination = Termination::converged;
        break;
      }
    }

    // Backtracking Armijo line search; penalized samples are rejected.
    const double c1 = 1e-4;
    double t = 1.0;
    bool accepted = false;
    VectorXd x_new;
    ObjectiveValue f_new;
    while (t >= 1e-12) {
      x_new = x + t * d_z.cwiseProduct(range);
      for (Index i = 0; i < n; ++i)
        x_new[i] = std::clamp(x_new[i], bounds.lower[i], bounds.upper[i]);
      f_new = objective(x_new);
      if (!f_new.penalized && f_new.value <= f.value + c1 * t * directional) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (!hessian_reset) {
        hessian_reset = true;
        b_mat.setIdentity();
        continue;
      }
      termination = projected_gradient_norm(x, g_x, bounds, range) < 1e-4
                        ? Termination::converged
                        : Termination::stalled;
      break;
    }
    hessian_reset = false;

    const VectorXd g_x_new =
        fd_gradient(objective, x_new, bounds, options.fd_relative_step, f_new.value);
    const VectorXd g_z_new = g_x_new.cwiseProduct(range);

    // Damped BFGS update (Powell damping keeps the model positive definite).
    const VectorXd s = (x_new - x).cwiseQuotient(range);
    const VectorXd yv = g_z_new - g_z;
    const double sts_b = s.dot(b_mat * s);
    const double sty = s.dot(yv);
    if (sts_b > 0.0) {
      double theta = 1.0;
      if (sty < 0.2 * sts_b) theta = 0.8 * sts_b / (sts_b - sty);
      const VectorXd y_d = theta * yv + (1.0 - theta) * (b_mat * s);
      const double sty_d = s.dot(y_d);
      if (sty_d > 1e-14) {
        const VectorXd bs = b_mat * s;
        b_mat += y_d * y_d.transpose() / sty_d - bs * bs.transpose() / sts_b;
      }
    }

    const double delta_cost = f.value - f_new.value;
    x = x_new;
    f = f_new;
    g_x = g_x_new;
    g_z = g_z_new;
    record(f.value);

    if (f.value < result.cost) {
      result.cost = f.value;
      result.x = x;
    }

    if (std::abs(delta_cost) < options.cost_tolerance &&
        max_violation(x, bounds) < options.violation_tolerance) {
      termination = Termination::converged;
      break;
    }
  }

  if (f.value < result.cost) {
    result.cost = f.value;
    result.x = x;
  }
  result.termination = termination;
  result.iterations = std::min(it, options.max_iterations);
  return result;
}

}  // namespace uqscale
