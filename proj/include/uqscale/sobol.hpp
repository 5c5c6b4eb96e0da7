#ifndef UQSCALE_SOBOL_HPP
#define UQSCALE_SOBOL_HPP

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "uqscale/param_space.hpp"

namespace uqscale {

struct FailedRow {
  std::string block;  // "A", "B", "AB_i", "BA_i"
  std::size_t row = 0;
};

/// Model outputs arranged by design block. Non-finite outputs are recorded in
/// `failures` and the offending rows are excluded pairwise at estimation time.
struct EvaluatedDesign {
  std::size_t dimension = 0;
  std::size_t base_n = 0;
  Eigen::VectorXd y_a;
  Eigen::VectorXd y_b;
  std::vector<Eigen::VectorXd> y_ab;
  std::vector<Eigen::VectorXd> y_ba;  // empty unless the design carried BA
  std::vector<FailedRow> failures;

  bool has_second_order() const { return !y_ba.empty(); }
};

/// Splits a flat output vector (canonical A, B, AB_1.., BA_1.. order) back
/// into blocks and flags non-finite entries.
EvaluatedDesign split_evaluations(const SaltelliDesign& design, const Eigen::VectorXd& y);

enum class FailurePolicy {
  error,       // any failed row aborts estimation
  drop_pairs,  // drop failed rows from every block (default)
};

enum class SobolMethod { qmc, surrogate_full, surrogate_fraction };

std::string to_string(SobolMethod m);

/// Per-parameter first-order and total indices, optional second-order matrix,
/// and estimator diagnostics. Reported s1/st/s2 are clipped to [-0.1, 1.1];
/// the *_raw fields keep the unclipped estimates.
struct SensitivityResult {
  std::vector<std::string> parameters;
  Eigen::VectorXd s1, st;
  Eigen::VectorXd s1_raw, st_raw;
  std::optional<Eigen::MatrixXd> s2;      // clipped, symmetric, NaN diagonal
  std::optional<Eigen::MatrixXd> s2_raw;
  double output_mean = 0.0;
  double output_variance = 0.0;
  std::size_t base_n = 0;       // rows retained after the failure policy
  std::size_t dropped_rows = 0;
  SobolMethod method = SobolMethod::qmc;
};

/// Saltelli-2010 first-order estimator:
/// V_i ~ mean(y_B * (y_AB_i - y_A)) over the pooled variance of [y_A, y_B].
Eigen::VectorXd estimate_first_order(const EvaluatedDesign& ev,
                                     FailurePolicy policy = FailurePolicy::drop_pairs);

/// Jansen total-order estimator: ST_i ~ mean((y_A - y_AB_i)^2) / (2 V).
Eigen::VectorXd estimate_total(const EvaluatedDesign& ev,
                               FailurePolicy policy = FailurePolicy::drop_pairs);

/// Closed-pair second-order estimator; requires BA blocks.
/// S2_ij = V^c_ij / V - S1_i - S1_j with V^c_ij ~ mean(y_BA_i y_AB_j - y_A y_B).
Eigen::MatrixXd estimate_second_order(const EvaluatedDesign& ev,
                                      FailurePolicy policy = FailurePolicy::drop_pairs);

/// Runs all applicable estimators and assembles a SensitivityResult.
SensitivityResult estimate_indices(const EvaluatedDesign& ev,
                                   const std::vector<std::string>& parameter_names,
                                   SobolMethod method = SobolMethod::qmc,
                                   FailurePolicy policy = FailurePolicy::drop_pairs);

/// Percentile bootstrap over base rows (off by default in the pipeline).
struct BootstrapIntervals {
  Eigen::VectorXd s1_lo, s1_hi;
  Eigen::VectorXd st_lo, st_hi;
  std::size_t replicates = 0;
};
BootstrapIntervals bootstrap_intervals(const EvaluatedDesign& ev, std::size_t replicates,
                                       std::uint64_t seed,
                                       FailurePolicy policy = FailurePolicy::drop_pairs);

/// Parameters sorted by total index (descending, ties by parameter order) and
/// the critical subset { i : st_i >= threshold }.
struct Ranking {
  std::vector<int> order;
  std::vector<int> critical;
  bool all_below_threshold = false;
};
Ranking rank_parameters(const SensitivityResult& res, double threshold);

/// CSV columns: parameter, s1, st, s1_raw, st_raw.
void write_csv(const SensitivityResult& res, std::ostream& os);
/// JSON with indices, second-order matrix when present, and diagnostics.
std::string to_json(const SensitivityResult& res);

}  // namespace uqscale

#endif
