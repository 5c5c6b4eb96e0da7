#ifndef UQSCALE_SURROGATE_HPP
#define UQSCALE_SURROGATE_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "uqscale/param_space.hpp"
#include "uqscale/sobol.hpp"

namespace uqscale {

/// x -> (x - offset) / scale, mapping the training range onto [-1, 1].
struct AffineMap {
  double offset = 0.0;
  double scale = 1.0;
  double apply(double x) const { return (x - offset) / scale; }
};

struct FitStats {
  double r_squared = 0.0;
  double rmse = 0.0;
  std::size_t n_train = 0;
  bool rank_deficient = false;
};

/// Monomial in normalized inputs: constant (both -1), linear/square (j = -1),
/// or pairwise product.
struct MonomialTerm {
  int i = -1;
  int j = -1;  // i == j => square, j < 0 => linear, both < 0 => constant
};

/// Quadratic response-surface equation fitted by least squares on inputs
/// normalized to [-1, 1]. Term order: constant, linear 0..D-1, pairwise
/// interactions (i < j) when enabled, then squares 0..D-1.
class PolynomialRse {
 public:
  PolynomialRse() = default;
  PolynomialRse(std::size_t dimension, bool include_interactions,
                std::vector<AffineMap> normalization, Eigen::VectorXd coefficients,
                FitStats stats);

  static std::size_t term_count(std::size_t dimension, bool include_interactions);
  static std::vector<MonomialTerm> term_layout(std::size_t dimension,
                                               bool include_interactions);

  std::size_t dimension() const { return normalization_.size(); }
  bool include_interactions() const { return include_interactions_; }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }
  const std::vector<AffineMap>& normalization() const { return normalization_; }
  const FitStats& stats() const { return stats_; }

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x_row) const;
  /// True when any normalized coordinate falls outside [-1, 1].
  bool extrapolates(const Eigen::Ref<const Eigen::RowVectorXd>& x_row) const;

  std::string to_json() const;
  static PolynomialRse from_json(const std::string& text);

 private:
  bool include_interactions_ = true;
  std::vector<AffineMap> normalization_;
  Eigen::VectorXd coefficients_;
  FitStats stats_;
};

/// Least-squares fit of the quadratic RSE. Rank-deficient systems fall back
/// to the minimum-norm solution and set stats().rank_deficient.
PolynomialRse fit_rse(const SampleMatrix& x, const Eigen::VectorXd& y,
                      bool include_interactions);

/// Optional holdout validation (off in the default pipeline): fits on a
/// (1 - holdout_fraction) split and reports fit quality on the held-out rows.
struct HoldoutStats {
  PolynomialRse rse;  // fitted on the training split
  double r_squared_holdout = 0.0;
  double rmse_holdout = 0.0;
  std::size_t n_holdout = 0;
};
HoldoutStats fit_rse_with_holdout(const SampleMatrix& x, const Eigen::VectorXd& y,
                                  bool include_interactions, double holdout_fraction,
                                  std::uint64_t seed);

/// Uniform row subsample without replacement (floor(fraction * rows) rows,
/// original row order preserved). Errors when fewer than min_rows survive.
std::pair<SampleMatrix, Eigen::VectorXd> subsample(const SampleMatrix& x,
                                                   const Eigen::VectorXd& y,
                                                   double fraction, std::uint64_t seed,
                                                   std::size_t min_rows = 1);

/// Builds a fresh Saltelli design over `space`, evaluates the RSE on it and
/// runs the Sobol estimators.
SensitivityResult sobol_via_surrogate(const PolynomialRse& rse, const ParameterSpace& space,
                                      std::size_t base_n, std::uint64_t seed,
                                      SobolMethod method = SobolMethod::surrogate_full,
                                      bool second_order = false);

}  // namespace uqscale

#endif
