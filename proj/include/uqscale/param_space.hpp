#ifndef UQSCALE_PARAM_SPACE_HPP
#define UQSCALE_PARAM_SPACE_HPP

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace uqscale {

enum class Distribution { uniform };

/// One uncertain scalar input: a name, a closed range in physical units and a
/// nominal value inside that range.
struct ParameterDef {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  double nominal = 0.5;
  Distribution distribution = Distribution::uniform;
};

/// Ordered set of uncertain parameters. Ordering is part of the contract:
/// column i of every sample matrix produced from a space refers to params()[i].
class ParameterSpace {
 public:
  ParameterSpace() = default;
  explicit ParameterSpace(std::vector<ParameterDef> params);

  void add(ParameterDef def);

  std::size_t dimension() const { return params_.size(); }
  const std::vector<ParameterDef>& params() const { return params_; }
  const ParameterDef& at(std::size_t i) const { return params_.at(i); }
  std::vector<std::string> names() const;
  /// Index of a named parameter, or -1.
  int index_of(const std::string& name) const;

 private:
  void validate(const ParameterDef& def) const;
  std::vector<ParameterDef> params_;
};

enum class SampleKind { lhs, monte_carlo };

/// N x D matrix of sampled parameter values in physical units, plus the
/// metadata needed to reproduce it bit-exactly.
struct SampleMatrix {
  Eigen::MatrixXd values;  // rows = samples, cols = parameters
  std::vector<std::string> columns;
  std::uint64_t seed = 0;
  SampleKind kind = SampleKind::lhs;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

/// The A/B/AB_i (optionally BA_i) matrix family backing Sobol estimation.
/// AB_i equals A with column i replaced from B; BA_i is the mirror image and
/// is only built when second-order indices were requested.
struct SaltelliDesign {
  SampleMatrix a;
  SampleMatrix b;
  std::vector<Eigen::MatrixXd> ab;
  std::vector<Eigen::MatrixXd> ba;  // empty unless second_order
  std::size_t base_n = 0;
  std::size_t total_evaluations = 0;
  bool second_order = false;

  std::size_t dimension() const { return ab.size(); }
};

/// Stratified Latin hypercube sample: per column, exactly one value falls in
/// each of the n equal-probability strata. Deterministic for a fixed seed.
SampleMatrix lhs_sample(const ParameterSpace& space, std::size_t n, std::uint64_t seed);

/// Plain independent uniform sampling (no stratification).
SampleMatrix monte_carlo_sample(const ParameterSpace& space, std::size_t n, std::uint64_t seed);

/// Builds the Saltelli matrix family from two independently seeded LHS
/// matrices. Evaluation order contract: A rows, B rows, AB_1..AB_D, then
/// BA_1..BA_D when present.
SaltelliDesign saltelli_design(const ParameterSpace& space, std::size_t base_n,
                               std::uint64_t seed, bool second_order);

/// Stacks the design into a single matrix in the canonical evaluation order.
SampleMatrix flatten_for_evaluation(const SaltelliDesign& design);

/// Which design block a flattened row belongs to.
struct BlockRef {
  enum class Block { a, b, ab, ba } block;
  std::size_t index;  // parameter index for ab/ba, 0 otherwise
  std::size_t row;
};
BlockRef locate_flat_row(const SaltelliDesign& design, std::size_t flat_row);

/// CSV with one header row of parameter names.
void write_csv(const SampleMatrix& m, std::ostream& os);

}  // namespace uqscale

#endif
