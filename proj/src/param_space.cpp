#include "uqscale/param_space.hpp"

#include <algorithm>
#include <ostream>

#include "uqscale/csv.hpp"
#include "uqscale/error.hpp"
#include "uqscale/rng.hpp"

namespace uqscale {

ParameterSpace::ParameterSpace(std::vector<ParameterDef> params) {
  for (auto& p : params) add(std::move(p));
}

void ParameterSpace::validate(const ParameterDef& def) const {
  if (def.name.empty()) throw config_error("parameter name must not be empty");
  if (!(def.lower < def.upper))
    throw config_error("parameter '" + def.name + "': lower must be < upper");
  if (def.nominal < def.lower || def.nominal > def.upper)
    throw config_error("parameter '" + def.name + "': nominal outside [lower, upper]");
  if (index_of(def.name) >= 0)
    throw config_error("duplicate parameter name '" + def.name + "'");
}

void ParameterSpace::add(ParameterDef def) {
  validate(def);
  params_.push_back(std::move(def));
}

std::vector<std::string> ParameterSpace::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.name);
  return out;
}

int ParameterSpace::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return static_cast<int>(i);
  return -1;
}

namespace {

void require_nonempty(const ParameterSpace& space) {
  if (space.dimension() == 0) throw config_error("empty parameter space");
}

}  // namespace

SampleMatrix lhs_sample(const ParameterSpace& space, std::size_t n, std::uint64_t seed) {
  require_nonempty(space);
  if (n < 1) throw config_error("lhs_sample: n must be >= 1");

  const std::size_t d = space.dimension();
  SampleMatrix out;
  out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  out.columns = space.names();
  out.seed = seed;
  out.kind = SampleKind::lhs;

  Rng rng(seed);
  std::vector<std::uint32_t> strata(n);
  for (std::size_t col = 0; col < d; ++col) {
    const auto& p = space.at(col);
    const double width = p.upper - p.lower;
    for (std::size_t j = 0; j < n; ++j) strata[j] = static_cast<std::uint32_t>(j);
    rng.shuffle(strata.begin(), strata.end());
    for (std::size_t j = 0; j < n; ++j) {
      const double u = (static_cast<double>(strata[j]) + rng.uniform01()) /
                       static_cast<double>(n);
      out.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(col)) =
          p.lower + width * u;
    }
  }
  return out;
}

SampleMatrix monte_carlo_sample(const ParameterSpace& space, std::size_t n, std::uint64_t seed) {
  require_nonempty(space);
  if (n < 1) throw config_error("monte_carlo_sample: n must be >= 1");

  const std::size_t d = space.dimension();
  SampleMatrix out;
  out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  out.columns = space.names();
  out.seed = seed;
  out.kind = SampleKind::monte_carlo;

  Rng rng(seed);
  for (std::size_t col = 0; col < d; ++col) {
    const auto& p = space.at(col);
    const double width = p.upper - p.lower;
    for (std::size_t j = 0; j < n; ++j)
      out.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(col)) =
          p.lower + width * rng.uniform01();
  }
  return out;
}

SaltelliDesign saltelli_design(const ParameterSpace& space, std::size_t base_n,
                               std::uint64_t seed, bool second_order) {
  require_nonempty(space);
  if (base_n < 2) throw config_error("saltelli_design: base_n must be >= 2");

  const std::size_t d = space.dimension();
  SaltelliDesign design;
  // A and B come from independent substreams of the master seed.
  design.a = lhs_sample(space, base_n, substream_seed(seed, 0));
  design.b = lhs_sample(space, base_n, substream_seed(seed, 1));
  design.base_n = base_n;
  design.second_order = second_order;

  design.ab.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    Eigen::MatrixXd m = design.a.values;
    m.col(static_cast<Eigen::Index>(i)) = design.b.values.col(static_cast<Eigen::Index>(i));
    design.ab.push_back(std::move(m));
  }
  if (second_order) {
    design.ba.reserve(d);
    for (std::size_t i = 0; i < d; ++i) {
      Eigen::MatrixXd m = design.b.values;
      m.col(static_cast<Eigen::Index>(i)) = design.a.values.col(static_cast<Eigen::Index>(i));
      design.ba.push_back(std::move(m));
    }
  }
  design.total_evaluations = base_n * (second_order ? (2 * d + 2) : (d + 2));
  return design;
}

SampleMatrix flatten_for_evaluation(const SaltelliDesign& design) {
  const std::size_t d = design.dimension();
  const std::size_t n = design.base_n;
  const std::size_t blocks = 2 + d + (design.second_order ? d : 0);

  SampleMatrix out;
  out.columns = design.a.columns;
  out.seed = design.a.seed;
  out.kind = design.a.kind;
  out.values.resize(static_cast<Eigen::Index>(blocks * n), static_cast<Eigen::Index>(d));

  Eigen::Index row = 0;
  const auto append = [&](const Eigen::MatrixXd& m) {
    out.values.middleRows(row, m.rows()) = m;
    row += m.rows();
  };
  append(design.a.values);
  append(design.b.values);
  for (const auto& m : design.ab) append(m);
  for (const auto& m : design.ba) append(m);
  return out;
}

BlockRef locate_flat_row(const SaltelliDesign& design, std::size_t flat_row) {
  const std::size_t n = design.base_n;
  const std::size_t d = design.dimension();
  const std::size_t block = flat_row / n;
  const std::size_t row = flat_row % n;
  if (block == 0) return {BlockRef::Block::a, 0, row};
  if (block == 1) return {BlockRef::Block::b, 0, row};
  if (block < 2 + d) return {BlockRef::Block::ab, block - 2, row};
  if (design.second_order && block < 2 + 2 * d)
    return {BlockRef::Block::ba, block - 2 - d, row};
  throw config_error("locate_flat_row: row beyond design");
}

void write_csv(const SampleMatrix& m, std::ostream& os) {
  csv::write_header(os, m.columns);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << csv::num(m.values(r, c));
    }
    os << '\n';
  }
}

}  // namespace uqscale
