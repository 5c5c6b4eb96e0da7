#include "uqscale/surrogate.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "uqscale/error.hpp"
#include "uqscale/rng.hpp"

namespace uqscale {

using Eigen::Index;

PolynomialRse::PolynomialRse(std::size_t dimension, bool include_interactions,
                             std::vector<AffineMap> normalization,
                             Eigen::VectorXd coefficients, FitStats stats)
    : include_interactions_(include_interactions),
      normalization_(std::move(normalization)),
      coefficients_(std::move(coefficients)),
      stats_(stats) {
  if (normalization_.size() != dimension)
    throw config_error("PolynomialRse: normalization size mismatch");
  if (static_cast<std::size_t>(coefficients_.size()) !=
      term_count(dimension, include_interactions))
    throw config_error("PolynomialRse: coefficient count mismatch");
}

std::size_t PolynomialRse::term_count(std::size_t d, bool include_interactions) {
  return 1 + d + (include_interactions ? d * (d - 1) / 2 : 0) + d;
}

std::vector<MonomialTerm> PolynomialRse::term_layout(std::size_t d,
                                                     bool include_interactions) {
  std::vector<MonomialTerm> terms;
  terms.reserve(term_count(d, include_interactions));
  terms.push_back({-1, -1});
  for (std::size_t i = 0; i < d; ++i) terms.push_back({static_cast<int>(i), -1});
  if (include_interactions)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j)
        terms.push_back({static_cast<int>(i), static_cast<int>(j)});
  for (std::size_t i = 0; i < d; ++i)
    terms.push_back({static_cast<int>(i), static_cast<int>(i)});
  return terms;
}

namespace {

/// One design-matrix row on normalized coordinates.
Eigen::RowVectorXd basis_row(const std::vector<MonomialTerm>& terms,
                             const Eigen::RowVectorXd& z) {
  Eigen::RowVectorXd out(static_cast<Index>(terms.size()));
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const auto& m = terms[t];
    double v = 1.0;
    if (m.i >= 0) v *= z[m.i];
    if (m.j >= 0) v *= z[m.j];
    out[static_cast<Index>(t)] = v;
  }
  return out;
}

Eigen::RowVectorXd normalize_row(const std::vector<AffineMap>& maps,
                                 const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  Eigen::RowVectorXd z(x.size());
  for (Index c = 0; c < x.size(); ++c) z[c] = maps[static_cast<std::size_t>(c)].apply(x[c]);
  return z;
}

}  // namespace

double PolynomialRse::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x_row) const {
  if (static_cast<std::size_t>(x_row.size()) != dimension())
    throw config_error("predict: input dimension mismatch");
  const auto terms = term_layout(dimension(), include_interactions_);
  const Eigen::RowVectorXd z = normalize_row(normalization_, x_row);
  return basis_row(terms, z).dot(coefficients_);
}

bool PolynomialRse::extrapolates(const Eigen::Ref<const Eigen::RowVectorXd>& x_row) const {
  const Eigen::RowVectorXd z = normalize_row(normalization_, x_row);
  for (Index c = 0; c < z.size(); ++c)
    if (z[c] < -1.0 - 1e-12 || z[c] > 1.0 + 1e-12) return true;
  return false;
}

PolynomialRse fit_rse(const SampleMatrix& x, const Eigen::VectorXd& y,
                      bool include_interactions) {
  const Index n = x.rows();
  const std::size_t d = static_cast<std::size_t>(x.cols());
  if (n != y.size()) throw config_error("fit_rse: row count mismatch between x and y");
  if (d == 0) throw config_error("fit_rse: empty input space");
  const std::size_t n_terms = PolynomialRse::term_count(d, include_interactions);
  if (static_cast<std::size_t>(n) < n_terms)
    throw estimator_error("insufficient samples for term count");

  std::vector<AffineMap> maps(d);
  for (std::size_t c = 0; c < d; ++c) {
    const auto col = x.values.col(static_cast<Index>(c));
    const double lo = col.minCoeff();
    const double hi = col.maxCoeff();
    if (hi > lo)
      maps[c] = {0.5 * (lo + hi), 0.5 * (hi - lo)};
    else
      maps[c] = {lo, 1.0};  // constant column maps to 0
  }

  const auto terms = PolynomialRse::term_layout(d, include_interactions);
  Eigen::MatrixXd phi(n, static_cast<Index>(n_terms));
  for (Index r = 0; r < n; ++r) {
    const Eigen::RowVectorXd z = normalize_row(maps, x.values.row(r));
    phi.row(r) = basis_row(terms, z);
  }

  // Rank-revealing least squares; returns the minimum-norm solution when the
  // normal equations are singular.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(phi);
  const Eigen::VectorXd coeffs = cod.solve(y);

  FitStats stats;
  stats.n_train = static_cast<std::size_t>(n);
  stats.rank_deficient = cod.rank() < static_cast<Index>(n_terms);

  const Eigen::VectorXd residuals = phi * coeffs - y;
  const double ss_res = residuals.squaredNorm();
  const double mean_y = y.mean();
  const double ss_tot = (y.array() - mean_y).square().sum();
  stats.rmse = std::sqrt(ss_res / static_cast<double>(n));
  if (ss_tot > 0.0)
    stats.r_squared = 1.0 - ss_res / ss_tot;
  else
    stats.r_squared = ss_res <= 1e-24 ? 1.0 : 0.0;

  return PolynomialRse(d, include_interactions, std::move(maps), coeffs, stats);
}

HoldoutStats fit_rse_with_holdout(const SampleMatrix& x, const Eigen::VectorXd& y,
                                  bool include_interactions, double holdout_fraction,
                                  std::uint64_t seed) {
  if (!(holdout_fraction > 0.0) || holdout_fraction >= 1.0)
    throw config_error("holdout fraction must be in (0, 1)");
  const std::size_t n = static_cast<std::size_t>(x.rows());
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  rng.shuffle(idx.begin(), idx.end());
  const std::size_t n_hold = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(holdout_fraction * static_cast<double>(n))));
  const std::size_t n_train = n - n_hold;
  if (n_train < PolynomialRse::term_count(static_cast<std::size_t>(x.cols()),
                                          include_interactions))
    throw estimator_error("insufficient samples for term count");

  SampleMatrix xt;
  xt.columns = x.columns;
  xt.seed = seed;
  xt.kind = x.kind;
  xt.values.resize(static_cast<Index>(n_train), x.cols());
  Eigen::VectorXd yt(static_cast<Index>(n_train));
  for (std::size_t i = 0; i < n_train; ++i) {
    xt.values.row(static_cast<Index>(i)) = x.values.row(static_cast<Index>(idx[i]));
    yt[static_cast<Index>(i)] = y[static_cast<Index>(idx[i])];
  }

  HoldoutStats out;
  out.rse = fit_rse(xt, yt, include_interactions);
  out.n_holdout = n_hold;
  double ss_res = 0.0, mean_h = 0.0;
  for (std::size_t i = n_train; i < n; ++i)
    mean_h += y[static_cast<Index>(idx[i])];
  mean_h /= static_cast<double>(n_hold);
  double ss_tot = 0.0;
  for (std::size_t i = n_train; i < n; ++i) {
    const double truth = y[static_cast<Index>(idx[i])];
    const double pred = out.rse.predict(x.values.row(static_cast<Index>(idx[i])));
    ss_res += (pred - truth) * (pred - truth);
    ss_tot += (truth - mean_h) * (truth - mean_h);
  }
  out.rmse_holdout = std::sqrt(ss_res / static_cast<double>(n_hold));
  out.r_squared_holdout = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot
                                       : (ss_res <= 1e-24 ? 1.0 : 0.0);
  return out;
}

std::pair<SampleMatrix, Eigen::VectorXd> subsample(const SampleMatrix& x,
                                                   const Eigen::VectorXd& y,
                                                   double fraction, std::uint64_t seed,
                                                   std::size_t min_rows) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw config_error("subsample: fraction must be in (0, 1]");
  if (x.rows() != y.size()) throw config_error("subsample: row count mismatch");
  const std::size_t n = static_cast<std::size_t>(x.rows());
  const std::size_t k = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(n)));
  if (k < min_rows) throw estimator_error("insufficient samples for term count");
  if (k == n) return {x, y};

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  rng.shuffle(idx.begin(), idx.end());
  idx.resize(k);
  std::sort(idx.begin(), idx.end());

  SampleMatrix xs;
  xs.columns = x.columns;
  xs.seed = seed;
  xs.kind = x.kind;
  xs.values.resize(static_cast<Index>(k), x.cols());
  Eigen::VectorXd ys(static_cast<Index>(k));
  for (std::size_t r = 0; r < k; ++r) {
    xs.values.row(static_cast<Index>(r)) = x.values.row(static_cast<Index>(idx[r]));
    ys[static_cast<Index>(r)] = y[static_cast<Index>(idx[r])];
  }
  return {std::move(xs), std::move(ys)};
}

SensitivityResult sobol_via_surrogate(const PolynomialRse& rse, const ParameterSpace& space,
                                      std::size_t base_n, std::uint64_t seed,
                                      SobolMethod method, bool second_order) {
  if (rse.dimension() != space.dimension())
    throw config_error("sobol_via_surrogate: RSE dimension does not match space");
  const SaltelliDesign design = saltelli_design(space, base_n, seed, second_order);
  const SampleMatrix flat = flatten_for_evaluation(design);
  Eigen::VectorXd y(flat.rows());
  for (Index r = 0; r < flat.rows(); ++r) y[r] = rse.predict(flat.values.row(r));
  const EvaluatedDesign ev = split_evaluations(design, y);
  return estimate_indices(ev, space.names(), method);
}

std::string PolynomialRse::to_json() const {
  nlohmann::json j;
  j["dimension"] = dimension();
  j["include_interactions"] = include_interactions_;
  nlohmann::json norms = nlohmann::json::array();
  for (const auto& m : normalization_) norms.push_back({{"offset", m.offset}, {"scale", m.scale}});
  j["normalization"] = norms;
  j["coefficients"] = std::vector<double>(coefficients_.data(),
                                          coefficients_.data() + coefficients_.size());
  j["fit_stats"] = {{"r_squared", stats_.r_squared},
                    {"rmse", stats_.rmse},
                    {"n_train", stats_.n_train},
                    {"rank_deficient", stats_.rank_deficient}};
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : term_layout(dimension(), include_interactions_))
    terms.push_back({t.i, t.j});
  j["terms"] = terms;
  return j.dump(2);
}

PolynomialRse PolynomialRse::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  const std::size_t d = j.at("dimension").get<std::size_t>();
  const bool inter = j.at("include_interactions").get<bool>();
  std::vector<AffineMap> maps;
  for (const auto& m : j.at("normalization"))
    maps.push_back({m.at("offset").get<double>(), m.at("scale").get<double>()});
  const auto cv = j.at("coefficients").get<std::vector<double>>();
  Eigen::VectorXd coeffs = Eigen::Map<const Eigen::VectorXd>(cv.data(),
                                                             static_cast<Index>(cv.size()));
  FitStats stats;
  const auto& fs = j.at("fit_stats");
  stats.r_squared = fs.at("r_squared").get<double>();
  stats.rmse = fs.at("rmse").get<double>();
  stats.n_train = fs.at("n_train").get<std::size_t>();
  stats.rank_deficient = fs.at("rank_deficient").get<bool>();
  return PolynomialRse(d, inter, std::move(maps), std::move(coeffs), stats);
}

}  // namespace uqscale
