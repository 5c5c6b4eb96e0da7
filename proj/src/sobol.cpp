#include "uqscale/sobol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "uqscale/csv.hpp"
#include "uqscale/error.hpp"
#include "uqscale/rng.hpp"

namespace uqscale {

namespace {

using Eigen::Index;

bool finite(double v) { return std::isfinite(v); }

/// Design blocks compacted to the rows retained by the failure policy,
/// centered on the pooled [y_A, y_B] mean.
struct CleanDesign {
  Eigen::VectorXd a, b;
  std::vector<Eigen::VectorXd> ab, ba;
  double mean = 0.0;
  double variance = 0.0;  // population variance of pooled [a, b]
  std::size_t retained = 0;
  std::size_t dropped = 0;
};

std::vector<bool> failure_mask(const EvaluatedDesign& ev) {
  std::vector<bool> bad(ev.base_n, false);
  auto scan = [&](const Eigen::VectorXd& v) {
    for (Index j = 0; j < v.size(); ++j)
      if (!finite(v[j])) bad[static_cast<std::size_t>(j)] = true;
  };
  scan(ev.y_a);
  scan(ev.y_b);
  for (const auto& v : ev.y_ab) scan(v);
  for (const auto& v : ev.y_ba) scan(v);
  return bad;
}

CleanDesign clean(const EvaluatedDesign& ev, FailurePolicy policy) {
  if (ev.base_n < 2) throw estimator_error("sobol: base_n must be >= 2");
  const auto bad = failure_mask(ev);
  const std::size_t n_bad =
      static_cast<std::size_t>(std::count(bad.begin(), bad.end(), true));
  if (n_bad > 0 && policy == FailurePolicy::error)
    throw estimator_error("sobol: design contains failed rows");

  const std::size_t n = ev.base_n - n_bad;
  if (n < 2) throw estimator_error("sobol: fewer than 2 rows retained");

  CleanDesign out;
  out.retained = n;
  out.dropped = n_bad;
  auto compact = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd c(static_cast<Index>(n));
    Index k = 0;
    for (Index j = 0; j < v.size(); ++j)
      if (!bad[static_cast<std::size_t>(j)]) c[k++] = v[j];
    return c;
  };
  out.a = compact(ev.y_a);
  out.b = compact(ev.y_b);
  out.ab.reserve(ev.y_ab.size());
  for (const auto& v : ev.y_ab) out.ab.push_back(compact(v));
  out.ba.reserve(ev.y_ba.size());
  for (const auto& v : ev.y_ba) out.ba.push_back(compact(v));

  const double nn = static_cast<double>(2 * n);
  out.mean = (out.a.sum() + out.b.sum()) / nn;
  out.a.array() -= out.mean;
  out.b.array() -= out.mean;
  for (auto& v : out.ab) v.array() -= out.mean;
  for (auto& v : out.ba) v.array() -= out.mean;
  out.variance = (out.a.squaredNorm() + out.b.squaredNorm()) / nn;
  if (!(out.variance > 0.0)) throw estimator_error("constant output");
  return out;
}

Eigen::VectorXd first_order_of(const CleanDesign& cd) {
  const std::size_t d = cd.ab.size();
  const double n = static_cast<double>(cd.retained);
  Eigen::VectorXd s1(static_cast<Index>(d));
  for (std::size_t i = 0; i < d; ++i)
    s1[static_cast<Index>(i)] =
        cd.b.dot(cd.ab[i] - cd.a) / n / cd.variance;
  return s1;
}

Eigen::VectorXd total_of(const CleanDesign& cd) {
  const std::size_t d = cd.ab.size();
  const double n = static_cast<double>(cd.retained);
  Eigen::VectorXd st(static_cast<Index>(d));
  for (std::size_t i = 0; i < d; ++i)
    st[static_cast<Index>(i)] =
        0.5 * (cd.a - cd.ab[i]).squaredNorm() / n / cd.variance;
  return st;
}

Eigen::MatrixXd second_order_of(const CleanDesign& cd) {
  const std::size_t d = cd.ab.size();
  const double n = static_cast<double>(cd.retained);
  const Eigen::VectorXd s1 = first_order_of(cd);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Constant(
      static_cast<Index>(d), static_cast<Index>(d),
      std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      const double v_closed =
          (cd.ba[i].cwiseProduct(cd.ab[j]).sum() - cd.a.dot(cd.b)) / n;
      const double val = v_closed / cd.variance - s1[static_cast<Index>(i)] -
                         s1[static_cast<Index>(j)];
      s2(static_cast<Index>(i), static_cast<Index>(j)) = val;
      s2(static_cast<Index>(j), static_cast<Index>(i)) = val;
    }
  }
  return s2;
}

double clip_index(double v) { return std::clamp(v, -0.1, 1.1); }

}  // namespace

EvaluatedDesign split_evaluations(const SaltelliDesign& design, const Eigen::VectorXd& y) {
  const std::size_t d = design.dimension();
  const std::size_t n = design.base_n;
  const std::size_t blocks = 2 + d + (design.second_order ? d : 0);
  if (static_cast<std::size_t>(y.size()) != blocks * n)
    throw estimator_error("split_evaluations: output length does not match design");

  EvaluatedDesign ev;
  ev.dimension = d;
  ev.base_n = n;
  std::size_t offset = 0;
  auto take = [&](const std::string& label) {
    Eigen::VectorXd v = y.segment(static_cast<Index>(offset), static_cast<Index>(n));
    for (Index j = 0; j < v.size(); ++j)
      if (!finite(v[j]))
        ev.failures.push_back({label, static_cast<std::size_t>(j)});
    offset += n;
    return v;
  };
  ev.y_a = take("A");
  ev.y_b = take("B");
  for (std::size_t i = 0; i < d; ++i) ev.y_ab.push_back(take("AB_" + std::to_string(i + 1)));
  if (design.second_order)
    for (std::size_t i = 0; i < d; ++i) ev.y_ba.push_back(take("BA_" + std::to_string(i + 1)));
  return ev;
}

Eigen::VectorXd estimate_first_order(const EvaluatedDesign& ev, FailurePolicy policy) {
  return first_order_of(clean(ev, policy));
}

Eigen::VectorXd estimate_total(const EvaluatedDesign& ev, FailurePolicy policy) {
  return total_of(clean(ev, policy));
}

Eigen::MatrixXd estimate_second_order(const EvaluatedDesign& ev, FailurePolicy policy) {
  if (!ev.has_second_order()) throw estimator_error("second-order design required");
  return second_order_of(clean(ev, policy));
}

SensitivityResult estimate_indices(const EvaluatedDesign& ev,
                                   const std::vector<std::string>& parameter_names,
                                   SobolMethod method, FailurePolicy policy) {
  if (parameter_names.size() != ev.dimension)
    throw estimator_error("estimate_indices: name count does not match dimension");
  const CleanDesign cd = clean(ev, policy);

  SensitivityResult res;
  res.parameters = parameter_names;
  res.method = method;
  res.base_n = cd.retained;
  res.dropped_rows = cd.dropped;
  res.output_mean = cd.mean;
  res.output_variance = cd.variance;
  res.s1_raw = first_order_of(cd);
  res.st_raw = total_of(cd);
  res.s1 = res.s1_raw.unaryExpr([](double v) { return clip_index(v); });
  res.st = res.st_raw.unaryExpr([](double v) { return clip_index(v); });
  if (ev.has_second_order()) {
    res.s2_raw = second_order_of(cd);
    res.s2 = res.s2_raw->unaryExpr(
        [](double v) { return std::isnan(v) ? v : clip_index(v); });
  }
  return res;
}

BootstrapIntervals bootstrap_intervals(const EvaluatedDesign& ev, std::size_t replicates,
                                       std::uint64_t seed, FailurePolicy policy) {
  if (replicates < 2) throw estimator_error("bootstrap: need >= 2 replicates");
  const CleanDesign cd = clean(ev, policy);
  const std::size_t n = cd.retained;
  const std::size_t d = cd.ab.size();

  std::vector<Eigen::VectorXd> s1_reps, st_reps;
  s1_reps.reserve(replicates);
  st_reps.reserve(replicates);
  Rng rng(seed);
  std::vector<std::size_t> pick(n);
  EvaluatedDesign resampled;
  resampled.dimension = d;
  resampled.base_n = n;
  resampled.y_ab.resize(d);
  for (std::size_t r = 0; r < replicates; ++r) {
    for (auto& p : pick) p = rng.index(n);
    auto gather = [&](const Eigen::VectorXd& v) {
      Eigen::VectorXd g(static_cast<Index>(n));
      for (std::size_t j = 0; j < n; ++j) g[static_cast<Index>(j)] = v[static_cast<Index>(pick[j])];
      return g;
    };
    resampled.y_a = gather(cd.a);
    resampled.y_b = gather(cd.b);
    for (std::size_t i = 0; i < d; ++i) resampled.y_ab[i] = gather(cd.ab[i]);
    s1_reps.push_back(estimate_first_order(resampled, FailurePolicy::error));
    st_reps.push_back(estimate_total(resampled, FailurePolicy::error));
  }

  auto percentile = [&](const std::vector<Eigen::VectorXd>& reps, double q, Index i) {
    std::vector<double> vals(reps.size());
    for (std::size_t r = 0; r < reps.size(); ++r) vals[r] = reps[r][i];
    std::sort(vals.begin(), vals.end());
    const double pos = q * static_cast<double>(vals.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, vals.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return (1.0 - w) * vals[lo] + w * vals[hi];
  };

  BootstrapIntervals out;
  out.replicates = replicates;
  out.s1_lo.resize(static_cast<Index>(d));
  out.s1_hi.resize(static_cast<Index>(d));
  out.st_lo.resize(static_cast<Index>(d));
  out.st_hi.resize(static_cast<Index>(d));
  for (Index i = 0; i < static_cast<Index>(d); ++i) {
    out.s1_lo[i] = percentile(s1_reps, 0.025, i);
    out.s1_hi[i] = percentile(s1_reps, 0.975, i);
    out.st_lo[i] = percentile(st_reps, 0.025, i);
    out.st_hi[i] = percentile(st_reps, 0.975, i);
  }
  return out;
}

Ranking rank_parameters(const SensitivityResult& res, double threshold) {
  const int d = static_cast<int>(res.parameters.size());
  Ranking r;
  r.order.resize(static_cast<std::size_t>(d));
  std::iota(r.order.begin(), r.order.end(), 0);
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](int a, int b) { return res.st[a] > res.st[b]; });
  for (int i : r.order)
    if (res.st[i] >= threshold) r.critical.push_back(i);
  r.all_below_threshold = r.critical.empty();
  return r;
}

std::string to_string(SobolMethod m) {
  switch (m) {
    case SobolMethod::qmc: return "qmc";
    case SobolMethod::surrogate_full: return "surrogate_full";
    case SobolMethod::surrogate_fraction: return "surrogate_fraction";
  }
  return "unknown";
}

void write_csv(const SensitivityResult& res, std::ostream& os) {
  csv::write_header(os, {"parameter", "s1", "st", "s1_raw", "st_raw"});
  for (std::size_t i = 0; i < res.parameters.size(); ++i) {
    const auto k = static_cast<Index>(i);
    os << res.parameters[i] << ',' << csv::num(res.s1[k]) << ',' << csv::num(res.st[k])
       << ',' << csv::num(res.s1_raw[k]) << ',' << csv::num(res.st_raw[k]) << '\n';
  }
}

std::string to_json(const SensitivityResult& res) {
  nlohmann::json j;
  j["method"] = to_string(res.method);
  j["base_n"] = res.base_n;
  j["dropped_rows"] = res.dropped_rows;
  j["output_mean"] = res.output_mean;
  j["output_variance"] = res.output_variance;
  j["parameters"] = res.parameters;
  auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  j["s1"] = vec(res.s1);
  j["st"] = vec(res.st);
  j["s1_raw"] = vec(res.s1_raw);
  j["st_raw"] = vec(res.st_raw);
  if (res.s2) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index r = 0; r < res.s2->rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Index c = 0; c < res.s2->cols(); ++c) {
        const double v = (*res.s2)(r, c);
        if (std::isnan(v))
          row.push_back(nullptr);
        else
          row.push_back(v);
      }
      rows.push_back(row);
    }
    j["s2"] = rows;
  }
  return j.dump(2);
}

}  // namespace uqscale
