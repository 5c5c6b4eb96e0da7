#include "uqscale/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "uqscale/csv.hpp"
#include "uqscale/error.hpp"
#include "uqscale/rng.hpp"
#include "uqscale/sobol.hpp"
#include "uqscale/surrogate.hpp"
#include "uqscale/version.hpp"

namespace uqscale {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) {
        known = true;
        break;
      }
    if (!known) throw config_error("unknown key '" + key + "' in " + where);
  }
}

class StageTimer {
 public:
  explicit StageTimer(StageResult& result, std::string label)
      : result_(result), label_(std::move(label)),
        start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    result_.timings_s[label_] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  StageResult& result_;
  std::string label_;
  std::chrono::steady_clock::time_point start_;
};

std::filesystem::path ensure_out_dir(const std::string& out_dir) {
  std::filesystem::path p(out_dir);
  std::filesystem::create_directories(p);
  return p;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write '" + path.string() + "'");
  out << text;
}

/// Row evaluator for the sensitivity stage: maps a named sample row onto the
/// chosen model and returns the system response (range or L/D). Non-finite
/// values signal evaluation failure and flow into the drop-pairs policy.
class ModelBinding {
 public:
  ModelBinding(const PipelineConfig& config, const ParameterSpace& space)
      : config_(config) {
    names_ = space.names();
    const auto known = known_names();
    for (const auto& n : names_) {
      if (std::find(known.begin(), known.end(), n) == known.end())
        throw config_error("parameter '" + n + "' is not an input of the chosen model");
    }
  }

  std::vector<std::string> known_names() const {
    if (config_.model.kind == ModelKind::lumped_range)
      return {"weng", "owfact", "fact", "fcdi", "fcdo", "frfu",
              "e_span", "rspsob", "rspchd"};
    return {"alpha", "mach", "structure_location", "young_modulus"};
  }

  double operator()(const Eigen::RowVectorXd& row) const {
    if (config_.model.kind == ModelKind::lumped_range) return eval_range(row);
    return eval_aerostruct(row);
  }

 private:
  double value_of(const Eigen::RowVectorXd& row, const char* name, double fallback) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return row[static_cast<Eigen::Index>(i)];
    return fallback;
  }

  double eval_range(const Eigen::RowVectorXd& row) const {
    RangeModelInputs in;
    in.baseline = config_.baseline.range;
    in.cruise = config_.model.cruise;
    in.weng = value_of(row, "weng", 1.0);
    in.owfact = value_of(row, "owfact", 1.0);
    in.fact = value_of(row, "fact", 1.0);
    in.fcdi = value_of(row, "fcdi", 1.0);
    in.fcdo = value_of(row, "fcdo", 1.0);
    in.frfu = value_of(row, "frfu", 1.0);
    in.e_span = value_of(row, "e_span", 1.0);
    in.rspsob = value_of(row, "rspsob", 0.60);
    in.rspchd = value_of(row, "rspchd", 0.60);
    try {
      return lumped_range(in);
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  }

  double eval_aerostruct(const Eigen::RowVectorXd& row) const {
    WingModelSpec model =
        config_.baseline.make_model(config_.model.use_wingbox, config_.model.mesh);
    const double loc = value_of(row, "structure_location", 0.60);
    if (auto* box = std::get_if<WingboxSection>(&model.structure))
      box->rear_spar_fraction = loc;
    else
      std::get<TubularSpar>(model.structure).axis_chord_fraction = 0.5 * (0.10 + loc);
    model.young_modulus_pa = value_of(row, "young_modulus", model.young_modulus_pa);
    CruiseCondition cond = config_.model.cruise;
    cond.alpha_deg = value_of(row, "alpha", cond.alpha_deg);
    cond.mach = value_of(row, "mach", cond.mach);
    try {
      const AeroStructResult res = evaluate_aerostruct(model, cond);
      if (!res.converged) return std::numeric_limits<double>::quiet_NaN();
      return res.l_over_d;
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  }

  const PipelineConfig& config_;
  std::vector<std::string> names_;
};

Eigen::VectorXd evaluate_rows(const ModelBinding& binding, const SampleMatrix& m,
                              int threads) {
  const std::size_t n = static_cast<std::size_t>(m.rows());
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  const auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r)
      y[static_cast<Eigen::Index>(r)] =
          binding(m.values.row(static_cast<Eigen::Index>(r)));
  };
  if (threads <= 1) {
    worker(0, n);
  } else {
    const std::size_t chunk = (n + threads - 1) / threads;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      const std::size_t begin = std::min(n, t * chunk);
      const std::size_t end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  return y;
}

ParameterDef make_param(const std::string& name, double lo, double hi, double nominal) {
  ParameterDef p;
  p.name = name;
  p.lower = lo;
  p.upper = hi;
  p.nominal = nominal;
  return p;
}

std::string fraction_tag(double f) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "f%.2f", f);
  return buf;
}

std::string json_line(const json& j) { return j.dump(); }

}  // namespace

ParameterSpace StudyConfig::default_space() {
  ParameterSpace s;
  s.add(make_param("alpha", 7.0, 10.0, 8.5));
  s.add(make_param("mach", 0.82, 0.86, 0.84));
  s.add(make_param("structure_location", 0.55, 0.65, 0.60));
  s.add(make_param("young_modulus", 0.9 * 73.1e9, 1.1 * 73.1e9, 73.1e9));
  return s;
}

ParameterSpace PipelineConfig::default_space(ModelKind kind) {
  ParameterSpace s;
  if (kind == ModelKind::lumped_range) {
    for (const char* name : {"weng", "owfact", "fact", "fcdi", "fcdo", "frfu", "e_span"})
      s.add(make_param(name, 0.95, 1.05, 1.0));
    s.add(make_param("rspsob", 0.55, 0.65, 0.60));
    s.add(make_param("rspchd", 0.55, 0.65, 0.60));
    return s;
  }
  return StudyConfig::default_space();
}

ParameterSpace PipelineConfig::resolve_space() const {
  if (parameters) return *parameters;
  return default_space(model.kind);
}

namespace {

ParameterSpace space_from_json(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.empty())
    throw config_error(where + " must be a non-empty array");
  ParameterSpace s;
  for (const auto& p : arr) {
    reject_unknown(p, {"name", "lower", "upper", "nominal"}, where + " entry");
    for (const char* k : {"name", "lower", "upper", "nominal"})
      if (!p.contains(k))
        throw config_error(where + " entry missing key '" + std::string(k) + "'");
    ParameterDef def;
    def.name = p.at("name").get<std::string>();
    def.lower = p.at("lower").get<double>();
    def.upper = p.at("upper").get<double>();
    def.nominal = p.at("nominal").get<double>();
    s.add(def);
  }
  return s;
}

CruiseCondition cruise_from_json(const json& j, const CruiseCondition& base,
                                 const std::string& where) {
  reject_unknown(j, {"mach", "alpha", "altitude"}, where);
  CruiseCondition c = base;
  if (j.contains("mach")) c.mach = j.at("mach").get<double>();
  if (j.contains("alpha")) c.alpha_deg = j.at("alpha").get<double>();
  if (j.contains("altitude")) c.altitude_m = j.at("altitude").get<double>();
  return c;
}

void check_range(double lo, double hi, const std::string& what) {
  if (!(lo <= hi)) throw config_error("invalid bounds for " + what + ": lower > upper");
}

}  // namespace

namespace {
PipelineConfig parse_config(const json& j);
}  // namespace

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("config: invalid JSON: ") + e.what());
  }
  try {
    return parse_config(j);
  } catch (const json::exception& e) {
    throw config_error(std::string("config: ") + e.what());
  }
}

namespace {

PipelineConfig parse_config(const json& j) {
  reject_unknown(j, {"model", "parameters", "sampler", "surrogate", "study", "scaling",
                     "ranking_threshold", "output_dir"},
                 "config");

  PipelineConfig c;
  if (j.contains("model")) {
    const auto& m = j.at("model");
    reject_unknown(m, {"kind", "structure", "mesh", "cruise", "baseline"}, "model");
    if (m.contains("kind")) {
      const std::string kind = m.at("kind").get<std::string>();
      if (kind == "lumped_range")
        c.model.kind = ModelKind::lumped_range;
      else if (kind == "aerostruct")
        c.model.kind = ModelKind::aerostruct;
      else
        throw config_error("model.kind must be 'lumped_range' or 'aerostruct'");
    }
    if (m.contains("structure")) {
      const std::string s = m.at("structure").get<std::string>();
      if (s == "wingbox")
        c.model.use_wingbox = true;
      else if (s == "tubular_spar")
        c.model.use_wingbox = false;
      else
        throw config_error("model.structure must be 'wingbox' or 'tubular_spar'");
    }
    if (m.contains("mesh")) c.model.mesh = mesh_from_string(m.at("mesh").get<std::string>());
    if (m.contains("cruise"))
      c.model.cruise = cruise_from_json(m.at("cruise"), c.model.cruise, "model.cruise");
    if (m.contains("baseline")) c.model.baseline_path = m.at("baseline").get<std::string>();
  }
  if (j.contains("parameters")) c.parameters = space_from_json(j.at("parameters"), "parameters");

  if (j.contains("sampler")) {
    const auto& s = j.at("sampler");
    reject_unknown(s, {"base_n", "seed", "second_order"}, "sampler");
    if (s.contains("base_n")) c.sampler.base_n = s.at("base_n").get<std::size_t>();
    if (s.contains("seed")) c.sampler.seed = s.at("seed").get<std::uint64_t>();
    if (s.contains("second_order")) c.sampler.second_order = s.at("second_order").get<bool>();
    if (c.sampler.base_n < 2) throw config_error("sampler.base_n must be >= 2");
  }

  if (j.contains("surrogate")) {
    const auto& s = j.at("surrogate");
    reject_unknown(s, {"fractions", "include_interactions"}, "surrogate");
    if (s.contains("fractions")) {
      c.surrogate.fractions = s.at("fractions").get<std::vector<double>>();
      for (double f : c.surrogate.fractions)
        if (!(f > 0.0) || f > 1.0)
          throw config_error("surrogate.fractions entries must be in (0, 1]");
    }
    if (s.contains("include_interactions"))
      c.surrogate.include_interactions = s.at("include_interactions").get<bool>();
  }

  c.study.space = StudyConfig::default_space();
  if (j.contains("study")) {
    const auto& s = j.at("study");
    reject_unknown(s, {"structures", "rows", "seed", "altitude", "ranges"}, "study");
    if (s.contains("structures")) {
      c.study.structures = s.at("structures").get<std::vector<std::string>>();
      if (c.study.structures.empty()) throw config_error("study.structures must not be empty");
    }
    if (s.contains("rows")) c.study.rows = s.at("rows").get<std::size_t>();
    if (s.contains("seed")) c.study.seed = s.at("seed").get<std::uint64_t>();
    if (s.contains("altitude")) c.study.altitude_m = s.at("altitude").get<double>();
    if (s.contains("ranges")) {
      const auto& r = s.at("ranges");
      reject_unknown(r, {"alpha", "mach", "structure_location", "young_modulus"},
                     "study.ranges");
      ParameterSpace space;
      const ParameterSpace defaults = StudyConfig::default_space();
      for (const auto& def : defaults.params()) {
        ParameterDef d = def;
        if (r.contains(def.name)) {
          const auto arr = r.at(def.name).get<std::vector<double>>();
          if (arr.size() != 2) throw config_error("study.ranges." + def.name + " must be [lo, hi]");
          check_range(arr[0], arr[1], "study.ranges." + def.name);
          d.lower = arr[0];
          d.upper = arr[1];
          d.nominal = 0.5 * (arr[0] + arr[1]);
        }
        space.add(d);
      }
      c.study.space = space;
    }
    if (c.study.rows < 1) throw config_error("study.rows must be >= 1");
  }

  if (j.contains("scaling")) {
    const auto& s = j.at("scaling");
    reject_unknown(s, {"weights", "bounds", "x0", "structure", "mesh", "full_cruise"},
                   "scaling");
    if (s.contains("weights")) {
      const auto& w = s.at("weights");
      reject_unknown(w, {"ld", "re", "ma"}, "scaling.weights");
      if (w.contains("ld")) c.scaling.weights.ld = w.at("ld").get<double>();
      if (w.contains("re")) c.scaling.weights.re = w.at("re").get<double>();
      if (w.contains("ma")) c.scaling.weights.ma = w.at("ma").get<double>();
      if (c.scaling.weights.ld <= 0 || c.scaling.weights.re <= 0 || c.scaling.weights.ma <= 0)
        throw config_error("scaling.weights must be positive");
    }
    if (s.contains("bounds")) {
      const auto& b = s.at("bounds");
      reject_unknown(b, {"n", "alpha", "mach", "altitude", "young_modulus"},
                     "scaling.bounds");
      const auto read = [&](const char* key, double& lo, double& hi) {
        if (!b.contains(key)) return;
        const auto arr = b.at(key).get<std::vector<double>>();
        if (arr.size() != 2)
          throw config_error(std::string("scaling.bounds.") + key + " must be [lo, hi]");
        check_range(arr[0], arr[1], std::string("scaling.bounds.") + key);
        lo = arr[0];
        hi = arr[1];
      };
      read("n", c.scaling.bounds.n_min, c.scaling.bounds.n_max);
      read("alpha", c.scaling.bounds.alpha_min, c.scaling.bounds.alpha_max);
      read("mach", c.scaling.bounds.mach_min, c.scaling.bounds.mach_max);
      read("altitude", c.scaling.bounds.altitude_min, c.scaling.bounds.altitude_max);
      read("young_modulus", c.scaling.bounds.e_min, c.scaling.bounds.e_max);
    }
    if (s.contains("x0")) {
      const auto arr = s.at("x0").get<std::vector<double>>();
      if (arr.size() != 5)
        throw config_error("scaling.x0 must have 5 entries [n, alpha, Ma, h, E]");
      c.scaling.x0 = DesignVector{arr[0], arr[1], arr[2], arr[3], arr[4]};
    }
    if (s.contains("structure")) {
      const std::string v = s.at("structure").get<std::string>();
      if (v == "wingbox")
        c.scaling.use_wingbox = true;
      else if (v == "tubular_spar")
        c.scaling.use_wingbox = false;
      else
        throw config_error("scaling.structure must be 'wingbox' or 'tubular_spar'");
    }
    if (s.contains("mesh")) c.scaling.mesh = mesh_from_string(s.at("mesh").get<std::string>());
    if (s.contains("full_cruise"))
      c.scaling.full_cruise =
          cruise_from_json(s.at("full_cruise"), c.scaling.full_cruise, "scaling.full_cruise");
  }

  if (j.contains("ranking_threshold")) {
    c.ranking_threshold = j.at("ranking_threshold").get<double>();
    if (c.ranking_threshold < 0.0) throw config_error("ranking_threshold must be >= 0");
  }
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();

  c.baseline = c.model.baseline_path.empty() ? VehicleBaseline::builtin()
                                             : load_vehicle_baseline(c.model.baseline_path);

  // Validate parameter names against the chosen model's input set.
  ModelBinding binding(c, c.resolve_space());
  (void)binding;

  c.canonical_text = j.dump();
  return c;
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string PipelineConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical_text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

StageResult cmd_sensitivity(const PipelineConfig& config, const std::string& out_dir,
                            int threads) {
  StageResult result;
  result.command = "sensitivity";
  const auto out = ensure_out_dir(out_dir);
  const ParameterSpace space = config.resolve_space();
  const ModelBinding binding(config, space);

  SaltelliDesign design;
  SampleMatrix flat;
  Eigen::VectorXd y;
  {
    StageTimer timer(result, "evaluate");
    design = saltelli_design(space, config.sampler.base_n, config.sampler.seed,
                             config.sampler.second_order);
    flat = flatten_for_evaluation(design);
    y = evaluate_rows(binding, flat, threads);
  }
  result.evaluations = static_cast<std::size_t>(flat.rows());

  StageTimer timer(result, "estimate");
  const EvaluatedDesign ev = split_evaluations(design, y);
  result.failures = ev.failures.size();
  const SensitivityResult qmc = estimate_indices(ev, space.names(), SobolMethod::qmc);

  const auto write_result = [&](const SensitivityResult& res, const std::string& stem) {
    std::ostringstream csv_text;
    write_csv(res, csv_text);
    write_file(out / (stem + ".csv"), csv_text.str());
    write_file(out / (stem + ".json"), to_json(res));
    result.manifest.push_back(stem + ".csv");
    result.manifest.push_back(stem + ".json");
  };
  write_result(qmc, "sensitivity_qmc");

  // Ranking of critical uncertainties at the configured threshold.
  {
    const Ranking rank = rank_parameters(qmc, config.ranking_threshold);
    json jr;
    jr["threshold"] = config.ranking_threshold;
    json order = json::array();
    for (int i : rank.order) order.push_back(space.names()[static_cast<std::size_t>(i)]);
    json critical = json::array();
    for (int i : rank.critical) critical.push_back(space.names()[static_cast<std::size_t>(i)]);
    jr["order"] = order;
    jr["critical"] = critical;
    jr["all_below_threshold"] = rank.all_below_threshold;
    write_file(out / "sensitivity_ranking.json", jr.dump(2));
    result.manifest.push_back("sensitivity_ranking.json");
  }

  // Surrogate re-estimation at each configured sampling fraction.
  std::vector<std::pair<double, SensitivityResult>> surrogate_results;
  {
    // Fit on the finite rows of the evaluated design.
    std::vector<Eigen::Index> keep;
    for (Eigen::Index r = 0; r < y.size(); ++r)
      if (std::isfinite(y[r])) keep.push_back(r);
    SampleMatrix x_fit;
    x_fit.columns = flat.columns;
    x_fit.seed = flat.seed;
    x_fit.kind = flat.kind;
    x_fit.values.resize(static_cast<Eigen::Index>(keep.size()), flat.cols());
    Eigen::VectorXd y_fit(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
      x_fit.values.row(static_cast<Eigen::Index>(i)) = flat.values.row(keep[i]);
      y_fit[static_cast<Eigen::Index>(i)] = y[keep[i]];
    }

    const std::size_t min_rows = PolynomialRse::term_count(
        space.dimension(), config.surrogate.include_interactions);
    for (double f : config.surrogate.fractions) {
      const auto [xs, ys] =
          subsample(x_fit, y_fit, f, substream_seed(config.sampler.seed, 777), min_rows);
      const PolynomialRse rse = fit_rse(xs, ys, config.surrogate.include_interactions);
      const std::string tag = fraction_tag(f);
      write_file(out / ("rse_" + tag + ".json"), rse.to_json());
      result.manifest.push_back("rse_" + tag + ".json");

      const SobolMethod method =
          f >= 1.0 ? SobolMethod::surrogate_full : SobolMethod::surrogate_fraction;
      const SensitivityResult sres =
          sobol_via_surrogate(rse, space, config.sampler.base_n,
                              substream_seed(config.sampler.seed, 778), method);
      write_result(sres, "sensitivity_surrogate_" + tag);
      surrogate_results.emplace_back(f, sres);

      json meta;
      meta["fraction"] = f;
      meta["r_squared"] = rse.stats().r_squared;
      meta["rmse"] = rse.stats().rmse;
      meta["n_train"] = rse.stats().n_train;
      meta["low_confidence"] = rse.stats().r_squared < 0.9;
      write_file(out / ("sensitivity_surrogate_" + tag + "_fit.json"), meta.dump(2));
      result.manifest.push_back("sensitivity_surrogate_" + tag + "_fit.json");
    }
  }

  // Side-by-side comparison rows for a bar-chart style figure.
  {
    std::ostringstream cmp;
    csv::write_header(cmp, {"parameter", "method", "fraction", "s1", "st"});
    const auto names = space.names();
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      cmp << names[i] << ",qmc,1," << csv::num(qmc.s1[k]) << ',' << csv::num(qmc.st[k])
          << '\n';
      for (const auto& [f, sres] : surrogate_results)
        cmp << names[i] << ',' << to_string(sres.method) << ',' << csv::num(f) << ','
            << csv::num(sres.s1[k]) << ',' << csv::num(sres.st[k]) << '\n';
    }
    write_file(out / "sensitivity_comparison.csv", cmp.str());
    result.manifest.push_back("sensitivity_comparison.csv");
  }
  return result;
}

StageResult cmd_ld_study(const PipelineConfig& config, const std::string& out_dir,
                         int threads) {
  StageResult result;
  result.command = "ld-study";
  const auto out = ensure_out_dir(out_dir);

  const auto family = config.baseline.structure_family();
  std::vector<StructureCase> structures;
  for (const auto& want : config.study.structures) {
    bool found = false;
    for (const auto& sc : family)
      if (sc.label == want) {
        structures.push_back(sc);
        found = true;
        break;
      }
    if (!found) throw config_error("unknown study structure '" + want + "'");
  }

  LdStudyOutput study;
  {
    StageTimer timer(result, "evaluate");
    const SampleMatrix shared =
        lhs_sample(config.study.space, config.study.rows, config.study.seed);
    study = ld_variability_study(structures, shared, config.study.altitude_m, threads);
  }
  result.evaluations = study.rows.size();
  for (const auto& s : study.summary) result.failures += s.failures;

  {
    std::ostringstream rows;
    csv::write_header(rows, {"row", "structure", "cl", "cd", "l_over_d", "runtime"});
    for (const auto& r : study.rows) {
      if (!r.ok) continue;
      rows << r.row << ',' << r.structure << ',' << csv::num(r.cl) << ','
           << csv::num(r.cd) << ',' << csv::num(r.l_over_d) << ','
           << csv::num(r.runtime_s) << '\n';
    }
    write_file(out / "ld_study_rows.csv", rows.str());
    result.manifest.push_back("ld_study_rows.csv");
  }
  {
    json summary = json::array();
    for (const auto& s : study.summary)
      summary.push_back({{"structure", s.structure},
                         {"evaluated", s.evaluated},
                         {"failures", s.failures},
                         {"mean_l_over_d", s.mean_ld},
                         {"std_l_over_d", s.std_ld},
                         {"mean_runtime_s", s.mean_runtime_s}});
    write_file(out / "ld_study_summary.json", json{{"structures", summary}}.dump(2));
    result.manifest.push_back("ld_study_summary.json");
  }
  {
    // Histogram bins over the pooled L/D range, one distribution per structure.
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& r : study.rows)
      if (r.ok) {
        lo = std::min(lo, r.l_over_d);
        hi = std::max(hi, r.l_over_d);
      }
    const int n_bins = 24;
    std::ostringstream hist;
    csv::write_header(hist, {"structure", "bin_lo", "bin_hi", "count"});
    if (std::isfinite(lo) && hi > lo) {
      const double width = (hi - lo) / n_bins;
      for (const auto& sc : structures) {
        std::vector<int> counts(n_bins, 0);
        for (const auto& r : study.rows) {
          if (!r.ok || r.structure != sc.label) continue;
          int b = static_cast<int>((r.l_over_d - lo) / width);
          b = std::clamp(b, 0, n_bins - 1);
          counts[static_cast<std::size_t>(b)]++;
        }
        for (int b = 0; b < n_bins; ++b)
          hist << sc.label << ',' << csv::num(lo + b * width) << ','
               << csv::num(lo + (b + 1) * width) << ',' << counts[static_cast<std::size_t>(b)]
               << '\n';
      }
    }
    write_file(out / "ld_study_hist.csv", hist.str());
    result.manifest.push_back("ld_study_hist.csv");
  }
  return result;
}

StageResult cmd_scale_opt(const PipelineConfig& config, const std::string& out_dir) {
  StageResult result;
  result.command = "scale-opt";
  const auto out = ensure_out_dir(out_dir);

  OptimumResult opt;
  {
    StageTimer timer(result, "optimize");
    const WingModelSpec full_model =
        config.baseline.make_model(config.scaling.use_wingbox, config.scaling.mesh);
    const ScalingProblem prob = ScalingProblem::make(
        full_model, config.scaling.full_cruise, config.scaling.weights,
        config.scaling.bounds);
    opt = optimize(prob, config.scaling.x0);
    if (opt.termination == Termination::stalled)
      throw estimator_error("scale-opt: optimizer stalled");
  }
  result.evaluations = static_cast<std::size_t>(opt.iterations);

  {
    std::ostringstream trace;
    write_trace_csv(opt.trace, trace);
    write_file(out / "scale_opt_trace.csv", trace.str());
    result.manifest.push_back("scale_opt_trace.csv");
  }
  write_file(out / "scale_opt_result.json", to_json(opt));
  result.manifest.push_back("scale_opt_result.json");
  {
    std::ostringstream table;
    write_table(opt.similitude, table);
    write_file(out / "similitude.txt", table.str());
    result.manifest.push_back("similitude.txt");
  }
  return result;
}

StageResult cmd_report(const std::string& out_dir) {
  StageResult result;
  result.command = "report";
  const std::filesystem::path out(out_dir);

  std::vector<std::string> missing;
  const auto need = [&](const std::string& name) {
    if (!std::filesystem::exists(out / name)) missing.push_back(name);
    return out / name;
  };
  const auto records_path = need("run_records.jsonl");
  const auto qmc_path = need("sensitivity_qmc.json");
  const auto ranking_path = need("sensitivity_ranking.json");
  const auto study_path = need("ld_study_summary.json");
  const auto scale_path = need("scale_opt_result.json");
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += " " + m;
    throw config_error("report: missing artifacts:" + list);
  }

  const auto read_json = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    json j;
    in >> j;
    return j;
  };
  json qmc, ranking, study, scale;
  try {
    qmc = read_json(qmc_path);
    ranking = read_json(ranking_path);
    study = read_json(study_path);
    scale = read_json(scale_path);
  } catch (const json::exception& e) {
    throw config_error(std::string("report: malformed artifact: ") + e.what());
  }

  std::ostringstream md;
  md << "# Pipeline report\n\n";

  md << "## Critical uncertainties\n\n";
  md << "Total-index ranking (threshold " << ranking.at("threshold").get<double>()
     << "):\n\n";
  md << "| rank | parameter | s1 | st | critical |\n";
  md << "|---|---|---|---|---|\n";
  const auto params = qmc.at("parameters").get<std::vector<std::string>>();
  const auto s1 = qmc.at("s1").get<std::vector<double>>();
  const auto st = qmc.at("st").get<std::vector<double>>();
  const auto order = ranking.at("order").get<std::vector<std::string>>();
  const auto critical = ranking.at("critical").get<std::vector<std::string>>();
  int rank_i = 1;
  for (const auto& name : order) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < params.size(); ++i)
      if (params[i] == name) idx = i;
    const bool is_critical =
        std::find(critical.begin(), critical.end(), name) != critical.end();
    char row[160];
    std::snprintf(row, sizeof(row), "| %d | %s | %.4f | %.4f | %s |\n", rank_i++,
                  name.c_str(), s1[idx], st[idx], is_critical ? "yes" : "no");
    md << row;
  }
  if (ranking.at("all_below_threshold").get<bool>())
    md << "\nWarning: no parameter exceeded the criticality threshold.\n";

  md << "\n## L/D variability by model structure\n\n";
  md << "| structure | evaluated | failures | mean L/D | std L/D | mean runtime [s] |\n";
  md << "|---|---|---|---|---|---|\n";
  for (const auto& s : study.at("structures")) {
    char row[200];
    std::snprintf(row, sizeof(row), "| %s | %zu | %zu | %.4f | %.4f | %.6f |\n",
                  s.at("structure").get<std::string>().c_str(),
                  s.at("evaluated").get<std::size_t>(),
                  s.at("failures").get<std::size_t>(),
                  s.at("mean_l_over_d").get<double>(),
                  s.at("std_l_over_d").get<double>(),
                  s.at("mean_runtime_s").get<double>());
    md << row;
  }

  md << "\n## Scaled-experiment conditions\n\n";
  const auto& x = scale.at("x");
  char buf[400];
  std::snprintf(buf, sizeof(buf),
                "Optimum: n = %.4f, alpha = %.3f deg, Ma = %.4f, h = %.1f m, E = %.4g Pa\n\n",
                x.at("n").get<double>(), x.at("alpha").get<double>(),
                x.at("mach").get<double>(), x.at("altitude").get<double>(),
                x.at("young_modulus").get<double>());
  md << buf;
  md << "Termination: " << scale.at("termination").get<std::string>() << "; active set:";
  for (const auto& a : scale.at("active_set")) md << ' ' << a.get<std::string>();
  md << "\n\nCost breakdown: ";
  const auto& cost = scale.at("cost");
  std::snprintf(buf, sizeof(buf), "L/D term %.6f, Re term %.6f, Ma term %.6f, total %.6f\n",
                cost.at("ld_term").get<double>(), cost.at("re_term").get<double>(),
                cost.at("ma_term").get<double>(), cost.at("total").get<double>());
  md << buf;
  md << "\nSimilitude groups (sub/full):\n\n| group | full | sub | ratio |\n|---|---|---|---|\n";
  for (const auto& g : scale.at("similitude").at("groups")) {
    std::snprintf(buf, sizeof(buf), "| %s | %.6g | %.6g | %.4f |\n",
                  g.at("name").get<std::string>().c_str(), g.at("full").get<double>(),
                  g.at("sub").get<double>(), g.at("ratio").get<double>());
    md << buf;
  }
  std::snprintf(buf, sizeof(buf), "\nMass scale n_mass = %.6g\n",
                scale.at("similitude").at("mass_scale").get<double>());
  md << buf;

  write_file(out / "report.md", md.str());
  result.manifest.push_back("report.md");
  (void)records_path;
  return result;
}

void append_run_record(const std::string& out_dir, const PipelineConfig& config,
                       const StageResult& result, std::uint64_t seed, int threads) {
  const auto out = ensure_out_dir(out_dir);
  json j;
  j["command"] = result.command;
  j["version"] = kVersion;
  j["config_hash"] = config.hash();
  j["seed"] = seed;
  j["threads"] = threads;
  j["timings_s"] = result.timings_s;
  j["evaluations"] = result.evaluations;
  j["failures"] = result.failures;
  j["manifest"] = result.manifest;
  std::ofstream rec(out / "run_records.jsonl", std::ios::app);
  if (!rec) throw config_error("cannot append run record in '" + out_dir + "'");
  rec << json_line(j) << '\n';
}

}  // namespace uqscale
