#ifndef UQSCALE_PIPELINE_HPP
#define UQSCALE_PIPELINE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uqscale/param_space.hpp"
#include "uqscale/scaling_problem.hpp"
#include "uqscale/vehicle_config.hpp"

namespace uqscale {

enum class ModelKind { lumped_range, aerostruct };

struct ModelConfig {
  ModelKind kind = ModelKind::lumped_range;
  bool use_wingbox = true;     // aerostruct only
  MeshLevel mesh = MeshLevel::medium;
  // Evaluation condition for either model; the lumped range model ignores
  // the incidence, the wing model uses it as its default when alpha is not
  // a sampled parameter.
  CruiseCondition cruise{0.84, 8.5, 10000.0};
  std::string baseline_path;   // optional vehicle-baseline override
};

struct SamplerConfig {
  std::size_t base_n = 256;
  std::uint64_t seed = 12345;
  bool second_order = false;
};

struct SurrogateStageConfig {
  std::vector<double> fractions = {1.0, 0.1};
  bool include_interactions = true;
};

struct StudyConfig {
  std::vector<std::string> structures = {"tubular_spar_coarse", "tubular_spar_medium",
                                         "wingbox_coarse", "wingbox_medium",
                                         "wingbox_fine"};
  std::size_t rows = 200;
  std::uint64_t seed = 99;
  double altitude_m = 10000.0;
  // Shared input ranges: alpha, mach, structure_location, young_modulus.
  ParameterSpace space;  // filled with defaults when absent from the config

  static ParameterSpace default_space();
};

struct ScalingStageConfig {
  ScalingWeights weights;
  ScalingBounds bounds;
  DesignVector x0;  // defaults to [0.1, 0, 0.84, 10000, 73.1e9]
  bool use_wingbox = true;
  MeshLevel mesh = MeshLevel::medium;
  CruiseCondition full_cruise{0.84, 8.5, 10000.0};
};

struct PipelineConfig {
  ModelConfig model;
  std::optional<ParameterSpace> parameters;  // explicit uncertainty model
  SamplerConfig sampler;
  SurrogateStageConfig surrogate;
  StudyConfig study;
  ScalingStageConfig scaling;
  double ranking_threshold = 0.05;
  std::string output_dir = "out";
  VehicleBaseline baseline;     // resolved from baseline_path or built-in
  std::string canonical_text;   // canonical JSON of the parsed config

  static PipelineConfig from_json_text(const std::string& text);
  static PipelineConfig load(const std::string& path);

  /// The explicit parameter list, or the chosen model's default space.
  ParameterSpace resolve_space() const;
  /// Default uncertainty model per model kind.
  static ParameterSpace default_space(ModelKind kind);
  /// FNV-1a hash of the canonical config text, hex-encoded.
  std::string hash() const;
};

/// Per-invocation bookkeeping appended to <out>/run_records.jsonl.
struct StageResult {
  std::string command;
  std::size_t evaluations = 0;
  std::size_t failures = 0;
  std::vector<std::string> manifest;
  std::map<std::string, double> timings_s;
};

StageResult cmd_sensitivity(const PipelineConfig& config, const std::string& out_dir,
                            int threads);
StageResult cmd_ld_study(const PipelineConfig& config, const std::string& out_dir,
                         int threads);
StageResult cmd_scale_opt(const PipelineConfig& config, const std::string& out_dir);
StageResult cmd_report(const std::string& out_dir);

void append_run_record(const std::string& out_dir, const PipelineConfig& config,
                       const StageResult& result, std::uint64_t seed, int threads);

}  // namespace uqscale

#endif
