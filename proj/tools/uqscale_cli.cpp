// Pipeline driver: sample -> evaluate -> sensitivity -> surrogate comparison
// -> L/D study -> scaled-experiment optimization -> consolidated report.
#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "uqscale/error.hpp"
#include "uqscale/pipeline.hpp"
#include "uqscale/version.hpp"

namespace {

int exit_code_for(const uqscale::Error& e) {
  switch (e.kind()) {
    case uqscale::ErrorKind::config: return 2;
    case uqscale::ErrorKind::model: return 3;
    case uqscale::ErrorKind::estimator: return 4;
  }
  return 1;
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir;  // overrides config output_dir when set
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config) {
  if (needs_config)
    cmd->add_option("--config", args.config_path, "pipeline config file (JSON)")
        ->required();
  cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
  auto* seed = cmd->add_option_function<std::uint64_t>(
      "--seed", [&args](std::uint64_t v) { args.seed = v; },
      "seed override for sampling stages");
  (void)seed;
  cmd->add_option("--threads", args.threads, "worker threads for model evaluation")
      ->check(CLI::PositiveNumber);
}

uqscale::PipelineConfig load_config(CommonArgs& args) {
  uqscale::PipelineConfig config = uqscale::PipelineConfig::load(args.config_path);
  if (args.seed) {
    config.sampler.seed = *args.seed;
    config.study.seed = *args.seed;
  }
  if (args.out_dir.empty()) args.out_dir = config.output_dir;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uncertainty pipeline: Sobol sensitivities, surrogate re-ranking, "
               "L/D variability study and sub-scale experiment scaling"};
  app.set_version_flag("--version", uqscale::kVersion);
  app.require_subcommand(1);

  CommonArgs sens_args, study_args, scale_args, report_args;
  auto* sens = app.add_subcommand("sensitivity", "Saltelli sampling + Sobol indices "
                                                 "with surrogate comparison");
  add_common(sens, sens_args, true);
  auto* study = app.add_subcommand("ld-study", "L/D variability across the five "
                                               "model structures");
  add_common(study, study_args, true);
  auto* scale = app.add_subcommand("scale-opt", "constrained optimization of the "
                                                "sub-scale experiment conditions");
  add_common(scale, scale_args, true);
  auto* report = app.add_subcommand("report", "consolidated report from prior runs");
  report->add_option("--config", report_args.config_path, "pipeline config file (JSON)");
  report->add_option("--out", report_args.out_dir, "output directory holding artifacts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sens->parsed()) {
      uqscale::PipelineConfig config = load_config(sens_args);
      const auto result =
          uqscale::cmd_sensitivity(config, sens_args.out_dir, sens_args.threads);
      uqscale::append_run_record(sens_args.out_dir, config, result, config.sampler.seed,
                                 sens_args.threads);
      std::printf("sensitivity: %zu evaluations, %zu failures, %zu files -> %s\n",
                  result.evaluations, result.failures, result.manifest.size(),
                  sens_args.out_dir.c_str());
    } else if (study->parsed()) {
      uqscale::PipelineConfig config = load_config(study_args);
      const auto result =
          uqscale::cmd_ld_study(config, study_args.out_dir, study_args.threads);
      uqscale::append_run_record(study_args.out_dir, config, result, config.study.seed,
                                 study_args.threads);
      std::printf("ld-study: %zu evaluations, %zu exclusions, %zu files -> %s\n",
                  result.evaluations, result.failures, result.manifest.size(),
                  study_args.out_dir.c_str());
    } else if (scale->parsed()) {
      uqscale::PipelineConfig config = load_config(scale_args);
      const auto result = uqscale::cmd_scale_opt(config, scale_args.out_dir);
      uqscale::append_run_record(scale_args.out_dir, config, result, config.sampler.seed,
                                 1);
      std::printf("scale-opt: %zu iterations, %zu files -> %s\n", result.evaluations,
                  result.manifest.size(), scale_args.out_dir.c_str());
    } else if (report->parsed()) {
      std::string out = report_args.out_dir;
      uqscale::PipelineConfig config;
      bool have_config = !report_args.config_path.empty();
      if (have_config) {
        config = uqscale::PipelineConfig::load(report_args.config_path);
        if (out.empty()) out = config.output_dir;
      }
      if (out.empty()) {
        std::fprintf(stderr, "report: --out or --config required\n");
        return 2;
      }
      const auto result = uqscale::cmd_report(out);
      if (have_config) uqscale::append_run_record(out, config, result, 0, 1);
      std::printf("report: %zu files -> %s\n", result.manifest.size(), out.c_str());
    }
  } catch (const uqscale::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
  return 0;
}
