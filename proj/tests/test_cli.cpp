#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#ifndef UQSCALE_CLI_PATH
#error "UQSCALE_CLI_PATH must be defined by the build"
#endif

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(UQSCALE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("uqscale_cli_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream out(p);
  out << text;
  return p;
}

const char* kSmallConfig = R"({
  "model": {"kind": "lumped_range"},
  "sampler": {"base_n": 32, "seed": 11},
  "surrogate": {"fractions": [1.0]},
  "study": {"rows": 8, "structures": ["wingbox_coarse"]},
  "output_dir": "out"
})";

}  // namespace

TEST_CASE("cli: full pipeline exits cleanly and writes artifacts") {
  const fs::path dir = fresh_dir("ok");
  const fs::path config = write_config(dir, kSmallConfig);
  const std::string out = (dir / "out").string();
  CHECK(run_cli("sensitivity --config " + config.string() + " --out " + out) == 0);
  CHECK(run_cli("ld-study --config " + config.string() + " --out " + out) == 0);
  CHECK(run_cli("scale-opt --config " + config.string() + " --out " + out) == 0);
  CHECK(run_cli("report --out " + out) == 0);
  CHECK(fs::exists(dir / "out" / "report.md"));
  CHECK(fs::exists(dir / "out" / "run_records.jsonl"));
}

TEST_CASE("cli: config errors exit 2") {
  const fs::path dir = fresh_dir("cfg");
  SUBCASE("missing file") {
    CHECK(run_cli("sensitivity --config " + (dir / "nope.json").string()) == 2);
  }
  SUBCASE("unknown key") {
    const fs::path config = write_config(dir, R"({"samplr": {"base_n": 32}})");
    CHECK(run_cli("sensitivity --config " + config.string() + " --out " +
                  (dir / "out").string()) == 2);
  }
  SUBCASE("infeasible scaling bounds") {
    const fs::path config =
        write_config(dir, R"({"scaling": {"bounds": {"mach": [0.87, 0.80]}}})");
    CHECK(run_cli("scale-opt --config " + config.string() + " --out " +
                  (dir / "out").string()) == 2);
  }
  SUBCASE("report without artifacts") {
    CHECK(run_cli("report --out " + (dir / "empty").string()) == 2);
  }
}

TEST_CASE("cli: model failure at the start exits 3") {
  const fs::path dir = fresh_dir("model");
  // x0 altitude outside the atmosphere model's range: the start is penalized
  const fs::path config = write_config(dir, R"({
    "scaling": {
      "bounds": {"altitude": [0.0, 30000.0]},
      "x0": [0.1, 0.0, 0.84, 25000.0, 73.1e9]
    }
  })");
  CHECK(run_cli("scale-opt --config " + config.string() + " --out " +
                (dir / "out").string()) == 3);
}

TEST_CASE("cli: estimator errors exit 4") {
  const fs::path dir = fresh_dir("est");
  SUBCASE("surrogate fraction below the term count") {
    const fs::path config = write_config(dir, R"({
      "model": {"kind": "lumped_range"},
      "sampler": {"base_n": 64},
      "surrogate": {"fractions": [0.01]}
    })");
    CHECK(run_cli("sensitivity --config " + config.string() + " --out " +
                  (dir / "out").string()) == 4);
  }
  SUBCASE("constant model output") {
    // Zero incidence on an unloaded symmetric wing: identically zero L/D no
    // matter where the spar sits.
    const fs::path baseline = dir / "unloaded_baseline.json";
    {
      std::ofstream out(baseline);
      out << R"({"nonstructural_mass_kg": 0.0,
                 "structural": {"material_density_kg_m3": 0.0}})";
    }
    const fs::path config = write_config(dir, std::string(R"({
      "model": {"kind": "aerostruct", "structure": "wingbox", "mesh": "coarse",
                "cruise": {"alpha": 0.0},
                "baseline": ")") + baseline.string() + R"("},
      "parameters": [
        {"name": "structure_location", "lower": 0.55, "upper": 0.65, "nominal": 0.6}
      ],
      "sampler": {"base_n": 16}
    })");
    CHECK(run_cli("sensitivity --config " + config.string() + " --out " +
                  (dir / "out").string()) == 4);
  }
}

TEST_CASE("cli: seed override changes sampling outputs") {
  const fs::path dir = fresh_dir("seed");
  const fs::path config = write_config(dir, kSmallConfig);
  const std::string out_a = (dir / "a").string();
  const std::string out_b = (dir / "b").string();
  CHECK(run_cli("sensitivity --config " + config.string() + " --out " + out_a) == 0);
  CHECK(run_cli("sensitivity --config " + config.string() + " --seed 999 --out " +
                out_b) == 0);
  std::ifstream fa(fs::path(out_a) / "sensitivity_qmc.csv");
  std::ifstream fb(fs::path(out_b) / "sensitivity_qmc.csv");
  std::string a((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string b((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(a != b);
}

TEST_CASE("cli: vehicle baseline override is honoured") {
  const fs::path dir = fresh_dir("baseline");
  const fs::path baseline = dir / "baseline.json";
  {
    std::ofstream out(baseline);
    out << R"({"version": "test", "range": {"fuel_capacity_kg": 20000.0}})";
  }
  const fs::path config = write_config(dir, std::string(R"({
    "model": {"kind": "lumped_range", "baseline": ")") +
                                                baseline.string() + R"("},
    "sampler": {"base_n": 32},
    "surrogate": {"fractions": [1.0]}
  })");
  CHECK(run_cli("sensitivity --config " + config.string() + " --out " +
                (dir / "out").string()) == 0);

  const fs::path bad = write_config(dir, R"({
    "model": {"kind": "lumped_range", "baseline": "/nonexistent/baseline.json"}
  })");
  CHECK(run_cli("sensitivity --config " + bad.string() + " --out " +
                (dir / "out").string()) == 2);
}
