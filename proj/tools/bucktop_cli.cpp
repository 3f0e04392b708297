// Command-line front end. Talks to the library only through the C API.

#include <bucktop/bucktop.h>

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

namespace {

int exit_code(bt_status s) {
  switch (s) {
    case BT_OK: return 0;
    case BT_ERR_CONFIG: return 2;
    case BT_ERR_SOLVER: return 3;
    default: return 1;
  }
}

int report(bt_status s, const char* what) {
  if (s != BT_OK) std::fprintf(stderr, "error: %s: %s (%s)\n", what, bt_last_error(), bt_status_name(s));
  return exit_code(s);
}

struct ConfigHandle {
  bt_config* ptr = nullptr;
  ~ConfigHandle() { bt_config_destroy(ptr); }
};

struct RunHandle {
  bt_run* ptr = nullptr;
  ~RunHandle() { bt_run_destroy(ptr); }
};

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides,
            const std::string& output, bool quiet) {
  if (quiet) bt_set_log_callback(nullptr, nullptr);
  ConfigHandle cfg;
  if (bt_status s = bt_config_create(&cfg.ptr); s != BT_OK) return report(s, "config");
  if (!config_path.empty())
    if (bt_status s = bt_config_load_file(cfg.ptr, config_path.c_str()); s != BT_OK)
      return report(s, config_path.c_str());

  // Output directory precedence: --output, then the environment, then the file.
  if (const char* env = std::getenv("BUCKTOP_OUTPUT_DIR"); env && *env)
    bt_config_set(cfg.ptr, "output_dir", env);
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      return 2;
    }
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (bt_status s = bt_config_set(cfg.ptr, key.c_str(), value.c_str()); s != BT_OK)
      return report(s, "--set");
  }
  if (!output.empty()) bt_config_set(cfg.ptr, "output_dir", output.c_str());

  RunHandle run;
  if (bt_status s = bt_run_create(cfg.ptr, &run.ptr); s != BT_OK) return report(s, "setup");
  if (bt_status s = bt_run_execute(run.ptr); s != BT_OK) return report(s, "run");

  const size_t n = bt_run_history_size(run.ptr);
  if (n > 0) {
    bt_record last{};
    bt_run_record(run.ptr, n - 1, &last);
    std::printf("finished after %d iterations: f=%.6g c=%.6g", last.loop, last.f, last.c);
    if (last.n_lambda > 0) std::printf(" lambda1=%.6g", last.lambda[0]);
    std::printf("\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density-based topology optimization with linearized buckling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bt_version()));

  std::string config_path, output;
  std::vector<std::string> overrides;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run an optimization");
  run->add_option("-c,--config", config_path, "Configuration file (key = value)")->check(CLI::ExistingFile);
  run->add_option("-s,--set", overrides, "Override a configuration key, key=value");
  run->add_option("-o,--output", output, "Output directory (overrides BUCKTOP_OUTPUT_DIR)");
  run->add_flag("-q,--quiet", quiet, "Suppress per-iteration log lines");

  std::vector<int> sizes{100, 200, 400};
  int reps = 3;
  std::string bench_out = "benchmark.csv";
  auto* bench = app.add_subcommand("benchmark", "Time stress stiffness construction against K assembly");
  bench->add_option("--sizes", sizes, "Square grid sides")->delimiter(',');
  bench->add_option("--reps", reps, "Repetitions per size (minimum is kept)")->check(CLI::PositiveNumber);
  bench->add_option("--out", bench_out, "CSV output path");

  std::string checkpoint, image;
  auto* render = app.add_subcommand("render", "Render a checkpoint as a PGM density image");
  render->add_option("--checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  render->add_option("--out", image, "Image path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*run) return cmd_run(config_path, overrides, output, quiet);
  if (*bench)
    return report(bt_benchmark(sizes.data(), sizes.size(), reps, bench_out.c_str()), "benchmark");
  if (*render)
    return report(bt_render_checkpoint(checkpoint.c_str(), image.c_str()), "render");
  return 1;
}
