// Command-line front end: slowlight {spectrum|run|sweep|fit} --config FILE [options]
//
// Exit status: 0 ok, 2 parse/usage, 3 numeric failure, 4 I/O failure,
// 1 anything else.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "slowlight/slowlight.h"

namespace {

int exit_code(sl_status s) {
  switch (s) {
    case SL_OK: return 0;
    case SL_ERR_PARSE:
    case SL_ERR_ARGUMENT: return 2;
    case SL_ERR_NUMERIC: return 3;
    case SL_ERR_IO: return 4;
    default: return 1;
  }
}

int report(sl_status s) {
  if (s != SL_OK) std::cerr << "slowlight: " << sl_status_string(s) << ": " << sl_last_error() << "\n";
  return exit_code(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maxwell-Bloch simulator of slow, stored and stationary light in a Lambda medium"};
  app.set_version_flag("--version", std::string(sl_version()));
  app.require_subcommand(1);

  std::string config_path, out_dir, input, model;
  int threads = 1;
  std::uint64_t seed = 0;
  bool quiet = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (default: $SLOWLIGHT_OUT_DIR or .)");
    sub->add_option("--threads", threads, "worker threads for sweeps, 0 = auto")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", seed, "reserved; the model is deterministic");
    sub->add_flag("--quiet", quiet, "suppress warnings");
  };
  CLI::App* spectrum = app.add_subcommand("spectrum", "write the probe susceptibility table");
  CLI::App* run = app.add_subcommand("run", "run one protocol, write trace CSV and summary JSON");
  CLI::App* sweep = app.add_subcommand("sweep", "run a delay or duration sweep");
  CLI::App* fit = app.add_subcommand("fit", "fit the decay law to a sweep CSV");
  for (CLI::App* sub : {spectrum, run, sweep, fit}) add_common(sub);
  fit->add_option("--input", input, "sweep CSV (param_us,peak_intensity)")->required();
  fit->add_option("--model", model, "gaussian_sq or exponential (default from config)")
      ->check(CLI::IsMember({"gaussian_sq", "exponential"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (out_dir.empty()) {
    const char* env = std::getenv("SLOWLIGHT_OUT_DIR");
    out_dir = env && *env ? env : ".";
  }

  sl_config* cfg = nullptr;
  if (sl_status s = sl_config_load(config_path.c_str(), &cfg); s != SL_OK) {
    const int line = sl_last_error_line();
    std::cerr << "slowlight: " << config_path;
    if (line > 0) std::cerr << ":" << line;
    std::cerr << ": " << sl_last_error() << "\n";
    return exit_code(s);
  }

  sl_options opt;
  sl_options_init(&opt);
  opt.out_dir = out_dir.c_str();
  opt.threads = threads;
  opt.seed = seed;
  opt.quiet = quiet ? 1 : 0;
  if (!input.empty()) opt.input = input.c_str();
  if (!model.empty()) opt.model = model.c_str();

  sl_status s = SL_OK;
  if (*spectrum) s = sl_cmd_spectrum(cfg, &opt);
  else if (*run) s = sl_cmd_run(cfg, &opt);
  else if (*sweep) s = sl_cmd_sweep(cfg, &opt);
  else if (*fit) s = sl_cmd_fit(cfg, &opt);
  sl_config_free(cfg);
  return report(s);
}
