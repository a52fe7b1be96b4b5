#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "config.hpp"
#include "experiment.hpp"

namespace slowlight {

struct CommandOptions {
  std::string out_dir = ".";
  int threads = 1;                 // 0 = hardware concurrency
  std::uint64_t seed = 0;          // reserved, the model is deterministic
  std::string input;               // cmd_fit: sweep CSV
  std::optional<FitModel> model;   // cmd_fit: overrides [fit] model
  std::ostream* log = nullptr;     // warnings, one per line
};

struct CommandResult {
  std::vector<std::string> files;
  std::vector<std::string> warnings;
};

CommandResult cmd_spectrum(const Config& cfg, const CommandOptions& opt);
CommandResult cmd_run(const Config& cfg, const CommandOptions& opt);
CommandResult cmd_sweep(const Config& cfg, const CommandOptions& opt);
CommandResult cmd_fit(const Config& cfg, const CommandOptions& opt);

/// Runs the configured protocol once.
DetectorTrace run_configured(const Config& cfg);

/// "# slowlight <version> config_hash=<hex>" header line (no newline).
std::string output_header(const Config& cfg);
std::string hash_hex(std::uint64_t h);

/// Reads "param_us, peak_intensity" rows, skipping '#' comments and the
/// column header. Throws IoError / ParseError.
std::vector<DecayPoint> read_sweep_csv(const std::string& path);

std::string trace_csv(const DetectorTrace& trace, const std::string& header);

const char* version();

}  // namespace slowlight
