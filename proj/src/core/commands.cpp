#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "error.hpp"

namespace slowlight {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

#ifndef SLOWLIGHT_VERSION
#define SLOWLIGHT_VERSION "0.0.0"
#endif

const char* version() { return SLOWLIGHT_VERSION; }

std::string hash_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string output_header(const Config& cfg) {
  return std::string("# slowlight ") + version() + " config_hash=" + hash_hex(cfg.hash());
}

namespace {

std::string num(double v) { return format_double(v); }

fs::path prepare_dir(const CommandOptions& opt) {
  fs::path dir = opt.out_dir.empty() ? fs::path(".") : fs::path(opt.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_file(const fs::path& path, const std::string& content, CommandResult& result) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
  result.files.push_back(path.string());
}

json header_json(const Config& cfg, const char* command) {
  return {{"tool", "slowlight"},
          {"version", version()},
          {"config_hash", hash_hex(cfg.hash())},
          {"command", command}};
}

// Resolved configuration as {section: {key: value}}, value strings exactly as
// in the canonical text.
json config_json(const Config& cfg) {
  json out = json::object();
  std::string section;
  std::istringstream in(cfg.to_text());
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line.substr(1, line.size() - 2);
      out[section] = json::object();
      continue;
    }
    const auto eq = line.find(" = ");
    out[section][line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

json fit_json(const FitResult& f) {
  return {{"model", std::string(to_string(f.model))},
          {"I0", f.I0},
          {"tau_us", f.tau},
          {"rms_residual", f.rms_residual},
          {"n_points", f.n_points},
          {"iterations", f.iterations},
          {"converged", f.converged},
          {"decaying", f.decaying}};
}

void report(const std::vector<std::string>& warnings, const CommandOptions& opt) {
  if (!opt.log) return;
  for (const auto& w : warnings) *opt.log << "warning: " << w << "\n";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string file_stem(const std::string& name) {
  const fs::path p(name);
  return p.stem().string();
}

}  // namespace

std::string trace_csv(const DetectorTrace& trace, const std::string& header) {
  std::string out = header + "\n";
  out += "t_us,fwd_intensity,bwd_intensity,spin_norm\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out += num(trace.t[i]) + "," + num(trace.fwd[i]) + "," + num(trace.bwd[i]) + "," +
           num(trace.spin[i]) + "\n";
  }
  return out;
}

DetectorTrace run_configured(const Config& cfg) {
  const ExperimentSetup setup = cfg.setup();
  const PulseSequence seq = standard_sequence(cfg.kind, cfg.protocol());
  if (cfg.boundary == Boundary::open) return run_experiment(seq, setup);
  RunOptions options;
  options.boundary = cfg.boundary;
  DetectorTrace trace = run_dynamics(seq, setup.medium, setup.grid, setup.classes, options).trace;
  for (const auto& e : seq.events) trace.markers.push_back({e.channel, e.t_start, e.t_end(), e.peak});
  return trace;
}

CommandResult cmd_spectrum(const Config& cfg, const CommandOptions& opt) {
  const fs::path dir = prepare_dir(opt);
  const MediumParams m = cfg.medium();
  const auto classes = cfg.classes();
  std::string out = output_header(cfg) + "\n";
  out += "detuning_rad_per_us,chi_re,chi_im\n";
  const int n = cfg.spectrum_points;
  for (int i = 0; i < n; ++i) {
    const double dp = cfg.spectrum_min + (cfg.spectrum_max - cfg.spectrum_min) * i / (n - 1);
    const Complex chi = susceptibility(dp, cfg.omega_C, m, classes);
    out += num(dp) + "," + num(chi.real()) + "," + num(chi.imag()) + "\n";
  }
  CommandResult result;
  write_file(dir / cfg.spectrum_csv, out, result);
  return result;
}

CommandResult cmd_run(const Config& cfg, const CommandOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = prepare_dir(opt);
  const MediumParams m = cfg.medium();
  const ProtocolParams p = cfg.protocol();
  const DetectorTrace trace = run_configured(cfg);

  CommandResult result;
  result.warnings = trace.warnings;
  report(result.warnings, opt);
  write_file(dir / cfg.trace_csv, trace_csv(trace, output_header(cfg)), result);

  json derived;
  derived["optical_depth"] = m.optical_depth();
  derived["gN"] = m.gN;
  derived["c"] = m.c;
  derived["transit_time_us"] = m.transit_time();
  derived["dt_us"] = trace.dt;
  if (cfg.delta_S_khz > 0.0) {
    derived["dephasing_time_us"] = dephasing_time(cfg.delta_S_khz);
  } else {
    derived["dephasing_time_us"] = nullptr;
  }
  if (auto vg = group_velocity(m, cfg.omega_C)) {
    derived["group_velocity"] = *vg;
    derived["slow_light_delay_us"] = m.length / *vg - m.length / m.c;
  } else {
    derived["group_velocity"] = nullptr;
    derived["slow_light_delay_us"] = nullptr;
  }
  if (cfg.omega_C > 0.0 || cfg.omega_A > 0.0) {
    derived["balance_residual"] = balance_residual(cfg.omega_C, cfg.g_C, cfg.omega_A, cfg.g_A);
    derived["effective_velocity"] = effective_velocity(m, cfg.omega_C, cfg.omega_A);
  }

  bool non_negative = true;
  double e_fwd = 0.0, e_bwd = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace.fwd[i] < 0.0 || trace.bwd[i] < 0.0 || trace.spin[i] < 0.0) non_negative = false;
    if (i > 0) {
      const double h = trace.t[i] - trace.t[i - 1];
      e_fwd += 0.5 * h * (trace.fwd[i] + trace.fwd[i - 1]);
      e_bwd += 0.5 * h * (trace.bwd[i] + trace.bwd[i - 1]);
    }
  }
  const Peak peak = released_peak(trace, p.release_time(cfg.kind));
  const std::size_t n_events = standard_sequence(cfg.kind, p).events.size();

  json markers = json::array();
  for (const auto& mk : trace.markers) {
    markers.push_back({{"channel", std::string(to_string(mk.channel))},
                       {"t_start_us", mk.t_start},
                       {"t_end_us", mk.t_end},
                       {"peak", mk.peak}});
  }
  json readouts = json::array();
  for (const auto& r : trace.readouts) {
    readouts.push_back({{"t_us", r.t}, {"signal", r.signal}, {"depleted_fraction", r.depleted}});
  }

  json summary;
  summary["header"] = header_json(cfg, "run");
  summary["config"] = config_json(cfg);
  summary["config_text"] = cfg.to_text();
  summary["derived"] = derived;
  summary["results"] = {{"samples", trace.size()},
                        {"release_time_us", p.release_time(cfg.kind)},
                        {"released_peak_t_us", peak.t},
                        {"released_peak_intensity", peak.value},
                        {"forward_energy", e_fwd},
                        {"backward_energy", e_bwd},
                        {"final_spin_norm", trace.spin.empty() ? 0.0 : trace.spin.back()},
                        {"readouts", readouts}};
  summary["markers"] = markers;
  summary["invariants"] = {{"finite", true},
                           {"weak_probe", trace.weak_probe},
                           {"non_negative_intensities", non_negative},
                           {"markers_complete", trace.markers.size() == n_events}};
  summary["warnings"] = trace.warnings;
  summary["wall_time_s"] = seconds_since(t0);
  write_file(dir / cfg.summary_json, summary.dump(2) + "\n", result);
  return result;
}

CommandResult cmd_sweep(const Config& cfg, const CommandOptions& opt) {
  if (cfg.sweep_values.empty()) {
    throw ParseError(ParseError::Category::usage, 0, "sweep.values: empty list of sweep values");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = prepare_dir(opt);
  const ExperimentSetup setup = cfg.setup();
  const ProtocolParams base = cfg.protocol();
  SweepOptions so;
  so.threads = opt.threads;
  so.keep_traces = cfg.keep_traces;
  so.max_residual = cfg.max_residual;

  SweepResult sweep;
  switch (cfg.sweep_parameter) {
    case SweepParameter::storage_T_us:
      sweep = sweep_delay(cfg.sweep_values, base, setup, DelayMode::memory, so);
      break;
    case SweepParameter::dark_interval_us:
      sweep = sweep_delay(cfg.sweep_values, base, setup, DelayMode::stationary, so);
      break;
    case SweepParameter::a_duration_us:
      sweep = sweep_duration(cfg.sweep_values, base, setup, so);
      break;
  }

  CommandResult result;
  const std::string header = output_header(cfg);
  std::string csv = header + "\n" + "param_us,peak_intensity\n";
  for (std::size_t i = 0; i < sweep.values.size(); ++i) {
    csv += num(sweep.values[i]) + "," + num(sweep.peaks[i]) + "\n";
  }
  write_file(dir / cfg.sweep_csv, csv, result);
  for (std::size_t i = 0; i < sweep.traces.size(); ++i) {
    result.warnings.insert(result.warnings.end(), sweep.traces[i].warnings.begin(),
                           sweep.traces[i].warnings.end());
    write_file(dir / (file_stem(cfg.sweep_csv) + "_point" + std::to_string(i) + ".csv"),
               trace_csv(sweep.traces[i], header), result);
  }
  report(result.warnings, opt);

  json fits = json::object();
  std::vector<DecayPoint> points;
  for (std::size_t i = 0; i < sweep.values.size(); ++i) points.push_back({sweep.values[i], sweep.peaks[i]});
  for (FitModel model : {FitModel::gaussian_sq, FitModel::exponential}) {
    try {
      fits[std::string(to_string(model))] = fit_json(fit_decay(points, model));
    } catch (const InvalidArgument& e) {
      fits[std::string(to_string(model))] = {{"error", e.what()}};
    }
  }
  json summary;
  summary["header"] = header_json(cfg, "sweep");
  summary["config"] = config_json(cfg);
  summary["config_text"] = cfg.to_text();
  summary["parameter"] = std::string(to_string(cfg.sweep_parameter));
  summary["values_us"] = sweep.values;
  summary["peak_intensity"] = sweep.peaks;
  summary["peak_time_us"] = sweep.peak_times;
  summary["fits"] = fits;
  summary["warnings"] = result.warnings;
  summary["wall_time_s"] = seconds_since(t0);
  write_file(dir / cfg.summary_json, summary.dump(2) + "\n", result);
  return result;
}

std::vector<DecayPoint> read_sweep_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open sweep file '" + path + "'");
  std::vector<DecayPoint> points;
  int line_no = 0;
  bool header_seen = false;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("param_us", 0) == 0) continue;
    }
    const auto comma = line.find(',');
    auto bad = [&]() {
      return ParseError(ParseError::Category::syntax, line_no,
                        path + ": line " + std::to_string(line_no) + ": expected 'param_us,peak_intensity'");
    };
    if (comma == std::string::npos) throw bad();
    try {
      std::size_t a = 0, b = 0;
      const std::string lhs = line.substr(0, comma), rhs = line.substr(comma + 1);
      const double t = std::stod(lhs, &a);
      const double v = std::stod(rhs, &b);
      if (lhs.find_first_not_of(" \t", a) != std::string::npos ||
          rhs.find_first_not_of(" \t", b) != std::string::npos) {
        throw bad();
      }
      points.push_back({t, v});
    } catch (const std::logic_error&) {
      throw bad();
    }
  }
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return points;
}

CommandResult cmd_fit(const Config& cfg, const CommandOptions& opt) {
  if (opt.input.empty()) throw ParseError(ParseError::Category::usage, 0, "fit: --input is required");
  const fs::path dir = prepare_dir(opt);
  const std::vector<DecayPoint> points = read_sweep_csv(opt.input);
  const FitModel model = opt.model.value_or(cfg.fit_model);
  const FitResult fit = fit_decay(points, model);

  CommandResult result;
  if (!fit.converged) result.warnings.push_back("fit did not converge within the iteration cap");
  if (!fit.decaying) result.warnings.push_back("data show no decay; tau reported at the cap");
  report(result.warnings, opt);

  json out;
  out["header"] = header_json(cfg, "fit");
  out["input"] = opt.input;
  out["fit"] = fit_json(fit);
  out["warnings"] = result.warnings;
  write_file(dir / cfg.fit_json, out.dump(2) + "\n", result);
  return result;
}

}  // namespace slowlight
