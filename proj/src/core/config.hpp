#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "analysis.hpp"
#include "dynamics.hpp"
#include "experiment.hpp"
#include "medium.hpp"

namespace slowlight {

// Line-oriented configuration:
//
//   # comment
//   [medium]
//   optical_depth = 900
//   [protocol]
//   kind = memory
//
// Sections: medium, grid, protocol, sweep, spectrum, fit, output. The only
// required key is protocol.kind; every other key has a default.
enum class SweepParameter { storage_T_us, dark_interval_us, a_duration_us };

std::string_view to_string(SweepParameter p);

struct Config {
  // [medium]
  double gamma_opt = 1.0;
  double gamma_spin = gamma_spin_from_t2(500.0);   // also settable as t2_spin_us
  double delta_S_khz = 30.0;
  double t1_opt_us = 110.0;
  double t1_spin_us = 6e7;
  Distribution distribution = Distribution::lorentzian;
  int n_classes = 64;
  double optical_depth = 900.0;
  double transit_time_us = 2.0;
  double g_C = 1.0;
  double g_A = 1.0;
  double optical_detuning = 0.0;

  // [grid]
  int cells = 100;
  double t_end_us = 0.0;
  double sample_rate = 20.0;
  Boundary boundary = Boundary::open;

  // [protocol]; omega_C / omega_A may instead be given as power_C_mW /
  // power_A_mW together with rabi_per_sqrt_mW.
  ProtocolKind kind = ProtocolKind::slow_light;
  double probe_start_us = 0.0;
  double probe_duration_us = 30.0;
  double probe_fwhm_us = 10.0;
  double probe_amplitude = 0.01;
  PulseShape probe_shape = PulseShape::gaussian;
  double omega_C = 5.5;
  double omega_A = 5.5;
  double retrieval_power_ratio = 2.0;
  double control_ramp_us = 1.0;
  double p_a_delay_us = 3.0;
  double storage_T_us = 0.0;
  double a_duration_us = 10.0;
  double dark_interval_us = 0.0;
  double omega_Y = 0.0;
  double y_duration_us = 1.0;
  double y_delay_us = 0.0;
  double y_detuning_mhz = 1.0;
  double tail_us = 45.0;

  // [sweep]
  SweepParameter sweep_parameter = SweepParameter::storage_T_us;
  std::vector<double> sweep_values;
  double max_residual = 1.0;
  bool keep_traces = false;

  // [spectrum]
  double spectrum_min = -10.0;
  double spectrum_max = 10.0;
  int spectrum_points = 401;

  // [fit]
  FitModel fit_model = FitModel::gaussian_sq;

  // [output]
  std::string trace_csv = "trace.csv";
  std::string summary_json = "summary.json";
  std::string sweep_csv = "sweep.csv";
  std::string spectrum_csv = "spectrum.csv";
  std::string fit_json = "fit.json";

  MediumParams medium() const;
  Grid grid() const;
  std::vector<SpectralClass> classes() const;
  ExperimentSetup setup() const;
  ProtocolParams protocol() const;

  /// Canonical text form: every key, fixed order, 17 significant digits.
  /// parse_config(to_text()) == *this.
  std::string to_text() const;
  /// FNV-1a 64 of to_text().
  std::uint64_t hash() const;

  bool operator==(const Config&) const = default;
};

/// Throws ParseError with a category and 1-based line number.
Config parse_config(std::string_view text);
Config load_config(const std::string& path);

std::string format_double(double v);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace slowlight
