#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "dynamics.hpp"
#include "medium.hpp"
#include "pulses.hpp"

namespace slowlight {

enum class ProtocolKind { slow_light, memory, stationary };

std::string_view to_string(ProtocolKind k);
ProtocolKind protocol_from_string(std::string_view name);

/// Timing and amplitudes of one protocol. All times in us, Rabi frequencies
/// in rad/us. Reference instant for the storage / backward-coupling onset is
/// the end of the probe window plus `p_a_delay_us`.
struct ProtocolParams {
  double probe_start_us = 0.0;
  double probe_duration_us = 30.0;
  double probe_fwhm_us = 10.0;
  double probe_amplitude = 0.01;
  PulseShape probe_shape = PulseShape::gaussian;

  double omega_C = 5.5;
  double omega_A = 5.5;
  double retrieval_power_ratio = 2.0;  // C power after storage / before
  double control_ramp_us = 1.0;        // raised-cosine edges of C and A gates

  double p_a_delay_us = 3.0;
  double storage_T_us = 0.0;           // memory: dark interval
  double a_duration_us = 10.0;         // stationary: backward coupling on-time
  double dark_interval_us = 0.0;       // stationary: C and A both off before trapping

  double omega_Y = 0.0;                // switching readout, disabled when 0
  double y_duration_us = 1.0;
  double y_delay_us = 0.0;             // after the release instant
  double y_detuning = 2.0 * 3.14159265358979323846;  // 1 MHz above C, documentation only

  double tail_us = 45.0;               // simulated time after release
  double t_end_us = 0.0;               // explicit window; 0 derives release + tail
  double sample_rate = 20.0;           // samples per us

  double probe_end() const { return probe_start_us + probe_duration_us; }
  /// Storage (memory) or backward-coupling (stationary) onset.
  double gate_time() const { return probe_end() + p_a_delay_us; }
  /// Instant after which the released pulse is read out.
  double release_time(ProtocolKind kind) const;

  void validate(ProtocolKind kind) const;
};

/// Builds the pulse sequence for a protocol:
///   slow_light: C on throughout, one P pulse.
///   memory:     C gated off at gate_time() for storage_T_us, then back on with
///               power multiplied by retrieval_power_ratio.
///   stationary: C on throughout, A on from gate_time() for a_duration_us
///               (after an optional dark interval with both controls off).
PulseSequence standard_sequence(ProtocolKind kind, const ProtocolParams& p);

struct ExperimentSetup {
  MediumParams medium;
  Grid grid;
  std::vector<SpectralClass> classes;
};

struct ReadoutResult {
  double signal = 0.0;
  double depleted = 0.0;
  bool clamped = false;
};

/// Photon-switching proxy: a read beam at Rabi frequency omega_Y for dt_read
/// converts the fraction f = omega_Y^2 dt_read / (2 gamma_opt) of the spin
/// coherence norm into diffracted signal D = f * N_S and scales S by
/// sqrt(1 - f). f is clamped to 1 (flagged).
ReadoutResult switching_readout(SimState& state, double omega_Y, double dt_read,
                                const MediumParams& m, std::span<const SpectralClass> classes);

/// run_dynamics plus event markers and switching readouts at the end of each
/// Y event.
DetectorTrace run_experiment(const PulseSequence& seq, const ExperimentSetup& setup);

/// Largest forward intensity at or after t_from.
struct Peak {
  double t = 0.0;
  double value = 0.0;
};
Peak released_peak(const DetectorTrace& trace, double t_from);

struct SweepResult {
  std::vector<double> values;        // swept parameter, us
  std::vector<double> peaks;         // released-pulse peak intensity
  std::vector<double> peak_times;
  std::vector<DetectorTrace> traces; // filled when keep_traces
};

struct SweepOptions {
  int threads = 1;              // 0 = hardware concurrency
  bool keep_traces = false;
  double max_residual = 1.0;    // sweep_duration balance bound
};

enum class DelayMode { memory, stationary };

/// Memory protocol at each storage delay T (or, in stationary mode, the
/// stationary protocol with a dark interval T before trapping); records the
/// released peak.
SweepResult sweep_delay(std::span<const double> T_values, const ProtocolParams& base,
                        const ExperimentSetup& setup, DelayMode mode = DelayMode::memory,
                        const SweepOptions& options = {});

/// Stationary protocol at each backward-coupling duration; records the peak
/// released after A turns off.
SweepResult sweep_duration(std::span<const double> durations, const ProtocolParams& base,
                           const ExperimentSetup& setup, const SweepOptions& options = {});

}  // namespace slowlight
