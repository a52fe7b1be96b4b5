#pragma once

#include <complex>
#include <string>
#include <string_view>
#include <vector>

namespace slowlight {

using Complex = std::complex<double>;

// P: forward probe injected at z = 0 (amplitude in probe-Rabi units).
// C, A: forward / backward control Rabi frequencies (rad/us).
// Y: switching readout beam; applied as an instantaneous readout at the end
// of its event, see switching_readout().
enum class Channel { P, C, A, Y };

enum class PulseShape { rect, raised_cosine, gaussian };

std::string_view to_string(Channel c);
std::string_view to_string(PulseShape s);

struct PulseEvent {
  Channel channel = Channel::P;
  double t_start = 0.0;
  double duration = 1.0;
  double peak = 0.0;
  PulseShape shape = PulseShape::rect;
  double ramp = 0.0;       // raised_cosine edge length
  double fwhm = 0.0;       // gaussian intensity FWHM, centered in the window
  double detuning = 0.0;   // enters as a phase exp(-i detuning t)

  double t_end() const { return t_start + duration; }
  /// Real envelope in [0, 1]; zero outside [t_start, t_end).
  double envelope(double t) const;
  Complex value(double t) const;
};

struct PulseSequence {
  std::vector<PulseEvent> events;
  double t_end = 0.0;
  double sample_rate = 10.0;        // samples per us
  std::vector<std::string> warnings;

  /// Throws InvalidArgument on broken invariants: non-positive durations,
  /// oversized ramps, events outside [0, t_end], same-channel overlap.
  void validate() const;
  /// Sorts events by start time (stable).
  void sort();
  Complex amplitude(Channel channel, double t) const;
  double peak_amplitude(Channel channel) const;
  std::vector<const PulseEvent*> events_on(Channel channel) const;
};

}  // namespace slowlight
