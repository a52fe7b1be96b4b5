#include "pulses.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace slowlight {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::P: return "P";
    case Channel::C: return "C";
    case Channel::A: return "A";
    case Channel::Y: return "Y";
  }
  return "?";
}

std::string_view to_string(PulseShape s) {
  switch (s) {
    case PulseShape::rect: return "rect";
    case PulseShape::raised_cosine: return "raised_cosine";
    case PulseShape::gaussian: return "gaussian";
  }
  return "?";
}

double PulseEvent::envelope(double t) const {
  if (t < t_start || t >= t_end()) return 0.0;
  switch (shape) {
    case PulseShape::rect:
      return 1.0;
    case PulseShape::raised_cosine: {
      if (ramp <= 0.0) return 1.0;
      const double rise = t - t_start;
      const double fall = t_end() - t;
      const double edge = std::min(rise, fall);
      if (edge >= ramp) return 1.0;
      return 0.5 * (1.0 - std::cos(kPi * edge / ramp));
    }
    case PulseShape::gaussian: {
      const double dt = t - (t_start + 0.5 * duration);
      // Intensity FWHM `fwhm`: |envelope|^2 = exp(-4 ln2 dt^2 / fwhm^2).
      return std::exp(-2.0 * std::log(2.0) * dt * dt / (fwhm * fwhm));
    }
  }
  return 0.0;
}

Complex PulseEvent::value(double t) const {
  const double env = envelope(t);
  if (env == 0.0) return {0.0, 0.0};
  if (detuning == 0.0) return {peak * env, 0.0};
  return peak * env * std::polar(1.0, -detuning * t);
}

void PulseSequence::validate() const {
  if (!(t_end > 0.0)) throw InvalidArgument("sequence: t_end must be > 0");
  if (!(sample_rate > 0.0)) throw InvalidArgument("sequence: sample_rate must be > 0");
  for (const auto& e : events) {
    const std::string tag = std::string(to_string(e.channel)) + " event at t=" +
                            std::to_string(e.t_start);
    if (!(e.duration > 0.0)) throw InvalidArgument(tag + ": duration must be > 0");
    if (e.t_start < 0.0 || e.t_end() > t_end * (1.0 + 1e-12)) {
      throw InvalidArgument(tag + ": outside the simulated window [0, t_end]");
    }
    if (e.shape == PulseShape::raised_cosine && (e.ramp < 0.0 || e.ramp > 0.5 * e.duration)) {
      throw InvalidArgument(tag + ": ramp must lie in [0, duration/2]");
    }
    if (e.shape == PulseShape::gaussian && !(e.fwhm > 0.0)) {
      throw InvalidArgument(tag + ": gaussian fwhm must be > 0");
    }
    if (!std::isfinite(e.peak) || !std::isfinite(e.detuning)) {
      throw InvalidArgument(tag + ": non-finite peak or detuning");
    }
  }
  for (Channel ch : {Channel::P, Channel::C, Channel::A, Channel::Y}) {
    auto on = events_on(ch);
    std::sort(on.begin(), on.end(),
              [](const PulseEvent* a, const PulseEvent* b) { return a->t_start < b->t_start; });
    for (std::size_t i = 1; i < on.size(); ++i) {
      if (on[i]->t_start < on[i - 1]->t_end() - 1e-12) {
        throw InvalidArgument(std::string("sequence: overlapping events on channel ") +
                              std::string(to_string(ch)));
      }
    }
  }
}

void PulseSequence::sort() {
  std::stable_sort(events.begin(), events.end(),
                   [](const PulseEvent& a, const PulseEvent& b) { return a.t_start < b.t_start; });
}

Complex PulseSequence::amplitude(Channel channel, double t) const {
  Complex sum{0.0, 0.0};
  for (const auto& e : events) {
    if (e.channel == channel) sum += e.value(t);
  }
  return sum;
}

double PulseSequence::peak_amplitude(Channel channel) const {
  double peak = 0.0;
  for (const auto& e : events) {
    if (e.channel == channel) peak = std::max(peak, std::abs(e.peak));
  }
  return peak;
}

std::vector<const PulseEvent*> PulseSequence::events_on(Channel channel) const {
  std::vector<const PulseEvent*> out;
  for (const auto& e : events) {
    if (e.channel == channel) out.push_back(&e);
  }
  return out;
}

}  // namespace slowlight
