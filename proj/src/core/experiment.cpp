#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "error.hpp"

namespace slowlight {

std::string_view to_string(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::slow_light: return "slow_light";
    case ProtocolKind::memory: return "memory";
    case ProtocolKind::stationary: return "stationary";
  }
  return "?";
}

ProtocolKind protocol_from_string(std::string_view name) {
  if (name == "slow_light") return ProtocolKind::slow_light;
  if (name == "memory") return ProtocolKind::memory;
  if (name == "stationary") return ProtocolKind::stationary;
  throw InvalidArgument("unknown protocol kind '" + std::string(name) +
                        "' (expected slow_light, memory or stationary)");
}

double ProtocolParams::release_time(ProtocolKind kind) const {
  switch (kind) {
    case ProtocolKind::slow_light: return probe_start_us;
    case ProtocolKind::memory: return gate_time() + storage_T_us;
    case ProtocolKind::stationary: return gate_time() + dark_interval_us + a_duration_us;
  }
  return 0.0;
}

void ProtocolParams::validate(ProtocolKind kind) const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(std::string("protocol: ") + what);
  };
  require(probe_start_us >= 0.0, "probe start must be >= 0");
  require(probe_duration_us > 0.0, "probe duration must be > 0");
  require(probe_shape != PulseShape::gaussian || probe_fwhm_us > 0.0, "probe fwhm must be > 0");
  require(std::isfinite(probe_amplitude), "probe amplitude must be finite");
  require(omega_C >= 0.0 && std::isfinite(omega_C), "omega_C must be >= 0");
  require(omega_A >= 0.0 && std::isfinite(omega_A), "omega_A must be >= 0");
  require(retrieval_power_ratio > 0.0, "retrieval power ratio must be > 0");
  require(control_ramp_us >= 0.0, "control ramp must be >= 0");
  require(storage_T_us >= 0.0, "storage delay T must be >= 0");
  require(dark_interval_us >= 0.0, "dark interval must be >= 0");
  require(a_duration_us > 0.0, "A duration must be > 0");
  require(omega_Y >= 0.0, "omega_Y must be >= 0");
  require(y_duration_us > 0.0, "Y duration must be > 0");
  require(y_delay_us >= 0.0, "Y delay must be >= 0");
  require(tail_us >= 0.0, "tail must be >= 0");
  require(t_end_us >= 0.0, "t_end must be >= 0");
  require(sample_rate > 0.0, "sample rate must be > 0");
  if (kind != ProtocolKind::slow_light) {
    require(gate_time() >= probe_start_us, "P-A delay places the gate before the probe starts");
  }
}

namespace {

PulseEvent gate(Channel ch, double t0, double t1, double peak, double ramp) {
  PulseEvent e;
  e.channel = ch;
  e.t_start = t0;
  e.duration = t1 - t0;
  e.peak = peak;
  e.shape = PulseShape::raised_cosine;
  e.ramp = std::min(ramp, 0.5 * e.duration);
  return e;
}

}  // namespace

PulseSequence standard_sequence(ProtocolKind kind, const ProtocolParams& p) {
  p.validate(kind);
  PulseSequence seq;
  seq.sample_rate = p.sample_rate;

  const double release = p.release_time(kind);
  double t_end = std::max(p.probe_end(), release) + p.tail_us;
  const double y_start = release + p.y_delay_us;
  if (p.omega_Y > 0.0) t_end = std::max(t_end, y_start + p.y_duration_us);
  if (p.t_end_us > 0.0) t_end = p.t_end_us;
  seq.t_end = t_end;

  PulseEvent probe;
  probe.channel = Channel::P;
  probe.t_start = p.probe_start_us;
  probe.duration = p.probe_duration_us;
  probe.peak = p.probe_amplitude;
  probe.shape = p.probe_shape;
  probe.fwhm = p.probe_fwhm_us;
  if (probe.shape == PulseShape::raised_cosine) {
    probe.ramp = std::min(p.control_ramp_us, 0.5 * probe.duration);
  }
  seq.events.push_back(probe);

  const double tg = p.gate_time();
  switch (kind) {
    case ProtocolKind::slow_light:
      seq.events.push_back(gate(Channel::C, 0.0, t_end, p.omega_C, p.control_ramp_us));
      break;
    case ProtocolKind::memory: {
      const double retrieval = p.omega_C * std::sqrt(p.retrieval_power_ratio);
      seq.events.push_back(gate(Channel::C, 0.0, tg, p.omega_C, p.control_ramp_us));
      seq.events.push_back(
          gate(Channel::C, tg + p.storage_T_us, t_end, retrieval, p.control_ramp_us));
      break;
    }
    case ProtocolKind::stationary: {
      const double t_a = tg + p.dark_interval_us;
      if (p.dark_interval_us > 0.0) {
        seq.events.push_back(gate(Channel::C, 0.0, tg, p.omega_C, p.control_ramp_us));
        seq.events.push_back(gate(Channel::C, t_a, t_end, p.omega_C, p.control_ramp_us));
      } else {
        seq.events.push_back(gate(Channel::C, 0.0, t_end, p.omega_C, p.control_ramp_us));
      }
      seq.events.push_back(gate(Channel::A, t_a, t_a + p.a_duration_us, p.omega_A,
                                p.control_ramp_us));
      if (tg < p.probe_end()) {
        std::ostringstream os;
        os << "A turns on at t=" << tg << " before the probe window ends at t=" << p.probe_end();
        seq.warnings.push_back(os.str());
      }
      break;
    }
  }

  if (p.omega_Y > 0.0) {
    PulseEvent y;
    y.channel = Channel::Y;
    y.t_start = y_start;
    y.duration = p.y_duration_us;
    y.peak = p.omega_Y;
    y.detuning = p.y_detuning;
    seq.events.push_back(y);
  }
  seq.sort();
  seq.validate();
  return seq;
}

ReadoutResult switching_readout(SimState& state, double omega_Y, double dt_read,
                                const MediumParams& m, std::span<const SpectralClass> classes) {
  if (omega_Y < 0.0 || !std::isfinite(omega_Y)) {
    throw InvalidArgument("switching_readout: omega_Y must be >= 0");
  }
  if (dt_read < 0.0) throw InvalidArgument("switching_readout: read time must be >= 0");
  ReadoutResult r;
  double f = omega_Y * omega_Y * dt_read / (2.0 * m.gamma_opt);
  if (f > 1.0) {
    f = 1.0;
    r.clamped = true;
  }
  if (f == 0.0) return r;
  r.signal = f * spin_norm(state, classes);
  r.depleted = f;
  const double keep = std::sqrt(1.0 - f);
  for (auto& s : state.spin) s *= keep;
  return r;
}

DetectorTrace run_experiment(const PulseSequence& seq, const ExperimentSetup& setup) {
  RunOptions options;
  std::vector<Readout> readouts;
  std::vector<std::string> clamp_warnings;
  for (const PulseEvent* y : seq.events_on(Channel::Y)) {
    const double t_read = y->t_end();
    const double omega = y->peak;
    const double dt_read = y->duration;
    options.actions.push_back({t_read, [&, t_read, omega, dt_read](SimState& state) {
                                 ReadoutResult r = switching_readout(state, omega, dt_read,
                                                                     setup.medium, setup.classes);
                                 readouts.push_back({t_read, r.signal, r.depleted});
                                 if (r.clamped) {
                                   clamp_warnings.push_back(
                                       "switching readout at t=" + std::to_string(t_read) +
                                       ": depletion fraction clamped to 1");
                                 }
                               }});
  }
  RunOutput out = run_dynamics(seq, setup.medium, setup.grid, setup.classes, options);
  DetectorTrace trace = std::move(out.trace);
  for (const auto& e : seq.events) trace.markers.push_back({e.channel, e.t_start, e.t_end(), e.peak});
  trace.readouts = std::move(readouts);
  trace.warnings.insert(trace.warnings.end(), clamp_warnings.begin(), clamp_warnings.end());
  return trace;
}

Peak released_peak(const DetectorTrace& trace, double t_from) {
  Peak best;
  bool any = false;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace.t[i] < t_from) continue;
    if (!any || trace.fwd[i] > best.value) {
      best = {trace.t[i], trace.fwd[i]};
      any = true;
    }
  }
  if (!any) throw InvalidArgument("released_peak: no samples after t=" + std::to_string(t_from));
  return best;
}

namespace {

template <class Fn>
SweepResult run_points(std::span<const double> values, const SweepOptions& options, Fn&& point) {
  const std::size_t n = values.size();
  SweepResult result;
  result.values.assign(values.begin(), values.end());
  result.peaks.assign(n, 0.0);
  result.peak_times.assign(n, 0.0);
  std::vector<DetectorTrace> traces(n);
  std::vector<std::exception_ptr> errors(n);

  int threads = options.threads;
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), n));

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        auto [trace, release] = point(values[i]);
        Peak pk = released_peak(trace, release);
        result.peaks[i] = pk.value;
        result.peak_times[i] = pk.t;
        if (options.keep_traces) traces[i] = std::move(trace);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  if (options.keep_traces) result.traces = std::move(traces);
  return result;
}

}  // namespace

SweepResult sweep_delay(std::span<const double> T_values, const ProtocolParams& base,
                        const ExperimentSetup& setup, DelayMode mode, const SweepOptions& options) {
  if (T_values.empty()) throw InvalidArgument("sweep_delay: empty list of delays");
  for (double T : T_values) {
    if (!(T >= 0.0)) throw InvalidArgument("sweep_delay: delays must be >= 0");
  }
  const ProtocolKind kind = mode == DelayMode::memory ? ProtocolKind::memory : ProtocolKind::stationary;
  return run_points(T_values, options, [&](double T) {
    ProtocolParams p = base;
    if (mode == DelayMode::memory) {
      p.storage_T_us = T;
    } else {
      p.dark_interval_us = T;
    }
    DetectorTrace trace = run_experiment(standard_sequence(kind, p), setup);
    return std::pair{std::move(trace), p.release_time(kind)};
  });
}

SweepResult sweep_duration(std::span<const double> durations, const ProtocolParams& base,
                           const ExperimentSetup& setup, const SweepOptions& options) {
  if (durations.empty()) throw InvalidArgument("sweep_duration: empty list of durations");
  for (double d : durations) {
    if (!(d > 0.0)) throw InvalidArgument("sweep_duration: durations must be > 0");
  }
  const double residual =
      balance_residual(base.omega_C, setup.medium.g_C, base.omega_A, setup.medium.g_A);
  if (residual > options.max_residual) {
    std::ostringstream os;
    os << "sweep_duration: balance residual " << residual << " exceeds the bound "
       << options.max_residual;
    throw InvalidArgument(os.str());
  }
  return run_points(durations, options, [&](double d) {
    ProtocolParams p = base;
    p.a_duration_us = d;
    DetectorTrace trace = run_experiment(standard_sequence(ProtocolKind::stationary, p), setup);
    return std::pair{std::move(trace), p.release_time(ProtocolKind::stationary)};
  });
}

}  // namespace slowlight
