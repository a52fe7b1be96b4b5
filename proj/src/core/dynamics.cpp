#include "dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "error.hpp"

namespace slowlight {

namespace {

constexpr double kStabilityLimit = 2.5;

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

SimState SimState::ground(const Grid& grid, int n_classes) {
  if (grid.cells < 1) throw InvalidArgument("grid: cells must be >= 1");
  if (!(grid.length > 0.0)) throw InvalidArgument("grid: length must be > 0");
  if (n_classes < 1) throw InvalidArgument("state: n_classes must be >= 1");
  SimState s;
  s.grid = grid;
  s.n_classes = n_classes;
  const auto cells = static_cast<std::size_t>(grid.cells);
  s.e_fwd.assign(cells, Complex{});
  s.e_bwd.assign(cells, Complex{});
  s.p_fwd.assign(cells * n_classes, Complex{});
  s.p_bwd.assign(cells * n_classes, Complex{});
  s.spin.assign(cells * n_classes, Complex{});
  return s;
}

void SimState::check_shapes() const {
  const auto cells = static_cast<std::size_t>(grid.cells);
  const auto atoms = cells * static_cast<std::size_t>(n_classes);
  if (e_fwd.size() != cells || e_bwd.size() != cells || p_fwd.size() != atoms ||
      p_bwd.size() != atoms || spin.size() != atoms) {
    throw InvalidArgument("state: array shapes inconsistent with grid and class count");
  }
}

bool SimState::finite() const {
  auto all = [](const std::vector<Complex>& v) {
    return std::all_of(v.begin(), v.end(), [](Complex z) { return slowlight::finite(z); });
  };
  return all(e_fwd) && all(e_bwd) && all(p_fwd) && all(p_bwd) && all(spin);
}

bool SimState::weak_probe() const {
  auto max_abs = [](const std::vector<Complex>& v) {
    double m = 0.0;
    for (Complex z : v) m = std::max(m, std::norm(z));
    return m;
  };
  return std::max({max_abs(p_fwd), max_abs(p_bwd), max_abs(spin)}) <= 1.0;
}

Complex ControlDrive::rabi_C(double t) const {
  Complex v = omega_C ? omega_C(t) : Complex{};
  return detuning_C == 0.0 ? v : v * std::polar(1.0, -detuning_C * t);
}

Complex ControlDrive::rabi_A(double t) const {
  Complex v = omega_A ? omega_A(t) : Complex{};
  return detuning_A == 0.0 ? v : v * std::polar(1.0, -detuning_A * t);
}

ControlDrive ControlDrive::constant(Complex omega_C, Complex omega_A) {
  ControlDrive d;
  d.omega_C = [omega_C](double) { return omega_C; };
  d.omega_A = [omega_A](double) { return omega_A; };
  return d;
}

AtomDerivatives model_rhs(const SimState& state, const ControlDrive& drive,
                          const MediumParams& m, std::span<const SpectralClass> classes,
                          int cell, int j) {
  const std::size_t i = state.index(cell, j);
  const Complex optical_decay{0.5 * m.gamma_opt, m.optical_detuning};
  const Complex spin_decay{0.5 * m.gamma_spin, classes[j].delta};
  return atom_rhs(state.p_fwd[i], state.p_bwd[i], state.spin[i], m.g_C * state.e_fwd[cell],
                  m.g_A * state.e_bwd[cell], drive.rabi_C(state.t), drive.rabi_A(state.t),
                  optical_decay, spin_decay);
}

Integrator::Integrator(const MediumParams& m, std::span<const SpectralClass> classes,
                       const Grid& grid)
    : m_(m), grid_(grid) {
  m_.validate();
  if (grid.cells < 1) throw InvalidArgument("grid: cells must be >= 1");
  if (std::abs(grid.length - m.length) > 1e-12 * m.length) {
    throw InvalidArgument("grid: length must equal the medium length");
  }
  if (classes.empty()) throw InvalidArgument("integrator: empty spectral ensemble");
  dt_ = grid.dz() / m.c;
  weight_.reserve(classes.size());
  spin_decay_.reserve(classes.size());
  for (const auto& c : classes) {
    weight_.push_back(c.weight);
    spin_decay_.emplace_back(0.5 * m.gamma_spin, c.delta);
  }
  scratch_.assign(6 * classes.size(), Complex{});
}

double Integrator::stiffness(double omega_C, double omega_A) const {
  double max_detuning = 0.0;
  for (Complex d : spin_decay_) max_detuning = std::max(max_detuning, std::abs(d.imag()));
  const double r = m_.g_A / m_.g_C;
  const double collective =
      0.5 * std::sqrt(m_.gN * (1.0 + r * r) + omega_C * omega_C + omega_A * omega_A);
  const double rate = 0.5 * m_.gamma_opt + std::abs(m_.optical_detuning) + max_detuning + collective;
  return rate * dt_;
}

void Integrator::check_stability(double omega_C, double omega_A) const {
  const double s = stiffness(omega_C, omega_A);
  if (s > kStabilityLimit) {
    std::ostringstream os;
    os << "integrator: dt * max eigenfrequency = " << s << " exceeds the RK4 stability margin "
       << kStabilityLimit << "; increase grid cells";
    throw NumericError(os.str());
  }
}

void Integrator::step(SimState& state, const ControlDrive& drive, const BoundaryInputs& inputs) {
  const int cells = grid_.cells;
  const int n = static_cast<int>(weight_.size());
  if (state.grid.cells != cells || state.n_classes != n) {
    throw InvalidArgument("integrator: state does not match grid/ensemble");
  }
  const double t0 = state.t;
  const double dt = dt_;

  // Advection by exactly one cell.
  const Complex leaving_fwd = state.e_fwd[cells - 1];
  const Complex leaving_bwd = state.e_bwd[0];
  std::copy_backward(state.e_fwd.begin(), state.e_fwd.end() - 1, state.e_fwd.end());
  std::copy(state.e_bwd.begin() + 1, state.e_bwd.end(), state.e_bwd.begin());
  if (inputs.boundary == Boundary::reflecting) {
    state.e_fwd[0] = leaving_bwd;
    state.e_bwd[cells - 1] = leaving_fwd;
  } else {
    const double t_in = t0 + 0.5 * dt;
    state.e_fwd[0] = inputs.forward ? inputs.forward(t_in) : Complex{};
    state.e_bwd[cells - 1] = inputs.backward ? inputs.backward(t_in) : Complex{};
  }

  // RK4 stage controls: k1 at t0, k2/k3 at t0+dt/2, k4 at t0+dt.
  const Complex oc[3] = {drive.rabi_C(t0), drive.rabi_C(t0 + 0.5 * dt), drive.rabi_C(t0 + dt)};
  const Complex oa[3] = {drive.rabi_A(t0), drive.rabi_A(t0 + 0.5 * dt), drive.rabi_A(t0 + dt)};
  constexpr int kStageTime[4] = {0, 1, 1, 2};
  const double stage_weight[4] = {1.0, 2.0, 2.0, 1.0};
  const double stage_advance[3] = {0.5 * dt, 0.5 * dt, dt};

  const Complex optical_decay{0.5 * m_.gamma_opt, m_.optical_detuning};
  const double N = m_.density();
  const Complex field_coupling_fwd{0.0, 0.5 * N * m_.g_C};
  const Complex field_coupling_bwd{0.0, 0.5 * N * m_.g_A};
  const double g_C = m_.g_C;
  const double g_A = m_.g_A;

  Complex* tp_f = scratch_.data();
  Complex* tp_b = tp_f + n;
  Complex* ts = tp_b + n;
  Complex* acc_f = ts + n;
  Complex* acc_b = acc_f + n;
  Complex* acc_s = acc_b + n;

  for (int k = 0; k < cells; ++k) {
    Complex* pf = state.p_fwd.data() + state.index(k, 0);
    Complex* pb = state.p_bwd.data() + state.index(k, 0);
    Complex* sp = state.spin.data() + state.index(k, 0);
    Complex& ef = state.e_fwd[k];
    Complex& eb = state.e_bwd[k];

    Complex sum_f{}, sum_b{};
    for (int j = 0; j < n; ++j) {
      sum_f += weight_[j] * pf[j];
      sum_b += weight_[j] * pb[j];
    }

    Complex cur_ef = ef, cur_eb = eb;
    Complex acc_ef{}, acc_eb{};
    const Complex* cur_pf = pf;
    const Complex* cur_pb = pb;
    const Complex* cur_s = sp;

    for (int s = 0; s < 4; ++s) {
      const Complex om_c = oc[kStageTime[s]];
      const Complex om_a = oa[kStageTime[s]];
      const double w = stage_weight[s];
      const Complex def = field_coupling_fwd * sum_f;
      const Complex deb = field_coupling_bwd * sum_b;
      const Complex drive_f = g_C * cur_ef;
      const Complex drive_b = g_A * cur_eb;
      if (s < 3) {
        const double a = stage_advance[s];
        Complex next_sum_f{}, next_sum_b{};
        for (int j = 0; j < n; ++j) {
          const AtomDerivatives d = atom_rhs(cur_pf[j], cur_pb[j], cur_s[j], drive_f, drive_b,
                                             om_c, om_a, optical_decay, spin_decay_[j]);
          if (s == 0) {
            acc_f[j] = d.p_fwd;
            acc_b[j] = d.p_bwd;
            acc_s[j] = d.spin;
          } else {
            acc_f[j] += w * d.p_fwd;
            acc_b[j] += w * d.p_bwd;
            acc_s[j] += w * d.spin;
          }
          tp_f[j] = pf[j] + a * d.p_fwd;
          tp_b[j] = pb[j] + a * d.p_bwd;
          ts[j] = sp[j] + a * d.spin;
          next_sum_f += weight_[j] * tp_f[j];
          next_sum_b += weight_[j] * tp_b[j];
        }
        acc_ef += w * def;
        acc_eb += w * deb;
        cur_ef = ef + a * def;
        cur_eb = eb + a * deb;
        sum_f = next_sum_f;
        sum_b = next_sum_b;
        cur_pf = tp_f;
        cur_pb = tp_b;
        cur_s = ts;
      } else {
        const double h = dt / 6.0;
        for (int j = 0; j < n; ++j) {
          const AtomDerivatives d = atom_rhs(cur_pf[j], cur_pb[j], cur_s[j], drive_f, drive_b,
                                             om_c, om_a, optical_decay, spin_decay_[j]);
          pf[j] += h * (acc_f[j] + d.p_fwd);
          pb[j] += h * (acc_b[j] + d.p_bwd);
          sp[j] += h * (acc_s[j] + d.spin);
        }
        ef += h * (acc_ef + def);
        eb += h * (acc_eb + deb);
      }
    }

    if (!finite(ef) || !finite(eb)) {
      std::ostringstream os;
      os << "integrator: non-finite field at t=" << t0 + dt << " us, cell " << k;
      throw NumericError(os.str());
    }
  }
  state.t = t0 + dt;
}

void step(SimState& state, const ControlDrive& drive, const MediumParams& m,
          std::span<const SpectralClass> classes, double dt, const BoundaryInputs& inputs) {
  const double dz = state.grid.dz();
  if (!(dt > 0.0) || std::abs(m.c * dt - dz) > 1e-9 * dz) {
    std::ostringstream os;
    os << "step: CFL lock violated, c*dt = " << m.c * dt << " but dz = " << dz
       << " (the one-cell advection requires c*dt == dz)";
    throw InvalidArgument(os.str());
  }
  Integrator integrator(m, classes, state.grid);
  integrator.step(state, drive, inputs);
}

double excitation_number(const SimState& state, const MediumParams& m,
                         std::span<const SpectralClass> classes) {
  const double dz = state.grid.dz();
  const double N = m.density();
  double total = 0.0;
  for (int k = 0; k < state.grid.cells; ++k) {
    double atoms = 0.0;
    for (int j = 0; j < state.n_classes; ++j) {
      const std::size_t i = state.index(k, j);
      atoms += classes[j].weight *
               (std::norm(state.p_fwd[i]) + std::norm(state.p_bwd[i]) + std::norm(state.spin[i]));
    }
    total += dz * (std::norm(state.e_fwd[k]) + std::norm(state.e_bwd[k]) + N * atoms);
  }
  return total;
}

double spin_norm(const SimState& state, std::span<const SpectralClass> classes) {
  const double dz = state.grid.dz();
  double total = 0.0;
  for (int k = 0; k < state.grid.cells; ++k) {
    double cell = 0.0;
    for (int j = 0; j < state.n_classes; ++j) {
      cell += classes[j].weight * std::norm(state.spin[state.index(k, j)]);
    }
    total += dz * cell;
  }
  return total;
}

double field_centroid(const SimState& state, double energy_floor) {
  double energy = 0.0;
  double moment = 0.0;
  for (int k = 0; k < state.grid.cells; ++k) {
    const double e = std::norm(state.e_fwd[k]) + std::norm(state.e_bwd[k]);
    energy += e;
    moment += e * state.grid.z(k);
  }
  if (!(energy * state.grid.dz() > energy_floor)) {
    throw NumericError("field_centroid: field energy below floor, centroid undefined");
  }
  return moment / energy;
}

RunOutput run_dynamics(const PulseSequence& sequence, const MediumParams& m, const Grid& grid,
                       std::span<const SpectralClass> classes, const RunOptions& options) {
  sequence.validate();
  Integrator integrator(m, classes, grid);
  const double dt = integrator.dt();
  integrator.check_stability(sequence.peak_amplitude(Channel::C),
                             sequence.peak_amplitude(Channel::A));

  RunOutput out;
  DetectorTrace& trace = out.trace;
  trace.dt = dt;
  trace.warnings = sequence.warnings;

  // Resolution of the slowest probe envelope at the forward group velocity.
  if (auto vg = group_velocity(m, sequence.peak_amplitude(Channel::C))) {
    for (const PulseEvent* p : sequence.events_on(Channel::P)) {
      const double extent = (p->shape == PulseShape::gaussian ? p->fwhm : p->duration) * *vg;
      if (extent < 16.0 * grid.dz() && extent < 16.0 * m.length) {
        std::ostringstream os;
        os << "probe extent at v_g spans " << extent / grid.dz() << " cells (< 16)";
        trace.warnings.push_back(os.str());
      }
    }
  }

  SimState state = options.initial ? *options.initial
                                   : SimState::ground(grid, static_cast<int>(classes.size()));
  state.check_shapes();
  if (state.grid.cells != grid.cells || state.n_classes != static_cast<int>(classes.size())) {
    throw InvalidArgument("run_dynamics: initial state does not match grid/ensemble");
  }
  const double t_begin = state.t;

  ControlDrive drive;
  auto c_events = sequence.events_on(Channel::C);
  auto a_events = sequence.events_on(Channel::A);
  auto p_events = sequence.events_on(Channel::P);
  auto sum_of = [](std::vector<const PulseEvent*> evs) {
    return [evs = std::move(evs)](double t) {
      Complex v{};
      for (const PulseEvent* e : evs) v += e->value(t);
      return v;
    };
  };
  drive.omega_C = sum_of(c_events);
  drive.omega_A = sum_of(a_events);
  BoundaryInputs inputs;
  inputs.boundary = options.boundary;
  if (!p_events.empty()) inputs.forward = sum_of(p_events);

  const long long n_steps = static_cast<long long>(std::ceil((sequence.t_end - t_begin) / dt - 1e-9));
  const long long stride =
      std::max<long long>(1, std::llround(1.0 / (sequence.sample_rate * dt)));

  std::vector<double> snapshots = options.snapshot_times;
  std::sort(snapshots.begin(), snapshots.end());
  std::size_t next_snapshot = 0;
  std::vector<const TimedAction*> actions;
  for (const auto& a : options.actions) actions.push_back(&a);
  std::stable_sort(actions.begin(), actions.end(),
                   [](const TimedAction* a, const TimedAction* b) { return a->t < b->t; });
  std::size_t next_action = 0;

  auto record = [&]() {
    trace.t.push_back(state.t);
    trace.fwd.push_back(std::norm(state.e_fwd[grid.cells - 1]));
    trace.bwd.push_back(std::norm(state.e_bwd[0]));
    trace.spin.push_back(spin_norm(state, classes));
    if (trace.weak_probe && !state.weak_probe()) {
      trace.weak_probe = false;
      std::ostringstream os;
      os << "weak-probe regime exceeded (max |P|,|S| > 1) at t=" << state.t;
      trace.warnings.push_back(os.str());
    }
  };

  record();
  for (long long n = 1; n <= n_steps; ++n) {
    integrator.step(state, drive, inputs);
    state.t = t_begin + static_cast<double>(n) * dt;
    while (next_action < actions.size() && state.t >= actions[next_action]->t) {
      actions[next_action]->apply(state);
      ++next_action;
    }
    while (next_snapshot < snapshots.size() && state.t >= snapshots[next_snapshot]) {
      out.snapshots.push_back(state);
      ++next_snapshot;
    }
    if (n % stride == 0) record();
  }
  if (!state.finite()) throw NumericError("run_dynamics: non-finite atomic amplitudes at end of run");
  return out;
}

double effective_velocity(const MediumParams& m, double omega_C, double omega_A) {
  const double r = m.g_C / m.g_A;
  const double fwd = omega_C * omega_C;
  const double bwd = omega_A * omega_A * r * r;
  if (!(fwd + bwd > 0.0)) throw InvalidArgument("effective_velocity: all couplings are zero");
  return m.c * (fwd - bwd) / (fwd + bwd + m.gN);
}

double balance_residual(double omega_C, double g_C, double omega_A, double g_A) {
  if (!(g_C > 0.0) || !(g_A > 0.0)) throw InvalidArgument("balance_residual: g must be > 0");
  if (omega_C < 0.0 || omega_A < 0.0) {
    throw InvalidArgument("balance_residual: Rabi frequencies must be >= 0");
  }
  const double a = omega_C / g_C;
  const double b = omega_A / g_A;
  if (a + b == 0.0) throw InvalidArgument("balance_residual: both Rabi frequencies are zero");
  return std::abs(a - b) / (a + b);
}

}  // namespace slowlight
