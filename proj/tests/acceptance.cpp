// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "dynamics.hpp"
#include "experiment.hpp"
#include "medium.hpp"

using namespace slowlight;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kDephasingTarget = 10.6;      // us
constexpr double kDephasingTol = 0.05;         // us, absolute
constexpr double kMemoryTauTol = 0.15;         // relative to kDephasingTarget
constexpr double kTrapFactor = 5.0;            // tau_trap / tau_memory lower bound
constexpr double kImbalanceFactor = 2.0;       // tau_balanced / tau_imbalanced lower bound
constexpr double kDelayTol = 0.10;             // relative to the analytic delay
constexpr double kConservationTol = 1e-6;      // relative drift of the excitation number
constexpr double kFitNoiselessTol = 1e-2;
constexpr double kFitNoisyTol = 0.05;
constexpr double kMirrorTol = 1e-8;            // relative to the state scale
constexpr double kLinearityTol = 1e-8;         // relative to the trace peak
constexpr double kPhaseMatchTol = 1e-12;
constexpr int kRandomCases = 100;

int failures = 0;

void report(int n, bool ok, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", n, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

// Runs a criterion body; exceptions count as FAIL.
void guarded(int n, const std::string& what, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(n, false, what, std::string("exception: ") + e.what());
  }
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::vector<DecayPoint> points(const SweepResult& r) {
  std::vector<DecayPoint> p;
  for (std::size_t i = 0; i < r.values.size(); ++i) p.push_back({r.values[i], r.peaks[i]});
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::vector<double> kDurations{1, 7, 13, 20, 27, 33, 40, 46, 53};   // up to 5 T2*

double memory_tau_exp = 0.0;

void criterion1() {
  const double t2 = dephasing_time(30.0);
  report(1, std::abs(t2 - kDephasingTarget) <= kDephasingTol, "dephasing time at 30 kHz",
         fmt("T2* = %.4f us, target %.2f +- %.2f", t2, kDephasingTarget, kDephasingTol));
}

void criterion2() {
  const Config cfg = parse_config("[protocol]\nkind = memory\n");
  const ExperimentSetup setup = cfg.setup();
  std::vector<double> T;
  for (int i = 0; i <= 15; ++i) T.push_back(2.0 * i);
  SweepOptions so;
  so.threads = 0;
  const SweepResult r = sweep_delay(T, cfg.protocol(), setup, DelayMode::memory, so);
  const FitResult e = fit_decay(points(r), FitModel::exponential);
  const FitResult g = fit_decay(points(r), FitModel::gaussian_sq);
  memory_tau_exp = e.tau;
  const double err = std::abs(e.tau / kDephasingTarget - 1.0);
  report(2, cfg.n_classes >= 64 && err <= kMemoryTauTol, "memory-mode decay time, exponential law",
         fmt("tau = %.3f us (%.1f%% from %.1f); gaussian_sq tau = %.3f us", e.tau, 100.0 * err,
             kDephasingTarget, g.tau));
}

struct TrapFit {
  FitResult exp, gsq;
  double residual;
};

TrapFit trap_sweep(double omega_A) {
  Config cfg = parse_config("[protocol]\nkind = stationary\n");
  cfg.omega_A = omega_A;
  SweepOptions so;
  so.threads = 0;
  const SweepResult r = sweep_duration(kDurations, cfg.protocol(), cfg.setup(), so);
  return {fit_decay(points(r), FitModel::exponential), fit_decay(points(r), FitModel::gaussian_sq),
          balance_residual(cfg.omega_C, cfg.g_C, cfg.omega_A, cfg.g_A)};
}

TrapFit balanced;

void criterion3() {
  const Config cfg = parse_config("[protocol]\nkind = stationary\n");
  balanced = trap_sweep(cfg.omega_C);
  const double t2 = 2.0 / cfg.gamma_spin;
  const bool ok = balanced.residual == 0.0 && memory_tau_exp > 0.0 &&
                  balanced.exp.tau >= kTrapFactor * memory_tau_exp && balanced.exp.tau <= t2;
  report(3, ok, "balanced stationary light extends the decay time",
         fmt("tau_trap = %.2f us = %.1f x memory tau, T2 = %.0f us; gaussian_sq tau_trap = %.2f us",
             balanced.exp.tau, balanced.exp.tau / memory_tau_exp, t2, balanced.gsq.tau));
}

void criterion4() {
  const Config cfg = parse_config("[protocol]\nkind = stationary\n");
  // (Omega_C - Omega_A) / (Omega_C + Omega_A) = 1/3.
  const TrapFit imb = trap_sweep(0.5 * cfg.omega_C);
  const double ratio = balanced.exp.tau / imb.exp.tau;
  const bool ok = std::abs(imb.residual - 1.0 / 3.0) < 1e-12 && ratio >= kImbalanceFactor;
  report(4, ok, "imbalanced couplings shorten the trapping time",
         fmt("residual %.4f: tau_trap = %.2f us, ratio %.2f; gaussian_sq ratio %.2f", imb.residual,
             imb.exp.tau, ratio, balanced.gsq.tau / imb.gsq.tau));
}

void criterion5() {
  std::string detail;
  bool ok = true;
  for (double d : {10.0, 30.0}) {
    auto text = [](double depth) {
      return "[medium]\noptical_depth = " + format_double(depth) +
             "\ntransit_time_us = 0.1\n[grid]\ncells = 50\nt_end_us = 70\n"
             "[protocol]\nkind = slow_light\nomega_C = 2\n";
    };
    const Config cfg = parse_config(text(d));
    const Config empty = parse_config(text(0.0));
    const DetectorTrace tr = run_configured(cfg);
    const DetectorTrace ref = run_configured(empty);
    const MediumParams m = cfg.medium();
    const double analytic = m.length / *group_velocity(m, cfg.omega_C) - m.length / m.c;
    const double sim = group_delay(tr, ref);
    const double err = std::abs(sim / analytic - 1.0);
    ok = ok && err <= kDelayTol;
    detail += fmt("d=%.0f: %.3f us vs %.3f us (%.1f%%); ", d, sim, analytic, 100.0 * err);
  }
  detail.resize(detail.size() - 2);
  report(5, ok, "slow-light group delay", detail);
}

void criterion6() {
  MediumParams m;
  m.gamma_opt = 0.0;
  m.gamma_spin = 0.0;
  m.gN = 1.0;
  m.c = 1.0;
  const Grid grid{64, 1.0};
  const auto classes = make_spectral_classes(0.0, 1, Distribution::single);
  SimState s = SimState::ground(grid, 1);
  for (int k = 0; k < grid.cells; ++k) {
    const double z = grid.z(k);
    const double S = 0.05 * std::exp(-0.5 * (z - 0.4) * (z - 0.4) / 0.01);
    s.spin[s.index(k, 0)] = S;
    s.e_fwd[k] = Complex(0.3 * S, 0.01 * z);
    s.e_bwd[k] = Complex(0.0, -0.2 * S);
    s.p_fwd[s.index(k, 0)] = Complex(0.01 * S, 0.0);
  }
  Integrator integ(m, classes, grid);
  BoundaryInputs closed;
  closed.boundary = Boundary::reflecting;
  const ControlDrive drive = ControlDrive::constant(1.0, 0.6);
  const double n0 = excitation_number(s, m, classes);
  double worst = 0.0;
  constexpr int kSteps = 10000;
  for (int n = 0; n < kSteps; ++n) {
    integ.step(s, drive, closed);
    worst = std::max(worst, std::abs(excitation_number(s, m, classes) / n0 - 1.0));
  }
  report(6, worst < kConservationTol, "lossless closed system conserves the excitation number",
         fmt("max relative drift %.2e over %.0f steps", worst, kSteps));
}

void criterion7() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> tau_dist(2.0, 60.0), amp(0.01, 10.0);
  std::normal_distribution<double> noise(0.0, 0.01);
  double clean = 0.0, noisy = 0.0;
  for (FitModel model : {FitModel::gaussian_sq, FitModel::exponential}) {
    for (int trial = 0; trial < kRandomCases; ++trial) {
      const double tau = tau_dist(rng), I0 = amp(rng);
      std::vector<DecayPoint> a, b;
      for (int i = 0; i <= 15; ++i) {
        const double t = 2.0 * i * tau / 10.6;
        const double v = decay_model(model, I0, tau, t);
        a.push_back({t, v});
        b.push_back({t, v * (1.0 + noise(rng))});
      }
      const FitResult fa = fit_decay(a, model), fb = fit_decay(b, model);
      clean = std::max({clean, std::abs(fa.tau / tau - 1.0), std::abs(fa.I0 / I0 - 1.0)});
      noisy = std::max({noisy, std::abs(fb.tau / tau - 1.0), std::abs(fb.I0 / I0 - 1.0)});
    }
  }
  report(7, clean <= kFitNoiselessTol && noisy <= kFitNoisyTol, "fit recovers synthetic decay parameters",
         fmt("worst relative error %.2e noiseless, %.2e with 1%% noise, both models", clean, noisy));
}

SimState random_state(std::mt19937_64& rng, const Grid& grid, int n) {
  std::normal_distribution<double> g(0.0, 0.1);
  SimState s = SimState::ground(grid, n);
  for (auto* v : {&s.e_fwd, &s.e_bwd, &s.p_fwd, &s.p_bwd, &s.spin}) {
    for (auto& x : *v) x = {g(rng), g(rng)};
  }
  return s;
}

SimState mirrored(const SimState& s) {
  SimState m = s;
  const int M = s.grid.cells;
  for (int k = 0; k < M; ++k) {
    m.e_fwd[k] = s.e_bwd[M - 1 - k];
    m.e_bwd[k] = s.e_fwd[M - 1 - k];
    for (int j = 0; j < s.n_classes; ++j) {
      m.p_fwd[m.index(k, j)] = s.p_bwd[s.index(M - 1 - k, j)];
      m.p_bwd[m.index(k, j)] = s.p_fwd[s.index(M - 1 - k, j)];
      m.spin[m.index(k, j)] = s.spin[s.index(M - 1 - k, j)];
    }
  }
  return m;
}

double max_abs_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

double mirror_error(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int M = 4 + static_cast<int>(u(rng) * 12);
  const int n = 1 + static_cast<int>(u(rng) * 4);
  MediumParams m;
  m.c = 1.0 + 4.0 * u(rng);
  m.gamma_opt = u(rng);
  m.gamma_spin = 0.1 * u(rng);
  m.gN = 20.0 * u(rng);
  m.g_C = 0.5 + u(rng);
  m.g_A = 0.5 + u(rng);
  MediumParams mm = m;
  std::swap(mm.g_C, mm.g_A);
  mm.gN = m.gN * (mm.g_C * mm.g_C) / (m.g_C * m.g_C);
  std::vector<SpectralClass> classes;
  for (int j = 0; j < n; ++j) classes.push_back({2.0 * u(rng) - 1.0, 1.0 / n});
  const Grid grid{M, 1.0};
  const double a = 3.0 * u(rng), b = 3.0 * u(rng), f = 2.0 * u(rng);
  ControlDrive drive, swapped;
  drive.omega_C = [a, f](double t) { return Complex(a * std::cos(f * t), 0.3 * a); };
  drive.omega_A = [b](double t) { return Complex(b, 0.0) * (1.0 + 0.2 * t); };
  swapped.omega_C = drive.omega_A;
  swapped.omega_A = drive.omega_C;
  SimState s = random_state(rng, grid, n);
  SimState r = mirrored(s);
  Integrator i1(m, classes, grid), i2(mm, classes, grid);
  for (int k = 0; k < 25; ++k) {
    i1.step(s, drive, {});
    i2.step(r, swapped, {});
  }
  const SimState back = mirrored(r);
  double scale = 1e-30;
  for (const auto& x : s.spin) scale = std::max(scale, std::abs(x));
  for (const auto& x : s.e_fwd) scale = std::max(scale, std::abs(x));
  return std::max({max_abs_diff(s.e_fwd, back.e_fwd), max_abs_diff(s.e_bwd, back.e_bwd),
                   max_abs_diff(s.p_fwd, back.p_fwd), max_abs_diff(s.p_bwd, back.p_bwd),
                   max_abs_diff(s.spin, back.spin)}) /
         scale;
}

PulseSequence probe_and_controls(double amp, double omega_C, double omega_A) {
  PulseSequence seq;
  seq.t_end = 4.0;
  seq.sample_rate = 20.0;
  PulseEvent p;
  p.channel = Channel::P;
  p.duration = 3.0;
  p.peak = amp;
  p.shape = PulseShape::gaussian;
  p.fwhm = 1.0;
  seq.events.push_back(p);
  seq.events.push_back({Channel::C, 0.0, seq.t_end, omega_C, PulseShape::rect});
  if (omega_A > 0.0) seq.events.push_back({Channel::A, 0.0, seq.t_end, omega_A, PulseShape::rect});
  seq.sort();
  return seq;
}

double linearity_error(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MediumParams m;
  m.c = 8.0;
  m.gamma_opt = 0.5 + u(rng);
  m.set_optical_depth(5.0 * u(rng));
  const auto classes = make_spectral_classes(100.0 * u(rng), 3, Distribution::lorentzian);
  const double omega_C = 0.5 + 2.0 * u(rng), omega_A = 2.0 * u(rng);
  const double alpha = 0.01 + 5.0 * u(rng);
  const Grid grid{16, 1.0};
  const auto base = run_dynamics(probe_and_controls(1e-3, omega_C, omega_A), m, grid, classes);
  const auto scaled = run_dynamics(probe_and_controls(alpha * 1e-3, omega_C, omega_A), m, grid, classes);
  const double a2 = alpha * alpha;
  double worst = 0.0, peak = 1e-300;
  for (std::size_t i = 0; i < base.trace.size(); ++i) {
    peak = std::max({peak, base.trace.fwd[i], base.trace.bwd[i]});
    worst = std::max({worst, std::abs(scaled.trace.fwd[i] - a2 * base.trace.fwd[i]),
                      std::abs(scaled.trace.bwd[i] - a2 * base.trace.bwd[i])});
  }
  return worst / (a2 * peak);
}

double phase_match_error(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  auto rv = [&] { return WaveVector{{g(rng), g(rng), g(rng) + 3.0}}; };
  const WaveVector c1 = rv(), p1 = rv(), a1 = rv(), c2 = rv(), p2 = rv(), a2 = rv();
  const double s = g(rng);
  double err = 0.0;
  auto diff = [&](const WaveVector& x, const WaveVector& y) {
    for (int j = 0; j < 3; ++j) err = std::max(err, std::abs(x.k[j] - y.k[j]) / (1.0 + std::abs(y.k[j])));
  };
  // Linearity.
  diff(phase_match(c1 + c2 * s, p1 + p2 * s, a1 + a2 * s).k_pc,
       phase_match(c1, p1, a1).k_pc + phase_match(c2, p2, a2).k_pc * s);
  // Momentum balance k_PC + k_P = k_C + k_A.
  diff(phase_match(c1, p1, a1).k_pc + p1, c1 + a1);
  // Exactly counter-propagating controls return -k_P.
  diff(phase_match(c1, p1, c1 * -1.0).k_pc, p1 * -1.0);
  return err;
}

void criterion8() {
  std::mt19937_64 rng(8088);
  double mirror = 0.0, linear = 0.0, pm = 0.0;
  for (int i = 0; i < kRandomCases; ++i) mirror = std::max(mirror, mirror_error(rng));
  for (int i = 0; i < kRandomCases; ++i) linear = std::max(linear, linearity_error(rng));
  for (int i = 0; i < kRandomCases; ++i) pm = std::max(pm, phase_match_error(rng));
  report(8, mirror <= kMirrorTol && linear <= kLinearityTol && pm <= kPhaseMatchTol,
         "mirror, linearity and phase-matching property suites",
         fmt("%.0f cases each; worst mirror %.1e, linearity %.1e, phase match %.1e", kRandomCases, mirror,
             linear, pm));
}

void criterion9() {
  const Config cfg = parse_config(
      "[medium]\nn_classes = 16\n[grid]\ncells = 50\n[protocol]\nkind = memory\n"
      "[sweep]\nvalues = 0, 3, 6, 9\n");
  const fs::path root = fs::temp_directory_path() / "slowlight_acceptance_determinism";
  fs::remove_all(root);
  CommandOptions a, b;
  a.out_dir = (root / "a").string();
  b.out_dir = (root / "b").string();
  a.threads = b.threads = 2;
  cmd_sweep(cfg, a);
  cmd_sweep(cfg, b);
  const std::string x = slurp(root / "a" / cfg.sweep_csv), y = slurp(root / "b" / cfg.sweep_csv);
  fs::remove_all(root);
  report(9, !x.empty() && x == y, "repeated sweeps write byte-identical CSVs",
         fmt("%.0f bytes each", static_cast<double>(x.size())));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  guarded(1, "dephasing time at 30 kHz", criterion1);
  guarded(2, "memory-mode decay time, exponential law", criterion2);
  guarded(3, "balanced stationary light extends the decay time", criterion3);
  guarded(4, "imbalanced couplings shorten the trapping time", criterion4);
  guarded(5, "slow-light group delay", criterion5);
  guarded(6, "lossless closed system conserves the excitation number", criterion6);
  guarded(7, "fit recovers synthetic decay parameters", criterion7);
  guarded(8, "mirror, linearity and phase-matching property suites", criterion8);
  guarded(9, "repeated sweeps write byte-identical CSVs", criterion9);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d of 9 criteria failed, %.1f s\n", failures, s);
  return failures == 0 ? 0 : 1;
}
