#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "medium.hpp"
#include "pulses.hpp"

namespace slowlight {

// One-dimensional Maxwell-Bloch model of a Lambda medium with a forward
// probe channel (E+, P+) driven by the control C and a backward conjugate
// channel (E-, P-) driven by the counterpropagating control A. Both channels
// share a single spin coherence S per spectral class:
//
//   dP+/dt = -(gamma_opt/2 + i Delta) P+ + (i/2)(g_C E+ + Omega_C S)
//   dP-/dt = -(gamma_opt/2 + i Delta) P- + (i/2)(g_A E- + Omega_A S)
//   dS/dt  = -(gamma_spin/2 + i delta_j) S + (i/2)(Omega_C* P+ + Omega_A* P-)
//   (d/dt +- c d/dz) E+- = i (N g_{C,A} / 2) sum_j w_j P+-,j,   N = gN / g_C^2
//
// The model is linear in (E, P, S): a weak probe on atoms prepared in |1>.

struct Grid {
  int cells = 128;
  double length = 1.0;

  double dz() const { return length / cells; }
  double z(int k) const { return (k + 0.5) * dz(); }
};

enum class Boundary {
  open,        // fields leave freely; inputs injected at z = 0 (E+) and z = L (E-)
  reflecting,  // closed cavity: E+ leaving at L re-enters as E-, and vice versa
};

struct SimState {
  double t = 0.0;
  Grid grid;
  int n_classes = 1;
  std::vector<Complex> e_fwd, e_bwd;         // [cells]
  std::vector<Complex> p_fwd, p_bwd, spin;   // [cells * n_classes], cell-major

  /// Repumped initial condition: every atom in |1>, all coherences zero.
  static SimState ground(const Grid& grid, int n_classes);

  std::size_t index(int cell, int j) const {
    return static_cast<std::size_t>(cell) * n_classes + j;
  }
  void check_shapes() const;
  bool finite() const;
  /// Linearized-model validity: max |P|, |S| <= 1.
  bool weak_probe() const;
};

struct ControlDrive {
  std::function<Complex(double)> omega_C;
  std::function<Complex(double)> omega_A;
  double detuning_C = 0.0;   // rad/us, applied as exp(-i detuning t)
  double detuning_A = 0.0;

  Complex rabi_C(double t) const;
  Complex rabi_A(double t) const;

  static ControlDrive constant(Complex omega_C, Complex omega_A);
};

struct BoundaryInputs {
  Boundary boundary = Boundary::open;
  std::function<Complex(double)> forward;    // E+(z=0, t)
  std::function<Complex(double)> backward;   // E-(z=L, t)
};

struct AtomDerivatives {
  Complex p_fwd, p_bwd, spin;
};

/// Right-hand side of the atomic equations, shared by model_rhs and the
/// integrator kernel.
inline AtomDerivatives atom_rhs(Complex p_fwd, Complex p_bwd, Complex s, Complex drive_fwd,
                                Complex drive_bwd, Complex omega_C, Complex omega_A,
                                Complex optical_decay, Complex spin_decay) {
  constexpr Complex half_i{0.0, 0.5};
  return {
      -optical_decay * p_fwd + half_i * (drive_fwd + omega_C * s),
      -optical_decay * p_bwd + half_i * (drive_bwd + omega_A * s),
      -spin_decay * s + half_i * (std::conj(omega_C) * p_fwd + std::conj(omega_A) * p_bwd),
  };
}

/// Time derivatives of (P+, P-, S) of class j in one cell at state.t.
AtomDerivatives model_rhs(const SimState& state, const ControlDrive& drive,
                          const MediumParams& m, std::span<const SpectralClass> classes,
                          int cell, int j);

/// Operator-split integrator: exact one-cell upwind advection (c dt = dz)
/// followed by a classical RK4 update of each cell's local field-atom system.
class Integrator {
 public:
  Integrator(const MediumParams& m, std::span<const SpectralClass> classes, const Grid& grid);

  double dt() const { return dt_; }
  /// Largest local eigenfrequency estimate times dt; RK4 needs < 2.8.
  double stiffness(double omega_C, double omega_A) const;
  /// Throws NumericError when `stiffness` exceeds the stability margin.
  void check_stability(double omega_C, double omega_A) const;

  /// Advances `state` by dt. Throws NumericError (with time and cell) when a
  /// non-finite value appears.
  void step(SimState& state, const ControlDrive& drive, const BoundaryInputs& inputs);

 private:
  MediumParams m_;
  Grid grid_;
  double dt_;
  std::vector<double> weight_;
  std::vector<Complex> spin_decay_;
  std::vector<Complex> scratch_;
};

/// Single step with an explicit dt. Requires c dt = dz (relative 1e-9).
void step(SimState& state, const ControlDrive& drive, const MediumParams& m,
          std::span<const SpectralClass> classes, double dt, const BoundaryInputs& inputs = {});

/// Sum_z dz [ |E+|^2 + |E-|^2 + N sum_j w_j (|P+|^2 + |P-|^2 + |S|^2) ].
/// Conserved when gamma_opt = gamma_spin = 0, delta_j = 0 and the boundary
/// is reflecting.
double excitation_number(const SimState& state, const MediumParams& m,
                         std::span<const SpectralClass> classes);

/// N_S = sum_z dz sum_j w_j |S|^2.
double spin_norm(const SimState& state, std::span<const SpectralClass> classes);

/// Energy-weighted mean z of |E+|^2 + |E-|^2. Throws NumericError when the
/// total field energy is at or below `energy_floor`.
double field_centroid(const SimState& state, double energy_floor = 1e-30);

struct Marker {
  Channel channel = Channel::P;
  double t_start = 0.0;
  double t_end = 0.0;
  double peak = 0.0;
};

struct Readout {
  double t = 0.0;
  double signal = 0.0;   // diffracted-signal proxy D
  double depleted = 0.0; // fraction of the spin norm removed
};

struct DetectorTrace {
  std::vector<double> t;
  std::vector<double> fwd;        // |E+(L, t)|^2
  std::vector<double> bwd;        // |E-(0, t)|^2
  std::vector<double> spin;       // N_S(t)
  std::vector<Marker> markers;
  std::vector<Readout> readouts;
  std::vector<std::string> warnings;
  double dt = 0.0;
  bool weak_probe = true;

  std::size_t size() const { return t.size(); }
};

struct TimedAction {
  double t = 0.0;
  std::function<void(SimState&)> apply;
};

struct RunOptions {
  Boundary boundary = Boundary::open;
  std::vector<double> snapshot_times;
  std::vector<TimedAction> actions;    // run after the first step reaching t
  const SimState* initial = nullptr;   // defaults to SimState::ground
};

struct RunOutput {
  DetectorTrace trace;
  std::vector<SimState> snapshots;
};

/// Integrates the sequence from t = 0 to sequence.t_end. The probe channel
/// feeds E+(0, t), controls C and A are spatially uniform, E-(L, t) = 0.
RunOutput run_dynamics(const PulseSequence& sequence, const MediumParams& m, const Grid& grid,
                       std::span<const SpectralClass> classes, const RunOptions& options = {});

/// Signed polariton velocity c (Omega_C^2 - Omega_A^2 r^2) / (Omega_C^2 + Omega_A^2 r^2 + gN),
/// r = g_C / g_A. Throws InvalidArgument when all couplings vanish.
double effective_velocity(const MediumParams& m, double omega_C, double omega_A);

/// |Omega_C/g_C - Omega_A/g_A| / (Omega_C/g_C + Omega_A/g_A).
double balance_residual(double omega_C, double g_C, double omega_A, double g_A);

}  // namespace slowlight
