#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "dynamics.hpp"

namespace slowlight {

// gaussian_sq:  I(t) = I0 exp(-(t/tau)^2)
// exponential:  I(t) = I0 [exp(-t/tau)]^2, i.e. the field amplitude decays
//               as exp(-t/tau) and tau is an amplitude 1/e time.
enum class FitModel { gaussian_sq, exponential };

std::string_view to_string(FitModel m);
FitModel fit_model_from_string(std::string_view name);

struct DecayPoint {
  double t = 0.0;
  double intensity = 0.0;
};

struct FitResult {
  double I0 = 0.0;
  double tau = 0.0;
  double rms_residual = 0.0;   // rms of (model - data) / max(data)
  int n_points = 0;
  FitModel model = FitModel::gaussian_sq;
  int iterations = 0;
  bool converged = false;
  bool decaying = true;        // false: no decay resolved, tau reported at the cap
};

struct FitOptions {
  int max_iterations = 200;
  double tolerance = 1e-10;    // relative parameter step
  double tau_cap_factor = 1e6; // cap = factor * max(t)
};

/// Least-squares fit of the decay law. Deterministic: log-linear start,
/// then damped Gauss-Newton on (I0, rate) with a step-halving line search.
/// Throws InvalidArgument on fewer than 3 points, negative t or I, fewer
/// than two distinct t, or all-zero intensities.
FitResult fit_decay(std::span<const DecayPoint> points, FitModel model,
                    const FitOptions& options = {});

/// Model value at t.
double decay_model(FitModel model, double I0, double tau, double t);

/// Difference of intensity-weighted temporal centroids of the forward
/// intensity. Throws NumericError when either trace has no peak above the
/// noise floor or more than one disjoint region above half maximum.
double group_delay(const DetectorTrace& trace, const DetectorTrace& reference,
                   double noise_floor = 1e-30);

/// Weighted centroid helper used by group_delay (same peak checks).
double temporal_centroid(std::span<const double> t, std::span<const double> intensity,
                         double noise_floor = 1e-30);

struct WaveVector {
  std::array<double, 3> k{0.0, 0.0, 0.0};

  static WaveVector from(double magnitude, std::array<double, 3> direction);
  double magnitude() const;
  /// Unit vector along k. Throws InvalidArgument for the zero vector.
  std::array<double, 3> direction() const;

  WaveVector operator+(const WaveVector& o) const;
  WaveVector operator-(const WaveVector& o) const;
  WaveVector operator*(double s) const;
};

struct PhaseMatch {
  WaveVector k_pc;
  double mismatch = 0.0;   // | |k_pc| - |k_P| | / |k_P|
};

/// k_PC = k_C - k_P + k_A.
PhaseMatch phase_match(const WaveVector& k_C, const WaveVector& k_P, const WaveVector& k_A);

/// Angle between two wave vectors, rad.
double angle_between(const WaveVector& a, const WaveVector& b);

}  // namespace slowlight
