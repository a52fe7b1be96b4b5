#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace slowlight {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Units: time in us, rates and detunings in rad/us, length in units of the
// medium length L (L = 1 unless stated otherwise).

/// Ordinary frequency in kHz to angular frequency in rad/us.
constexpr double khz_to_rad_per_us(double khz) { return 2.0 * kPi * khz * 1e-3; }

/// Homogeneous spin decay rate whose amplitude 1/e time is `t2_us`:
/// dS/dt = -(gamma_spin/2) S decays as exp(-t/T2).
constexpr double gamma_spin_from_t2(double t2_us) { return 2.0 / t2_us; }

struct MediumParams {
  double gamma_opt = 1.0;                  // optical coherence decay rate
  double gamma_spin = gamma_spin_from_t2(500.0);
  double delta_S_khz = 30.0;               // spin inhomogeneous FWHM
  double t1_opt_us = 110.0;
  double t1_spin_us = 6e7;
  double gN = 0.0;                         // g_C^2 N, rad^2/us^2
  double g_C = 1.0;                        // probe-channel coupling (forward Lambda)
  double g_A = 1.0;                        // conjugate-channel coupling (backward Lambda)
  double length = 1.0;
  double c = 100.0;                        // L per us, i.e. transit time 0.01 us
  double optical_detuning = 0.0;           // one-photon detuning of P+ and P-

  double transit_time() const { return length / c; }
  /// d = g^2 N L / (gamma_opt c); intensity transmission of a resonant
  /// two-level medium is exp(-d).
  double optical_depth() const { return gN * length / (gamma_opt * c); }
  /// Sets gN so that optical_depth() == d.
  void set_optical_depth(double d) { gN = d * gamma_opt * c / length; }
  /// Atom density N in units where excitation_number counts field and
  /// atomic excitation on the same footing.
  double density() const { return gN / (g_C * g_C); }

  /// Throws InvalidArgument naming the offending field.
  void validate() const;
};

enum class Distribution { lorentzian, gaussian, single };

std::string_view to_string(Distribution d);
/// Throws InvalidArgument for unknown names.
Distribution distribution_from_string(std::string_view name);

struct SpectralClass {
  double delta = 0.0;   // spin two-photon detuning, rad/us
  double weight = 1.0;
};

/// Discretizes the spin inhomogeneous distribution of FWHM `delta_S_khz`.
///
/// Lorentzian: equal-probability inverse-CDF sampling (bin midpoints, weight
/// 1/n) of the distribution truncated at +-10 FWHM. Gaussian: n-point
/// Gauss-Hermite quadrature, which reproduces the second moment exactly.
/// Single: the degenerate one-class ensemble, requires n = 1.
std::vector<SpectralClass> make_spectral_classes(double delta_S_khz, int n,
                                                 Distribution shape);

/// Spin dephasing time 1/(pi * delta_S), in us.
double dephasing_time(double delta_S_khz);

/// Ensemble free-induction envelope <exp(-i delta t)>.
Complex free_decay_envelope(std::span<const SpectralClass> classes, double t_us);

/// Linear probe susceptibility of the Lambda medium at probe detuning
/// `delta_p`, averaged over the spin classes.
///
///   chi = sum_j w_j (gamma_opt/2) i / [ (gamma_opt/2 - i(delta_p - Delta))
///                                       + (|Omega_C|^2/4) / (gamma_spin/2 - i(delta_p - delta_j)) ]
///
/// Normalized so that a resonant two-level medium has chi = i; a probe
/// envelope then obeys dE/dz = i (d / 2L) chi E.
Complex susceptibility(double delta_p, double omega_C, const MediumParams& m,
                       std::span<const SpectralClass> classes);

/// EIT group velocity c / (1 + gN / Omega_C^2). Returns nullopt when the
/// coupling is off (the pulse is stopped).
std::optional<double> group_velocity(const MediumParams& m, double omega_C);

}  // namespace slowlight
