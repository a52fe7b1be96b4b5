#include "medium.hpp"

#include <cmath>
#include <string>

#include "error.hpp"

namespace slowlight {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw InvalidArgument(std::string("medium: ") + name + " must be finite and > 0");
  }
}

void require_non_negative(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw InvalidArgument(std::string("medium: ") + name + " must be finite and >= 0");
  }
}

// Gauss-Hermite nodes/weights for the weight function exp(-x^2), Newton
// iteration on orthonormal Hermite polynomials.
void gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w) {
  constexpr double kPiM4 = 0.7511255444649425;  // pi^(-1/4)
  constexpr int kMaxIter = 100;
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    double pp = 0.0;
    int iter = 0;
    for (; iter < kMaxIter; ++iter) {
      double p1 = kPiM4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 3e-14 * std::max(1.0, std::abs(z))) break;
    }
    if (iter == kMaxIter) {
      throw NumericError("gauss_hermite: Newton iteration did not converge for n=" +
                         std::to_string(n));
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
}

}  // namespace

void MediumParams::validate() const {
  // Zero decay rates are accepted for lossless checks.
  require_non_negative(gamma_opt, "gamma_opt");
  require_non_negative(gamma_spin, "gamma_spin");
  require_positive(t1_opt_us, "t1_opt_us");
  require_positive(t1_spin_us, "t1_spin_us");
  require_positive(g_C, "g_C");
  require_positive(g_A, "g_A");
  require_positive(length, "length");
  require_positive(c, "c");
  if (!(delta_S_khz >= 0.0) || !std::isfinite(delta_S_khz)) {
    throw InvalidArgument("medium: delta_S_khz must be finite and >= 0");
  }
  if (!(gN >= 0.0) || !std::isfinite(gN)) {
    throw InvalidArgument("medium: gN must be finite and >= 0");
  }
  if (!std::isfinite(optical_detuning)) {
    throw InvalidArgument("medium: optical_detuning must be finite");
  }
}

std::string_view to_string(Distribution d) {
  switch (d) {
    case Distribution::lorentzian: return "lorentzian";
    case Distribution::gaussian: return "gaussian";
    case Distribution::single: return "single";
  }
  return "?";
}

Distribution distribution_from_string(std::string_view name) {
  if (name == "lorentzian") return Distribution::lorentzian;
  if (name == "gaussian") return Distribution::gaussian;
  if (name == "single") return Distribution::single;
  throw InvalidArgument("unknown distribution '" + std::string(name) + "'");
}

std::vector<SpectralClass> make_spectral_classes(double delta_S_khz, int n,
                                                 Distribution shape) {
  if (n < 1) throw InvalidArgument("make_spectral_classes: n must be >= 1");
  if (!(delta_S_khz >= 0.0) || !std::isfinite(delta_S_khz)) {
    throw InvalidArgument("make_spectral_classes: delta_S must be >= 0");
  }
  if (shape == Distribution::single) {
    if (n != 1) throw InvalidArgument("make_spectral_classes: shape=single requires n=1");
    return {SpectralClass{0.0, 1.0}};
  }

  std::vector<SpectralClass> classes(n);
  const double fwhm = khz_to_rad_per_us(delta_S_khz);

  if (shape == Distribution::lorentzian) {
    const double hwhm = 0.5 * fwhm;
    // Support truncated at +-10 FWHM = +-20 HWHM.
    const double mass = (2.0 / kPi) * std::atan(20.0);
    for (int i = 0; i < n; ++i) {
      const double u = (i + 0.5) / n - 0.5;
      classes[i].delta = hwhm * std::tan(kPi * mass * u);
      classes[i].weight = 1.0 / n;
    }
    // Enforce exact antisymmetry of the detunings.
    for (int i = 0; i < n / 2; ++i) {
      const double d = 0.5 * (classes[n - 1 - i].delta - classes[i].delta);
      classes[i].delta = -d;
      classes[n - 1 - i].delta = d;
    }
    if (n % 2 == 1) classes[n / 2].delta = 0.0;
    return classes;
  }

  std::vector<double> x, w;
  gauss_hermite(n, x, w);
  const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += w[i];
  // Nodes come out descending; store ascending.
  for (int i = 0; i < n; ++i) {
    classes[i].delta = -std::sqrt(2.0) * sigma * x[i];
    classes[i].weight = w[i] / total;
  }
  if (n % 2 == 1) classes[n / 2].delta = 0.0;
  return classes;
}

double dephasing_time(double delta_S_khz) {
  if (!(delta_S_khz > 0.0) || !std::isfinite(delta_S_khz)) {
    throw InvalidArgument("dephasing_time: width must be > 0");
  }
  // 1/(pi * kHz) = 1e3/pi us.
  return 1e3 / (kPi * delta_S_khz);
}

Complex free_decay_envelope(std::span<const SpectralClass> classes, double t_us) {
  Complex sum{0.0, 0.0};
  for (const auto& c : classes) sum += c.weight * std::polar(1.0, -c.delta * t_us);
  return sum;
}

Complex susceptibility(double delta_p, double omega_C, const MediumParams& m,
                       std::span<const SpectralClass> classes) {
  if (!(omega_C >= 0.0)) throw InvalidArgument("susceptibility: omega_C must be >= 0");
  constexpr Complex I{0.0, 1.0};
  const double half_opt = 0.5 * m.gamma_opt;
  const double coupling = 0.25 * omega_C * omega_C;
  const Complex optical = Complex(half_opt, -(delta_p - m.optical_detuning));
  Complex chi{0.0, 0.0};
  for (const auto& c : classes) {
    const Complex spin(0.5 * m.gamma_spin, -(delta_p - c.delta));
    Complex denom = optical;
    if (coupling > 0.0) {
      if (spin == Complex{0.0, 0.0}) continue;  // exact two-photon resonance: dark
      denom += coupling / spin;
    }
    chi += c.weight * half_opt * I / denom;
  }
  return chi;
}

std::optional<double> group_velocity(const MediumParams& m, double omega_C) {
  if (!(omega_C > 0.0)) return std::nullopt;
  return m.c / (1.0 + m.gN / (omega_C * omega_C));
}

}  // namespace slowlight
