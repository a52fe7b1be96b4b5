#include "analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "error.hpp"

namespace slowlight {

std::string_view to_string(FitModel m) {
  switch (m) {
    case FitModel::gaussian_sq: return "gaussian_sq";
    case FitModel::exponential: return "exponential";
  }
  return "?";
}

FitModel fit_model_from_string(std::string_view name) {
  if (name == "gaussian_sq") return FitModel::gaussian_sq;
  if (name == "exponential") return FitModel::exponential;
  throw InvalidArgument("unknown fit model '" + std::string(name) +
                        "' (expected gaussian_sq or exponential)");
}

namespace {

// Exponent shape in normalized time: I = A exp(-k s(t)).
double shape(FitModel model, double t) { return model == FitModel::gaussian_sq ? t * t : 2.0 * t; }

}  // namespace

double decay_model(FitModel model, double I0, double tau, double t) {
  const double x = t / tau;
  return I0 * std::exp(-shape(model, x));
}

FitResult fit_decay(std::span<const DecayPoint> points, FitModel model, const FitOptions& options) {
  if (points.size() < 3) throw InvalidArgument("fit_decay: need at least 3 points");
  double t_max = 0.0, i_max = 0.0;
  for (const auto& p : points) {
    if (!std::isfinite(p.t) || !std::isfinite(p.intensity)) {
      throw InvalidArgument("fit_decay: non-finite data");
    }
    if (p.t < 0.0) throw InvalidArgument("fit_decay: times must be >= 0");
    if (p.intensity < 0.0) throw InvalidArgument("fit_decay: intensities must be >= 0");
    t_max = std::max(t_max, p.t);
    i_max = std::max(i_max, p.intensity);
  }
  const double t_min = std::min_element(points.begin(), points.end(), [](auto& a, auto& b) {
                         return a.t < b.t;
                       })->t;
  if (!(t_max > t_min)) throw InvalidArgument("fit_decay: need at least two distinct times");
  if (!(i_max > 0.0)) throw InvalidArgument("fit_decay: all intensities are zero");

  const std::size_t n = points.size();
  std::vector<double> s(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = shape(model, points[i].t / t_max);
    y[i] = points[i].intensity / i_max;
  }

  // Log-linear start on the strictly positive points.
  double A = 1.0, k = 0.0;
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (y[i] <= 0.0) continue;
      const double ly = std::log(y[i]);
      sx += s[i];
      sy += ly;
      sxx += s[i] * s[i];
      sxy += s[i] * ly;
      ++m;
    }
    const double den = m * sxx - sx * sx;
    if (m >= 2 && den > 1e-14 * std::max(1.0, m * sxx)) {
      const double slope = (m * sxy - sx * sy) / den;
      k = std::max(0.0, -slope);
      A = std::exp((sy + k * sx) / m);
    } else {
      A = 1.0;
      k = 1.0;
    }
  }

  auto sse = [&](double a, double kk) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = a * std::exp(-kk * s[i]) - y[i];
      acc += r * r;
    }
    return acc;
  };

  FitResult out;
  out.model = model;
  out.n_points = static_cast<int>(n);
  double f = sse(A, k);
  for (int it = 1; it <= options.max_iterations; ++it) {
    out.iterations = it;
    double jaa = 0, jak = 0, jkk = 0, ga = 0, gk = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::exp(-k * s[i]);
      const double r = A * e - y[i];
      const double da = e;
      const double dk = -A * s[i] * e;
      jaa += da * da;
      jak += da * dk;
      jkk += dk * dk;
      ga += da * r;
      gk += dk * r;
    }
    const double det = jaa * jkk - jak * jak;
    double stepA, stepK;
    if (std::abs(det) > 1e-300 && jkk > 0.0) {
      stepA = -(jkk * ga - jak * gk) / det;
      stepK = -(jaa * gk - jak * ga) / det;
    } else {
      // Rate direction degenerate: refine the amplitude alone.
      stepA = jaa > 0.0 ? -ga / jaa : 0.0;
      stepK = 0.0;
    }

    double alpha = 1.0;
    bool accepted = false;
    double nA = A, nK = k, nf = f;
    for (int h = 0; h < 60; ++h, alpha *= 0.5) {
      nA = A + alpha * stepA;
      nK = std::max(0.0, k + alpha * stepK);
      nf = sse(nA, nK);
      if (nf <= f) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No descent along the Gauss-Newton direction: numerically at the minimum.
      out.converged = true;
      break;
    }
    const double rel = std::hypot(nA - A, nK - k) / std::max(std::hypot(nA, nK), 1e-300);
    A = nA;
    k = nK;
    f = nf;
    if (rel < options.tolerance) {
      out.converged = true;
      break;
    }
  }

  out.I0 = A * i_max;
  out.rms_residual = std::sqrt(f / static_cast<double>(n));
  const double cap = options.tau_cap_factor * t_max;
  double tau = std::numeric_limits<double>::infinity();
  if (k > 0.0) tau = model == FitModel::gaussian_sq ? t_max / std::sqrt(k) : t_max / k;
  if (!(tau < cap)) {
    tau = cap;
    out.decaying = false;
  }
  out.tau = tau;
  return out;
}

double temporal_centroid(std::span<const double> t, std::span<const double> intensity,
                         double noise_floor) {
  if (t.size() != intensity.size() || t.size() < 2) {
    throw InvalidArgument("temporal_centroid: need matching series of length >= 2");
  }
  const double peak = *std::max_element(intensity.begin(), intensity.end());
  if (!(peak > noise_floor)) throw NumericError("group_delay: no peak above the noise floor");
  int regions = 0;
  bool above = false;
  for (double v : intensity) {
    const bool now = v >= 0.5 * peak;
    if (now && !above) ++regions;
    above = now;
  }
  if (regions > 1) throw NumericError("group_delay: multiple comparable peaks");

  double num = 0.0, den = 0.0;
  const std::size_t n = t.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = i == 0 ? t[0] : 0.5 * (t[i - 1] + t[i]);
    const double hi = i + 1 == n ? t[n - 1] : 0.5 * (t[i] + t[i + 1]);
    const double w = (hi - lo) * intensity[i];
    num += w * t[i];
    den += w;
  }
  return num / den;
}

double group_delay(const DetectorTrace& trace, const DetectorTrace& reference, double noise_floor) {
  return temporal_centroid(trace.t, trace.fwd, noise_floor) -
         temporal_centroid(reference.t, reference.fwd, noise_floor);
}

WaveVector WaveVector::from(double magnitude, std::array<double, 3> direction) {
  const double n = std::sqrt(direction[0] * direction[0] + direction[1] * direction[1] +
                             direction[2] * direction[2]);
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("WaveVector: zero direction");
  return {{magnitude * direction[0] / n, magnitude * direction[1] / n, magnitude * direction[2] / n}};
}

double WaveVector::magnitude() const { return std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]); }

std::array<double, 3> WaveVector::direction() const {
  const double n = magnitude();
  if (!(n > 0.0)) throw InvalidArgument("WaveVector: zero vector has no direction");
  return {k[0] / n, k[1] / n, k[2] / n};
}

WaveVector WaveVector::operator+(const WaveVector& o) const {
  return {{k[0] + o.k[0], k[1] + o.k[1], k[2] + o.k[2]}};
}
WaveVector WaveVector::operator-(const WaveVector& o) const {
  return {{k[0] - o.k[0], k[1] - o.k[1], k[2] - o.k[2]}};
}
WaveVector WaveVector::operator*(double s) const { return {{k[0] * s, k[1] * s, k[2] * s}}; }

PhaseMatch phase_match(const WaveVector& k_C, const WaveVector& k_P, const WaveVector& k_A) {
  for (const WaveVector* v : {&k_C, &k_P, &k_A}) {
    for (double x : v->k) {
      if (!std::isfinite(x)) throw InvalidArgument("phase_match: non-finite wave vector");
    }
  }
  const double kp = k_P.magnitude();
  if (!(kp > 0.0)) throw InvalidArgument("phase_match: |k_P| must be > 0");
  PhaseMatch r;
  r.k_pc = k_C - k_P + k_A;
  r.mismatch = std::abs(r.k_pc.magnitude() - kp) / kp;
  return r;
}

double angle_between(const WaveVector& a, const WaveVector& b) {
  const auto u = a.direction();
  const auto v = b.direction();
  // atan2 form stays accurate for nearly (anti)parallel vectors.
  const double cx = u[1] * v[2] - u[2] * v[1];
  const double cy = u[2] * v[0] - u[0] * v[2];
  const double cz = u[0] * v[1] - u[1] * v[0];
  const double dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
  return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
}

}  // namespace slowlight
