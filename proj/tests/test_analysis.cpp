#include <doctest.h>

#include "approx.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "analysis.hpp"
#include "error.hpp"

using namespace slowlight;

namespace {

std::vector<DecayPoint> synth(FitModel model, double I0, double tau, std::vector<double> t) {
  std::vector<DecayPoint> pts;
  for (double x : t) pts.push_back({x, decay_model(model, I0, tau, x)});
  return pts;
}

DetectorTrace gaussian_trace(double centre, double width, double t_end = 100.0, double dt = 0.01) {
  DetectorTrace tr;
  tr.dt = dt;
  const int n = static_cast<int>(std::lround(t_end / dt)) + 1;
  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    const double x = (t - centre) / width;
    tr.t.push_back(t);
    tr.fwd.push_back(std::exp(-x * x));
    tr.bwd.push_back(0.0);
    tr.spin.push_back(0.0);
  }
  return tr;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("decay law values") {
  CHECK(decay_model(FitModel::gaussian_sq, 2.0, 10.0, 10.0) == rel(2.0 * std::exp(-1.0)));
  CHECK(decay_model(FitModel::exponential, 2.0, 10.0, 10.0) == rel(2.0 * std::exp(-2.0)));
  CHECK(decay_model(FitModel::exponential, 3.0, 5.0, 0.0) == 3.0);
  CHECK(fit_model_from_string("exponential") == FitModel::exponential);
  CHECK(to_string(FitModel::gaussian_sq) == "gaussian_sq");
  CHECK_THROWS_AS(fit_model_from_string("linear"), InvalidArgument);
}

TEST_CASE("noiseless synthetic data recovers the generating tau") {
  for (FitModel m : {FitModel::gaussian_sq, FitModel::exponential}) {
    const FitResult r = fit_decay(synth(m, 1.0, 11.0, {0, 5, 10, 15, 20}), m);
    CHECK(std::abs(r.tau - 11.0) < 0.01);
    CHECK(r.I0 == rel(1.0).epsilon(1e-6));
    CHECK(r.converged);
    CHECK(r.decaying);
    CHECK(r.n_points == 5);
    CHECK(r.rms_residual < 1e-8);
  }
}

TEST_CASE("constant data is flagged as non-decaying") {
  std::vector<DecayPoint> pts{{0, 2.0}, {5, 2.0}, {10, 2.0}, {20, 2.0}};
  const FitResult r = fit_decay(pts, FitModel::gaussian_sq);
  CHECK_FALSE(r.decaying);
  CHECK(std::isfinite(r.tau));
  CHECK(r.tau == rel(20.0 * FitOptions{}.tau_cap_factor));
  CHECK(r.I0 == rel(2.0).epsilon(1e-9));
}

TEST_CASE("fit properties on noisy data") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> tau_dist(2.0, 50.0), noise(-0.03, 0.03), amp(0.1, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    const FitModel m = trial % 2 ? FitModel::exponential : FitModel::gaussian_sq;
    const double tau = tau_dist(rng);
    std::vector<DecayPoint> pts;
    for (int i = 0; i < 8; ++i) {
      const double t = 0.25 * tau * i;
      pts.push_back({t, decay_model(m, 1.0, tau, t) * (1.0 + noise(rng))});
    }
    const FitResult a = fit_decay(pts, m);
    REQUIRE(a.converged);

    // Idempotence: refitting the fitted curve gives the same parameters.
    std::vector<DecayPoint> model_pts;
    for (const auto& p : pts) model_pts.push_back({p.t, decay_model(m, a.I0, a.tau, p.t)});
    const FitResult b = fit_decay(model_pts, m);
    CHECK(b.tau == rel(a.tau).epsilon(1e-6));
    CHECK(b.I0 == rel(a.I0).epsilon(1e-6));

    // Intensity scale: tau unchanged, I0 scales.
    const double s = amp(rng);
    std::vector<DecayPoint> scaled = pts;
    for (auto& p : scaled) p.intensity *= s;
    const FitResult c = fit_decay(scaled, m);
    CHECK(c.tau == rel(a.tau).epsilon(1e-8));
    CHECK(c.I0 == rel(s * a.I0).epsilon(1e-8));

    // Time scale: tau scales with t.
    std::vector<DecayPoint> stretched = pts;
    for (auto& p : stretched) p.t *= s;
    const FitResult d = fit_decay(stretched, m);
    CHECK(d.tau == rel(s * a.tau).epsilon(1e-8));
    CHECK(d.I0 == rel(a.I0).epsilon(1e-8));
  }
}

TEST_CASE("fit input errors") {
  using P = std::vector<DecayPoint>;
  CHECK_THROWS_AS(fit_decay(P{{0, 1}, {1, 0.5}}, FitModel::gaussian_sq), InvalidArgument);
  CHECK_THROWS_AS(fit_decay(P{{0, 1}, {-1, 0.5}, {2, 0.1}}, FitModel::gaussian_sq), InvalidArgument);
  CHECK_THROWS_AS(fit_decay(P{{0, 1}, {1, -0.5}, {2, 0.1}}, FitModel::gaussian_sq), InvalidArgument);
  CHECK_THROWS_AS(fit_decay(P{{1, 1}, {1, 0.5}, {1, 0.1}}, FitModel::gaussian_sq), InvalidArgument);
  CHECK_THROWS_AS(fit_decay(P{{0, 0}, {1, 0}, {2, 0}}, FitModel::gaussian_sq), InvalidArgument);
  CHECK_THROWS_AS(fit_decay(P{{0, 1}, {1, NAN}, {2, 0.1}}, FitModel::gaussian_sq), InvalidArgument);
}

TEST_CASE("group delay") {
  const DetectorTrace ref = gaussian_trace(30.0, 4.0);
  CHECK(std::abs(group_delay(ref, ref)) < 1e-12);
  CHECK(group_delay(gaussian_trace(37.0, 4.0), ref) == rel(7.0).epsilon(1e-6));
  CHECK(group_delay(gaussian_trace(37.0, 2.0), ref) == rel(7.0).epsilon(1e-6));

  DetectorTrace two = ref;
  const DetectorTrace other = gaussian_trace(70.0, 4.0);
  for (std::size_t i = 0; i < two.size(); ++i) two.fwd[i] += other.fwd[i];
  CHECK_THROWS_AS(group_delay(two, ref), NumericError);

  DetectorTrace dark = ref;
  for (auto& v : dark.fwd) v = 0.0;
  CHECK_THROWS_AS(group_delay(dark, ref), NumericError);
  CHECK_THROWS_AS(group_delay(ref, dark), NumericError);
}

TEST_CASE("phase matching") {
  const double k = 1.0;
  const double theta = 0.025;
  const WaveVector kP = WaveVector::from(k, {0, 0, 1});
  const WaveVector kC = WaveVector::from(k, {std::sin(theta), 0, std::cos(theta)});

  SUBCASE("counter-propagating A reflects the probe") {
    const PhaseMatch m = phase_match(kC, kP, kC * -1.0);
    CHECK(angle_between(m.k_pc, kP * -1.0) < 1e-12);
    CHECK(m.mismatch < 1e-12);
  }
  SUBCASE("A antiparallel to the probe, C tilted") {
    const PhaseMatch m = phase_match(kC, kP, kP * -1.0);
    CHECK(angle_between(m.k_pc, kP * -1.0) <= 0.025);
    CHECK(m.mismatch < 1e-3);
  }
  SUBCASE("linearity") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    auto rv = [&] { return WaveVector{{g(rng), g(rng), g(rng)}}; };
    for (int i = 0; i < 100; ++i) {
      const WaveVector c1 = rv(), p1 = rv(), a1 = rv(), c2 = rv(), p2 = rv(), a2 = rv();
      const double s = g(rng);
      const WaveVector lhs = phase_match(c1 + c2 * s, p1 + p2 * s, a1 + a2 * s).k_pc;
      const WaveVector rhs = phase_match(c1, p1, a1).k_pc + phase_match(c2, p2, a2).k_pc * s;
      for (int j = 0; j < 3; ++j) CHECK(std::abs(lhs.k[j] - rhs.k[j]) < 1e-12);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(phase_match(kC, WaveVector{}, kC), InvalidArgument);
    CHECK_THROWS_AS(phase_match(WaveVector{{NAN, 0, 0}}, kP, kC), InvalidArgument);
    CHECK_THROWS_AS(WaveVector{}.direction(), InvalidArgument);
  }
  CHECK(angle_between(kP, kC) == rel(theta).epsilon(1e-12));
  CHECK(kC.magnitude() == rel(1.0));
}

}  // TEST_SUITE
