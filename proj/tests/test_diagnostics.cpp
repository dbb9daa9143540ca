#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "helpers.hpp"

using namespace pens;
using testing_helpers::max_abs_diff;
using testing_helpers::random_band_limited;

namespace {

constexpr double pi = std::numbers::pi;

const Grid& torus16() {
  static const Grid g(2, 16, 2 * pi);
  return g;
}

RealField sine_x1(const Grid& g) {
  return sample_scalar(g, [](const auto& x) { return std::sin(x[0]); });
}

SimState taylor_green(const Grid& g) {
  SimState s(g);
  s.v = sample_vector(g, [](const auto& x) {
    return std::array<double, 3>{std::sin(x[0]) * std::cos(x[1]), -std::cos(x[0]) * std::sin(x[1]), 0.0};
  });
  s.u = s.v;
  for (auto& r : s.rho.values()) r = 1.0;
  return s;
}

TimeSeries series_of(const std::vector<double>& t, const std::vector<double>& e, const std::vector<double>& d) {
  TimeSeries s;
  for (std::size_t i = 0; i < t.size(); ++i) s.add_sample(t[i], {{"E", e[i]}, {"D", d[i]}});
  return s;
}

}  // namespace

TEST(LpNorm, Examples) {
  const Grid& g = torus16();
  const RealField zero(g, 2);
  for (Lp p : {Lp::one, Lp::two, Lp::inf}) EXPECT_EQ(lp_norm(zero, p), 0.0);
  const RealField s = sine_x1(g);
  EXPECT_NEAR(lp_norm(s, Lp::two), pi * std::sqrt(2.0), 1e-12);
  EXPECT_DOUBLE_EQ(lp_norm(s, Lp::inf), 1.0);
  // grid sum of |sin(pi j / 8)| over j = 0..15 is 2 cot(pi/16)
  EXPECT_NEAR(lp_norm(s, Lp::one), 2 * pi * (pi / 8) * 2 / std::tan(pi / 16), 1e-12);
}

TEST(SobolevNorm, Examples) {
  const Grid& g = torus16();
  const RealField s = sine_x1(g);
  const double l2 = lp_norm(s, Lp::two);
  for (double order : {-1.5, -0.5, 0.0, 0.7, 2.0, 3.5}) {
    EXPECT_NEAR(sobolev_norm(s, order, true), l2, 1e-12) << order;
  }
  EXPECT_NEAR(sobolev_norm(s, 0.0, false), l2, 1e-13 * l2);
  EXPECT_NEAR(sobolev_norm(s, 1.0, false), 2 * pi, 1e-12);
}

TEST(SobolevNorm, NegativeHomogeneousNeedsMeanZero) {
  const Grid& g = torus16();
  const RealField f = sample_scalar(g, [](const auto& x) { return 2.0 + std::sin(x[0]); });
  EXPECT_THROW(sobolev_norm(f, -0.5, true), Error);
  EXPECT_NO_THROW(sobolev_norm(f, -0.5, false));
}

TEST(SobolevNorm, MonotoneAndInterpolation) {
  const Grid g(2, 32, 9.0);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const RealField f = random_band_limited(g, 1, seed);
    const SpectralField h = to_spectral(f);
    double prev = 0.0;
    for (double s : {-1.0, 0.0, 0.5, 1.0, 2.0}) {
      const double v = sobolev_norm(h, s, false);
      EXPECT_GE(v, prev);
      prev = v;
    }
    const double h1 = sobolev_norm(h, 1.0, true);
    const double h2 = sobolev_norm(h, 2.0, true);
    const double l2 = sobolev_norm(h, 0.0, true);
    EXPECT_LE(h1, std::sqrt(h2 * l2) * (1.0 + 1e-10));
  }
}

TEST(FourierL1, Examples) {
  const Grid& g = torus16();
  EXPECT_EQ(fourier_l1(RealField(g, 1), 0.0), 0.0);
  // |f^| = pi on the two modes, dxi = 1
  EXPECT_NEAR(fourier_l1(sine_x1(g), 0.0), 2 * pi, 1e-12);
}

TEST(FourierL1, GaussianMatchesRadialQuadrature) {
  const Grid g(2, 256, 64 * pi);
  const double c = 0.5 * g.length();
  const RealField f = sample_scalar(g, [&](const auto& x) {
    const double r2 = (x[0] - c) * (x[0] - c) + (x[1] - c) * (x[1] - c);
    return std::exp(-0.5 * r2);
  });
  // f^(xi) has modulus exp(-|xi|^2 / 2); int_{R^2} |xi| exp(-|xi|^2/2) dxi in polar form
  auto integrand = [](double r) { return 2 * pi * r * r * std::exp(-0.5 * r * r); };
  const double oracle = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, INFINITY, 15, 1e-12);
  EXPECT_NEAR(fourier_l1(f, 1.0) / oracle, 1.0, 0.01);
}

TEST(Energy, Examples) {
  const Grid& g = torus16();
  const SimState zero(g);
  EXPECT_EQ(energy(zero), 0.0);
  EXPECT_EQ(dissipation(zero), 0.0);

  const double a = 0.3;
  SimState s(g);
  s.v = sample_vector(g, [&](const auto& x) { return std::array<double, 3>{0.0, a * std::sin(x[0]), 0.0}; });
  EXPECT_NEAR(energy(s), pi * pi * a * a, 1e-12);
  EXPECT_NEAR(dissipation(s), 2 * pi * pi * a * a, 1e-12);

  // u = v: only the viscous part is left
  SimState t = s;
  for (auto& r : t.rho.values()) r = 0.7;
  t.u = t.v;
  EXPECT_NEAR(dissipation(t), 2 * pi * pi * a * a, 1e-12);
}

TEST(Energy, NonNegativeOnRandomStates) {
  const Grid g(2, 16, 5.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SimState s(g);
    s.rho = random_band_limited(g, 1, seed);
    for (auto& r : s.rho.values()) r = std::abs(r);
    s.u = random_band_limited(g, 2, seed + 100);
    s.v = random_band_limited(g, 2, seed + 200);
    EXPECT_GE(energy(s), 0.0);
    EXPECT_GE(dissipation(s), 0.0);
  }
}

TEST(EnergyResidual, HeatModeIsThirdOrderPerInterval) {
  auto max_residual = [](double h) {
    std::vector<double> t, e, d;
    for (double x = 0.0; x <= 2.0 + 1e-12; x += h) {
      t.push_back(x);
      e.push_back(0.5 * std::exp(-2 * x));
      d.push_back(std::exp(-2 * x));
    }
    double m = 0.0;
    for (double r : energy_residual(series_of(t, e, d))) m = std::max(m, std::abs(r));
    return m;
  };
  const double r1 = max_residual(0.1), r2 = max_residual(0.05);
  // trapezoid error h^3/12 * |E'''| at t = 0
  EXPECT_NEAR(r1, std::pow(0.1, 3) / 12.0 * 4.0, 0.15 * r1);
  EXPECT_NEAR(r1 / r2, 8.0, 0.5);
}

TEST(EnergyResidual, ConstantEnergy) {
  const auto r = energy_residual(series_of({0, 1, 2}, {3, 3, 3}, {0, 0, 0}));
  ASSERT_EQ(r.size(), 2u);
  for (double x : r) EXPECT_EQ(x, 0.0);
  TimeSeries missing;
  missing.add_sample(0.0, {{"E", 1.0}});
  EXPECT_THROW(energy_residual(missing), Error);
}

TEST(Functionals, ZeroVelocityRun) {
  SolverConfig cfg;
  cfg.n = 16;
  cfg.length = 8 * pi;
  cfg.t_end = 1.0;
  cfg.sample_every = 0.25;
  cfg.preset = "zero-velocity";
  const RunResult r = run(cfg);
  const auto& hs_rho = r.series.channel("hs_rho");
  double sup = 0.0;
  for (double x : hs_rho) sup = std::max(sup, x * x);
  EXPECT_NEAR(functional_X(r.series, 2), sup, 1e-15 * sup);
  EXPECT_EQ(functional_D(r.series, 2), 0.0);
  for (double e : r.series.channel("E")) EXPECT_EQ(e, 0.0);
}

TEST(Functionals, SingleSample) {
  SolverConfig cfg;
  cfg.n = 16;
  cfg.length = 8 * pi;
  const SimState s = initial_data(cfg);
  TimeSeries series;
  series.add_sample(0.0, sample_channels(to_spectral(s), DiagnosticSettings::defaults(2)));
  EXPECT_EQ(functional_D(series, 2), 0.0);
  EXPECT_NEAR(functional_X(series, 2), functional_X0(series), 1e-15 * functional_X0(series));
}

TEST(StabilityMetric, Examples) {
  const Grid& g = torus16();
  SimState a(g);
  for (auto& r : a.rho.values()) r = 1.0;
  a.u = random_band_limited(g, 2, 1);
  a.v = random_band_limited(g, 2, 2);
  EXPECT_EQ(stability_metric(a, a, 0.25), 0.0);

  SimState b = a;
  const double c = 0.01;
  const RealField s = sine_x1(g);
  for (std::size_t i = 0; i < s.values().size(); ++i) b.rho.values()[i] += c * s.values()[i];
  const double l2 = lp_norm(s, Lp::two);
  EXPECT_NEAR(stability_metric(a, b, 0.3), c * c * l2 * l2, 1e-12 * c * c * l2 * l2);

  SimState b2 = a;
  for (std::size_t i = 0; i < s.values().size(); ++i) b2.rho.values()[i] += 2 * c * s.values()[i];
  b2.u += 2.0 * random_band_limited(g, 2, 9);
  SimState b1 = a;
  for (std::size_t i = 0; i < s.values().size(); ++i) b1.rho.values()[i] += c * s.values()[i];
  b1.u += random_band_limited(g, 2, 9);
  EXPECT_NEAR(stability_metric(a, b2, 0.3) / stability_metric(a, b1, 0.3), 4.0, 1e-10);
}

TEST(StabilityMetric, RejectsMassMismatchAndBadAlpha) {
  const Grid& g = torus16();
  SimState a(g), b(g);
  for (auto& r : a.rho.values()) r = 1.0;
  for (auto& r : b.rho.values()) r = 1.001;
  EXPECT_THROW(stability_metric(a, b, 0.25), Error);
  EXPECT_THROW(stability_metric(a, a, 0.5), Error);
  EXPECT_THROW(stability_metric(a, a, 0.0), Error);
}

TEST(StabilityMetric, TriangleInequalityOnRoots) {
  const Grid g(2, 16, 6.0);
  auto state = [&](std::uint64_t seed) {
    SimState s(g);
    RealField r = random_band_limited(g, 1, seed);
    SpectralField rh = to_spectral(r);
    rh.component(0)[0] = Complex{};
    s.rho = to_real(rh);
    for (auto& x : s.rho.values()) x += 3.0;
    s.u = random_band_limited(g, 2, seed + 1000);
    s.v = random_band_limited(g, 2, seed + 2000);
    return s;
  };
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const SimState a = state(3 * seed), b = state(3 * seed + 1), c = state(3 * seed + 2);
    const double ab = std::sqrt(stability_metric(a, b, 0.2));
    const double bc = std::sqrt(stability_metric(b, c, 0.2));
    const double ac = std::sqrt(stability_metric(a, c, 0.2));
    EXPECT_LE(ac, (ab + bc) * (1.0 + 1e-10));
  }
}

TEST(Pressure, ZeroFields) {
  const Grid& g = torus16();
  SimState s(g);
  for (auto& r : s.rho.values()) r = 1.0;
  EXPECT_EQ(recover_pressure(s).max_abs(), 0.0);
}

TEST(Pressure, TaylorGreen) {
  const Grid& g = torus16();
  const RealField p = recover_pressure(taylor_green(g));
  // -Lap p = div((v.grad)v) for this v gives p = (cos 2x1 + cos 2x2) / 4
  const RealField expect =
      sample_scalar(g, [](const auto& x) { return 0.25 * (std::cos(2 * x[0]) + std::cos(2 * x[1])); });
  EXPECT_LE(max_abs_diff(p.values(), expect.values()), 1e-13);
}

TEST(Pressure, ConstantForcingHasNoEffect) {
  const Grid& g = torus16();
  const SimState base = taylor_green(g);
  SimState shifted = base;
  for (auto& x : shifted.u.component(0)) x += 0.3;
  for (auto& x : shifted.u.component(1)) x -= 0.2;
  EXPECT_LE(max_abs_diff(recover_pressure(shifted).values(), recover_pressure(base).values()), 1e-14);
}

TEST(TimeSeries, Validation) {
  TimeSeries s;
  s.add_sample(0.0, {{"E", 1.0}});
  EXPECT_THROW(s.add_sample(0.0, {{"E", 1.0}}), Error);
  EXPECT_THROW(s.add_sample(1.0, {{"E", -1.0}}), Error);
  EXPECT_THROW(s.add_sample(1.0, {{"E", NAN}}), Error);
  EXPECT_THROW(s.add_sample(1.0, {{"F", 1.0}}), Error);
  EXPECT_THROW(s.add_sample(1.0, {{"E", 1.0}, {"F", 1.0}}), Error);
  EXPECT_THROW(s.channel("nope"), Error);
  s.add_sample(1.0, {{"E", 0.5}});
  EXPECT_EQ(s.size(), 2u);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e-300), "1e-300");
  for (double x : {pi, 1.0 / 3.0, 6.02214076e23, -2.5e-17}) EXPECT_EQ(std::stod(format_double(x)), x);
}
