// Acceptance run: one PASS/FAIL line per criterion. Optional arguments pick criteria by number.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include "pens/pens.hpp"

using namespace pens;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double max_modulus(const SpectralField& f) {
  double m = 0.0;
  for (const auto& z : f.values()) m = std::max(m, std::abs(z));
  return m;
}

double fitted(const TimeSeries& s, const std::string& ch, double t0, double t1) {
  return fit_power_law(s.times(), s.channel(ch), t0, t1).exponent;
}

// 1. heat rate of v in the linear regime
Outcome heat_rate() {
  SolverConfig cfg;
  cfg.n = 512;
  cfg.length = 256 * pi;
  cfg.preset = "heat-only";
  cfg.t_end = 1500;
  cfg.dt_max = 1.5;
  cfg.sample_every = 10;
  const TimeSeries s = run(cfg).series;
  const double e0 = fitted(s, "l2_v", 50, 1500);
  const double e1 = fitted(s, "hk_v_1", 50, 1500);
  const double e2 = fitted(s, "hk_v_2", 50, 1500);
  const bool ok = std::abs(e0 + 0.5) <= 0.05 && std::abs(e1 + 1.0) <= 0.10 && std::abs(e2 + 1.5) <= 0.15;
  return {ok, fmt("|v| %.4f (-0.5+-0.05), |grad v| %.4f (-1+-0.1), |Lap v| %.4f (-1.5+-0.15), dt=1.5", e0, e1, e2)};
}

// 2. continuous heat envelope
Outcome envelope() {
  std::vector<double> t;
  for (int i = 0; i <= 40; ++i) t.push_back(1e2 * std::pow(100.0, i / 40.0));
  double worst_slope = 0.0, worst_closed = 0.0;
  for (int d : {2, 3}) {
    for (int k : {0, 1, 2}) {
      std::vector<double> y;
      for (double x : t) y.push_back(heat_envelope("gaussian", d, k, x));
      const double slope = fit_power_law(t, y, 1e2, 1e4).exponent;
      worst_slope = std::max(worst_slope, std::abs(slope + 0.25 * d + 0.5 * k));
      if (d == 2 && k == 0) {
        for (std::size_t i = 0; i < t.size(); ++i) {
          const double exact = std::sqrt(pi / (1 + 2 * t[i]));
          worst_closed = std::max(worst_closed, std::abs(y[i] / exact - 1.0));
        }
      }
    }
  }
  return {worst_slope <= 0.01 && worst_closed <= 1e-6,
          fmt("max slope error %.2e (<=0.01), closed-form rel error %.2e (<=1e-6)", worst_slope, worst_closed)};
}

// 3 and 8 share the coupled-small run.
const TimeSeries& coupled_run() {
  static const TimeSeries series = [] {
    SolverConfig cfg;
    cfg.n = 256;
    cfg.length = 128 * pi;
    cfg.preset = "coupled-small";
    cfg.epsilon = 1e-2;
    cfg.t_end = 400;
    cfg.dt_max = 0.25;
    cfg.sample_every = 1;
    return run(cfg).series;
  }();
  return series;
}

Outcome decay_gap() {
  const TimeSeries& s = coupled_run();
  const double ev = fitted(s, "l2_v", 20, 400);
  const double eu = fitted(s, "l2_u", 20, 400);
  const double ew = fitted(s, "l2_umv", 20, 400);
  const bool ok = std::abs(ev + 0.5) <= 0.1 && std::abs(eu + 0.5) <= 0.1 && ew <= -1.3 && ew - ev <= -0.8;
  return {ok, fmt("|v| %.4f, |u| %.4f (-0.5+-0.1), |u-v| %.4f (<=-1.3), gap %.4f (<=-0.8)", ev, eu, ew, ew - ev)};
}

// 4. energy identity; residuals are taken per step (sample_every = dt).
Outcome energy_identity() {
  auto residuals = [](double dt) {
    SolverConfig cfg;
    cfg.n = 128;
    cfg.preset = "coupled-small";
    cfg.t_end = 10;
    cfg.dt_max = dt;
    cfg.sample_every = dt;
    const TimeSeries s = run(cfg).series;
    const auto r = energy_residual(s);
    double raw = 0.0, rate = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      raw = std::max(raw, std::abs(r[i]));
      rate = std::max(rate, std::abs(r[i]) / (s.times()[i + 1] - s.times()[i]));
    }
    bool monotone = true;
    const auto& e = s.channel("E");
    for (std::size_t i = 1; i < e.size(); ++i) monotone = monotone && e[i] <= e[i - 1];
    return std::tuple{raw, rate, monotone};
  };
  const auto [raw1, rate1, mono1] = residuals(0.2);
  const auto [raw2, rate2, mono2] = residuals(0.1);
  bool mono3 = true;
  const auto& e = coupled_run().channel("E");
  for (std::size_t i = 1; i < e.size(); ++i) mono3 = mono3 && e[i] <= e[i - 1];
  const double factor = rate1 / rate2;
  const bool ok = factor >= 3.2 && factor <= 4.8 && mono1 && mono2 && mono3;
  return {ok, fmt("max|R_n|/dt factor %.3f in [3.2,4.8] (raw max|R_n| factor %.3f), E non-increasing %s", factor,
                  raw1 / raw2, mono1 && mono2 && mono3 ? "yes" : "no")};
}

// 5. stepper against the Picard oracle
Outcome oracle() {
  SolverConfig cfg;
  cfg.n = 64;
  cfg.preset = "coupled-small";
  cfg.epsilon = 1e-2;
  cfg.t_end = 1;
  cfg.dt_max = 0.05;
  cfg.sample_every = 0.05;
  const SimState init = initial_data(cfg);
  const PicardResult pic = picard_solve(init, 1.0, 0.05, 1e-13, 40);
  const SimState fin = run(cfg, init, {}).final_state;
  const SpectralField vs = to_spectral(fin.v);
  const double dev =
      sobolev_norm(vs - pic.trajectory.v.back(), 0.0, false) / sobolev_norm(pic.trajectory.v.back(), 0.0, false);
  double worst = 0.0;
  for (double r : pic.ratios) worst = std::max(worst, r);
  const bool ok = pic.converged && dev <= 1e-4 && worst < 0.5;
  return {ok, fmt("rel L2 deviation of v at t=1 %.3e (<=1e-4), max contraction ratio %.3e (<0.5), %zu iterates", dev,
                  worst, pic.distances.size())};
}

// 6. structural invariants over 100 seeds
Outcome invariants() {
  double plancherel = 0, leray = 0, divergence_err = 0, mass = 0;
  bool roundtrip = true;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const int d = seed % 2 ? 3 : 2;
    const Grid g(d, d == 2 ? 32 : 16, 5.0 + static_cast<double>(seed % 7));
    RealField f(g, d);
    for (auto& x : f.values()) x = uni(rng);
    const SpectralField h = to_spectral(f);
    const double l2 = lp_norm(f, Lp::two);
    plancherel = std::max(plancherel, std::abs(l2 - sobolev_norm(h, 0.0, false)) / l2);
    const SpectralField p = leray_project(h);
    leray = std::max(leray, max_modulus(leray_project(p) - p) / max_modulus(h));
    divergence_err = std::max(divergence_err, sobolev_norm(divergence(p), 0.0, false) / l2);

    // short coupled run on a resolved grid
    SolverConfig cfg;
    cfg.d = d;
    cfg.n = d == 2 ? 32 : 16;
    cfg.length = d == 2 ? 16 * pi : 8 * pi;
    cfg.preset = "coupled-random";
    cfg.epsilon = 1e-2;
    cfg.seed = seed;
    cfg.t_end = 0.5;
    cfg.sample_every = 0.25;
    cfg.dt_max = 0.05;
    const RunResult res = run(cfg);
    const auto& m = res.series.channel("mass");
    for (double x : m) mass = std::max(mass, std::abs(x - m.front()) / m.front());

    const SimState back = decode_snapshot(encode_snapshot(res.final_state), d);
    roundtrip = roundtrip && back.t == res.final_state.t &&
                std::equal(back.rho.values().begin(), back.rho.values().end(), res.final_state.rho.values().begin()) &&
                std::equal(back.u.values().begin(), back.u.values().end(), res.final_state.u.values().begin()) &&
                std::equal(back.v.values().begin(), back.v.values().end(), res.final_state.v.values().begin());
    const TimeSeries csv = parse_timeseries(timeseries_csv(res.series));
    roundtrip = roundtrip && csv.times() == res.series.times();
    for (const auto& [name, values] : res.series.channels()) roundtrip = roundtrip && csv.channel(name) == values;
  }
  const bool ok = plancherel <= 1e-12 && leray <= 1e-14 && divergence_err <= 1e-12 && mass <= 1e-12 && roundtrip;
  return {ok, fmt("plancherel %.1e, leray %.1e, div %.1e, mass %.1e, snapshot/csv bit-exact %s", plancherel, leray,
                  divergence_err, mass, roundtrip ? "yes" : "no")};
}

// 7. linear stability scaling
Outcome stability() {
  const Grid g(2, 64, 32 * pi);
  const SimState base = initial_data("coupled-small", g, 1e-2);
  // g: smooth, mean-zero density part, divergence-free v part
  const RealField gr = sample_scalar(g, [](const auto& x) { return std::cos(x[0] / 16.0) * std::sin(x[1] / 16.0); });
  const RealField gu = sample_vector(g, [](const auto& x) {
    return std::array<double, 3>{std::sin(x[1] / 16.0), std::cos(x[0] / 16.0), 0.0};
  });
  const RealField gv = sample_vector(g, [](const auto& x) {
    return std::array<double, 3>{std::sin(x[1] / 16.0), std::sin(x[0] / 16.0), 0.0};
  });
  SolverConfig cfg;
  cfg.n = 64;
  cfg.length = 32 * pi;
  cfg.t_end = 1;
  cfg.sample_every = 1;
  cfg.dt_max = 0.05;
  auto evolve = [&](double delta) {
    SimState s = base;
    s.rho += delta * gr;
    s.u += delta * gu;
    s.v += delta * gv;
    return run(cfg, s, {}).final_state;
  };
  const SimState ref = evolve(0.0);
  const double alpha = 0.25;
  const double a = std::sqrt(stability_metric(evolve(1e-4), ref, alpha));
  const double b = std::sqrt(stability_metric(evolve(5e-5), ref, alpha));
  const double ratio = a / b;
  return {ratio >= 1.8 && ratio <= 2.2, fmt("sqrt metric ratio at t=1 %.5f in [1.8,2.2]", ratio)};
}

// 8. weighted energy plateau
Outcome weighted_energy() {
  const TimeSeries& s = coupled_run();
  const int d = 2;
  const WeightedEnergy w = check_weighted_energy(s, 0.5 * d - 0.1, d);
  const double t_end = s.times().back();
  const double late = w.ratio_at(t_end), mid = w.ratio_at(0.5 * t_end);
  const double eE = fitted(s, "E", 20, 400);
  const bool ok = late <= 2.0 * mid && eE <= -0.9 * (0.5 * d);
  return {ok, fmt("ratio(t_end) %.4f <= 2 x ratio(t_end/2) %.4f, E exponent %.4f (<=-0.9)", late, mid, eE)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"heat-rate reproduction", heat_rate},  {"continuous envelope", envelope},
      {"coupled decay gap", decay_gap},       {"energy identity", energy_identity},
      {"oracle equivalence", oracle},         {"structural invariants", invariants},
      {"stability scaling", stability},       {"weighted energy", weighted_energy},
  };
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!pick.empty() && !pick.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const Error& e) {
      o = {false, std::string("error[") + to_string(e.kind()) + "]: " + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d %s: %s  %s  [%.0fs]\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.c_str(), sec);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
