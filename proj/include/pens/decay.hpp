#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pens/diagnostics.hpp"
#include "pens/error.hpp"
#include "pens/solver.hpp"

namespace pens {

/// Exact exponent arithmetic for the decay tables.
struct Rational {
  long num = 0;
  long den = 1;

  constexpr Rational() = default;
  constexpr Rational(long n, long d = 1) : num(n), den(d) { normalize(); }

  /// Nearest fraction with denominator <= 64 (exact for the quarter-integers used here).
  static Rational from_double(double x) {
    for (long d = 1; d <= 64; ++d) {
      const double n = std::round(x * static_cast<double>(d));
      if (std::abs(n / static_cast<double>(d) - x) < 1e-12) return Rational(static_cast<long>(n), d);
    }
    throw Error(ErrorKind::invalid_argument, "order " + format_double(x) + " is not a simple fraction");
  }

  constexpr void normalize() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }

  friend constexpr Rational operator+(Rational a, Rational b) { return Rational(a.num * b.den + b.num * a.den, a.den * b.den); }
  friend constexpr Rational operator-(Rational a, Rational b) { return Rational(a.num * b.den - b.num * a.den, a.den * b.den); }
  friend constexpr Rational operator*(Rational a, Rational b) { return Rational(a.num * b.num, a.den * b.den); }
  friend constexpr bool operator==(Rational a, Rational b) { return a.num == b.num && a.den == b.den; }
  friend constexpr bool operator<(Rational a, Rational b) { return a.num * b.den < b.num * a.den; }
  friend constexpr bool operator<=(Rational a, Rational b) { return !(b < a); }
};

enum class Quantity { u, v, umv, dv_inf, umv_inf, energy };

inline Quantity parse_quantity(const std::string& s) {
  if (s == "u") return Quantity::u;
  if (s == "v") return Quantity::v;
  if (s == "u-v" || s == "umv") return Quantity::umv;
  if (s == "dv_inf") return Quantity::dv_inf;
  if (s == "umv_inf") return Quantity::umv_inf;
  if (s == "E") return Quantity::energy;
  throw Error(ErrorKind::invalid_argument, "unknown decay quantity '" + s + "'");
}

/// Optimal temporal decay exponents for the coupled system:
/// ||grad^k u||, ||grad^k v|| ~ t^{-d/4-k/2}; ||grad^theta (u-v)|| ~ t^{-d/4-theta/2-1};
/// ||Lap v||_inf, ||u-v||_inf ~ t^{-d/2-1}; E ~ t^{-d/2}.
///
/// `m` is the regularity of u; it bounds the admissible orders.
inline Rational expected_exponent(Quantity q, Rational order, int d, double m) {
  const Rational dim(d);
  const Rational quarter(1, 4), half(1, 2);
  auto require = [&](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::invalid_argument, "order " + order.str() + " outside admissible range for " + what);
  };
  switch (q) {
    case Quantity::u:
    case Quantity::v:
      require(Rational(0) <= order && order.value() <= std::min(0.5 * d + 2.0, m) + 1e-12, "grad^k u / grad^k v");
      return Rational(0) - dim * quarter - order * half;
    case Quantity::umv:
      require(Rational(0) <= order && order.value() <= std::min(m - 2.0, 0.5 * d) + 1e-12, "grad^theta (u-v)");
      return Rational(0) - dim * quarter - order * half - Rational(1);
    case Quantity::dv_inf:
    case Quantity::umv_inf:
      require(order == Rational(0), "an L^inf quantity (order must be 0)");
      return Rational(0) - dim * half - Rational(1);
    case Quantity::energy:
      require(order == Rational(0), "the energy (order must be 0)");
      return Rational(0) - dim * half;
  }
  return Rational(0);
}

inline Rational expected_exponent(Quantity q, Rational order, int d) {
  return expected_exponent(q, order, d, DiagnosticSettings::defaults(d).m);
}

struct PowerLawFit {
  double exponent = 0.0;
  double log_prefactor = 0.0;
  double residual = 0.0;  // max |value / fit - 1| inside the window
  std::size_t count = 0;
};

/// Least-squares slope of log(value) against log(time) over [t0, t1].
inline PowerLawFit fit_power_law(const std::vector<double>& times, const std::vector<double>& values, double t0,
                                 double t1) {
  if (times.size() != values.size()) throw Error(ErrorKind::invalid_argument, "fit: times and values differ in length");
  if (times.empty() || !(t0 > 0.0) || !(t1 > t0) || t0 < times.front() * (1.0 - 1e-12) ||
      t1 > times.back() * (1.0 + 1e-12)) {
    throw Error(ErrorKind::window, "fit window [" + format_double(t0) + ", " + format_double(t1) +
                                       "] is not inside the data range");
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t0 * (1.0 - 1e-12) || times[i] > t1 * (1.0 + 1e-12)) continue;
    if (!(values[i] > 0.0)) throw Error(ErrorKind::invalid_argument, "fit: nonpositive value inside the window");
    x.push_back(std::log(times[i]));
    y.push_back(std::log(values[i]));
  }
  if (x.size() < 10) {
    throw Error(ErrorKind::window, "fit: window holds " + std::to_string(x.size()) + " points, need at least 10");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  fit.log_prefactor = my - fit.exponent * mx;
  fit.count = x.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double model = fit.log_prefactor + fit.exponent * x[i];
    fit.residual = std::max(fit.residual, std::abs(std::expm1(y[i] - model)));
  }
  return fit;
}

/// Running suprema of time-weighted norms.
struct DecayFunctionals {
  std::map<int, double> M_u;        // k -> sup tau^{d/4+k/2} ||grad^k u||
  std::map<int, double> M_v;
  std::map<double, double> D_theta;  // theta -> sup tau^{d/4+theta/2+1} ||grad^theta (u-v)||
  double Mtilde_v = 0.0;            // sup tau^{d/2+1} |||xi|^2 v^||_{L^1}
  double Dtilde = 0.0;              // sup tau^{d/2+1} ||(u-v)^||_{L^1}

  void update(double tau, const std::map<std::string, double>& sample, int d, double theta) {
    auto bump = [](double& slot, double value) { slot = std::max(slot, value); };
    const double base = 0.25 * d;
    for (int k : {0, 1, 2}) {
      const std::string su = k == 0 ? "l2_u" : "hk_u_" + std::to_string(k);
      const std::string sv = k == 0 ? "l2_v" : "hk_v_" + std::to_string(k);
      const double w = std::pow(tau, base + 0.5 * k);
      if (sample.count(su)) bump(M_u[k], w * sample.at(su));
      if (sample.count(sv)) bump(M_v[k], w * sample.at(sv));
    }
    if (sample.count("l2_umv")) bump(D_theta[0.0], std::pow(tau, base + 1.0) * sample.at("l2_umv"));
    const std::string th = theta_channel(theta);
    if (theta > 0.0 && sample.count(th)) bump(D_theta[theta], std::pow(tau, base + 0.5 * theta + 1.0) * sample.at(th));
    const double w2 = std::pow(tau, 0.5 * d + 1.0);
    if (sample.count("xi2_l1_v")) bump(Mtilde_v, w2 * sample.at("xi2_l1_v"));
    if (sample.count("l1hat_umv")) bump(Dtilde, w2 * sample.at("l1hat_umv"));
  }

  /// sup_k M_u^k + sup_k M_v^k + sup_theta D^theta, the bootstrap quantity.
  double bootstrap_sum() const {
    auto sup = [](const auto& m) {
      double s = 0.0;
      for (const auto& [key, value] : m) s = std::max(s, value);
      return s;
    };
    return sup(M_u) + sup(M_v) + sup(D_theta);
  }

  static DecayFunctionals from_series(const TimeSeries& series, int d, double theta) {
    DecayFunctionals f;
    for (std::size_t i = 0; i < series.size(); ++i) {
      std::map<std::string, double> sample;
      for (const auto& [name, values] : series.channels()) sample[name] = values[i];
      f.update(series.times()[i], sample, d, theta);
    }
    return f;
  }
};

struct ChannelFit {
  std::string channel;
  std::optional<double> exponent;  // empty when the channel is identically zero
  Rational expected;
  double tolerance = 0.1;
  double t0 = 0.0;
  double t1 = 0.0;
  double residual = 0.0;
  std::optional<bool> pass;
  std::string note;
};

struct DecayReport {
  std::vector<ChannelFit> fits;
  DecayFunctionals functionals;
  double t_sat = 0.0;
  double window_start = 0.0;
  double window_end = 0.0;

  const ChannelFit& fit(const std::string& channel) const {
    for (const auto& f : fits) {
      if (f.channel == channel) return f;
    }
    throw Error(ErrorKind::invalid_argument, "report has no channel '" + channel + "'");
  }
};

/// Time after which the discrete spectrum of a box of edge L stops emulating R^d.
inline double saturation_time(double length) {
  const double r = length / (2.0 * std::numbers::pi);
  return 0.1 * r * r;
}

struct ChannelSpec {
  Quantity quantity;
  Rational order;
  double tolerance;
};

/// Maps a TimeSeries channel name to the quantity whose decay it measures.
inline ChannelSpec channel_spec(const std::string& name) {
  if (name == "l2_u") return {Quantity::u, Rational(0), 0.1};
  if (name == "l2_v") return {Quantity::v, Rational(0), 0.1};
  if (name == "hk_u_1") return {Quantity::u, Rational(1), 0.1};
  if (name == "hk_v_1") return {Quantity::v, Rational(1), 0.1};
  if (name == "hk_u_2") return {Quantity::u, Rational(2), 0.15};
  if (name == "hk_v_2") return {Quantity::v, Rational(2), 0.15};
  if (name == "l2_umv") return {Quantity::umv, Rational(0), 0.15};
  if (name.rfind("htheta_umv_", 0) == 0) {
    return {Quantity::umv, Rational::from_double(std::stod(name.substr(11))), 0.15};
  }
  if (name == "linf_dv") return {Quantity::dv_inf, Rational(0), 0.15};
  if (name == "linf_umv") return {Quantity::umv_inf, Rational(0), 0.15};
  if (name == "E") return {Quantity::energy, Rational(0), 0.1};
  throw Error(ErrorKind::invalid_argument, "channel '" + name + "' has no decay law");
}

inline const std::vector<std::string>& default_decay_channels() {
  static const std::vector<std::string> names{"l2_u", "l2_v", "hk_u_1", "hk_v_1", "hk_u_2", "hk_v_2", "l2_umv", "E"};
  return names;
}

/// Fits every requested channel over [t0, t1] and compares with the exponent table.
inline DecayReport fit_decay(const TimeSeries& series, const std::vector<std::string>& channels, double t0, double t1,
                             int d, double m, double t_sat) {
  if (t1 > t_sat * (1.0 + 1e-12)) {
    throw Error(ErrorKind::window, "window end " + format_double(t1) + " exceeds saturation time " + format_double(t_sat));
  }
  if (!(t0 > 0.0) || t1 < 10.0 * t0 * (1.0 - 1e-12)) {
    throw Error(ErrorKind::window, "window [" + format_double(t0) + ", " + format_double(t1) + "] spans less than a decade");
  }
  DecayReport report;
  report.t_sat = t_sat;
  report.window_start = t0;
  report.window_end = t1;
  const double theta = std::min(m - 2.0, 0.5 * d);
  report.functionals = DecayFunctionals::from_series(series, d, theta);
  for (const auto& name : channels) {
    const ChannelSpec spec = channel_spec(name);
    ChannelFit fit;
    fit.channel = name;
    fit.expected = expected_exponent(spec.quantity, spec.order, d, m);
    fit.tolerance = spec.tolerance;
    fit.t0 = t0;
    fit.t1 = t1;
    const auto& values = series.channel(name);
    const auto& times = series.times();
    bool all_zero = true;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] >= t0 * (1.0 - 1e-12) && times[i] <= t1 * (1.0 + 1e-12) && values[i] != 0.0) all_zero = false;
    }
    if (all_zero) {
      fit.note = "identically zero, no fit";
      report.fits.push_back(fit);
      continue;
    }
    const PowerLawFit pl = fit_power_law(times, values, t0, t1);
    fit.exponent = pl.exponent;
    fit.residual = pl.residual;
    fit.pass = std::abs(pl.exponent - fit.expected.value()) <= fit.tolerance;
    if ((spec.quantity == Quantity::dv_inf || spec.quantity == Quantity::umv_inf) && m < 0.5 * d + 2.0) {
      fit.note = "outside stated hypothesis (m < d/2 + 2)";
    }
    report.fits.push_back(fit);
  }
  return report;
}

struct WindowPolicy {
  std::optional<double> start;
  std::optional<double> end;
};

struct DecayExperiment {
  RunResult run;
  DecayReport report;
};

/// Runs the solver and fits the requested channels inside the pre-saturation window.
/// Default window: [max(1, 50 dt_max), min(t_sat, t_end)].
inline DecayExperiment run_decay_experiment(const SolverConfig& cfg, const std::vector<std::string>& channels,
                                            const WindowPolicy& window = {},
                                            std::optional<DiagnosticSettings> diagnostics = std::nullopt) {
  cfg.validate();
  const double t_sat = saturation_time(cfg.length);
  const double t0 = window.start.value_or(std::max(1.0, 50.0 * cfg.dt_max));
  const double t1 = window.end.value_or(std::min(t_sat, cfg.t_end));
  if (cfg.t_end < t0) {
    throw Error(ErrorKind::window, "window collapse: t_end " + format_double(cfg.t_end) + " < window start " + format_double(t0));
  }
  const DiagnosticSettings settings = diagnostics.value_or(DiagnosticSettings::defaults(cfg.d));
  RunOptions opts;
  opts.diagnostics = settings;
  DecayExperiment out{run(cfg, opts), {}};
  out.report = fit_decay(out.run.series, channels, t0, t1, cfg.d, settings.m, t_sat);
  return out;
}

struct WeightedEnergy {
  std::vector<double> times;
  std::vector<double> ratio;  // running max of the normalized weighted energy
  double margin = 0.0;        // ratio at the last sample

  double ratio_at(double t) const {
    for (std::size_t i = times.size(); i-- > 0;) {
      if (times[i] <= t * (1.0 + 1e-12)) return ratio[i];
    }
    throw Error(ErrorKind::invalid_argument, "weighted energy: time before the first sample");
  }
};

/// max over t of [E(t)(1+t)^a + int_0^t (1+tau)^a D dtau] / (E(0) + ||v0||_{L^1}^2).
inline WeightedEnergy check_weighted_energy(const TimeSeries& series, double alpha, int d, double l1_v0) {
  if (!(alpha > 0.0 && alpha < 0.5 * d)) {
    throw Error(ErrorKind::invalid_argument, "weighted energy needs alpha in (0, d/2)");
  }
  const auto& t = series.times();
  const auto& e = series.channel("E");
  const auto& dis = series.channel("D");
  const double denom = e.front() + l1_v0 * l1_v0;
  if (!(denom > 0.0)) throw Error(ErrorKind::invalid_argument, "weighted energy: E(0) + ||v0||^2 vanishes");
  WeightedEnergy out;
  double integral = 0.0;
  double running = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i > 0) {
      integral += 0.5 * (t[i] - t[i - 1]) *
                  (std::pow(1.0 + t[i - 1], alpha) * dis[i - 1] + std::pow(1.0 + t[i], alpha) * dis[i]);
    }
    running = std::max(running, (e[i] * std::pow(1.0 + t[i], alpha) + integral) / denom);
    out.times.push_back(t[i]);
    out.ratio.push_back(running);
  }
  out.margin = running;
  return out;
}

inline WeightedEnergy check_weighted_energy(const TimeSeries& series, double alpha, int d) {
  return check_weighted_energy(series, alpha, d, series.channel("l1_v").front());
}

inline nlohmann::ordered_json to_json(const DecayReport& r) {
  nlohmann::ordered_json j;
  j["t_sat"] = r.t_sat;
  j["window"] = {r.window_start, r.window_end};
  nlohmann::ordered_json fits = nlohmann::ordered_json::array();
  for (const auto& f : r.fits) {
    nlohmann::ordered_json c;
    c["channel"] = f.channel;
    c["exponent"] = f.exponent ? nlohmann::ordered_json(*f.exponent) : nlohmann::ordered_json(nullptr);
    c["expected"] = f.expected.value();
    c["expected_exact"] = f.expected.str();
    c["tolerance"] = f.tolerance;
    c["window"] = {f.t0, f.t1};
    c["residual"] = f.residual;
    c["pass"] = f.pass ? nlohmann::ordered_json(*f.pass) : nlohmann::ordered_json(nullptr);
    if (!f.note.empty()) c["note"] = f.note;
    fits.push_back(c);
  }
  j["channels"] = fits;
  nlohmann::ordered_json fn;
  auto keyed = [](const auto& m) {
    nlohmann::ordered_json o;
    for (const auto& [k, v] : m) o[format_double(static_cast<double>(k))] = v;
    return o;
  };
  fn["M_u"] = keyed(r.functionals.M_u);
  fn["M_v"] = keyed(r.functionals.M_v);
  fn["D_theta"] = keyed(r.functionals.D_theta);
  fn["Mtilde_v"] = r.functionals.Mtilde_v;
  fn["Dtilde"] = r.functionals.Dtilde;
  fn["bootstrap_sum"] = r.functionals.bootstrap_sum();
  j["functionals"] = fn;
  return j;
}

}  // namespace pens
