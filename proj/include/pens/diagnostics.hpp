#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "pens/error.hpp"
#include "pens/field.hpp"
#include "pens/spectral.hpp"
#include "pens/state.hpp"

namespace pens {

enum class Lp { one, two, inf };

/// Grid quadrature of the pointwise Euclidean magnitude.
inline double lp_norm(const RealField& f, Lp p) {
  const Grid& g = f.grid();
  const std::size_t size = g.real_size();
  double acc = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    double m2 = 0.0;
    for (int c = 0; c < f.components(); ++c) m2 += f.component(c)[i] * f.component(c)[i];
    switch (p) {
      case Lp::one: acc += std::sqrt(m2); break;
      case Lp::two: acc += m2; break;
      case Lp::inf: acc = std::max(acc, std::sqrt(m2)); break;
    }
  }
  switch (p) {
    case Lp::one: return acc * g.cell_volume();
    case Lp::two: return std::sqrt(acc * g.cell_volume());
    case Lp::inf: return acc;
  }
  return acc;
}

namespace detail {

// x^e with exact products for small integer e (the common Sobolev orders).
inline double power(double x, double e) {
  if (e == 0.0) return 1.0;
  if (e == 1.0) return x;
  if (e == 2.0) return x * x;
  if (e == 3.0) return x * x * x;
  return std::pow(x, e);
}

// sum_xi weight(xi) * |f^(xi)|^2 dxi^d over the full spectrum. Symbols that
// blow up at xi=0 require a vanishing mean mode (roundoff level accepted).
template <typename Weight>
double weighted_spectral_sum(const SpectralField& f, Weight&& weight) {
  const Grid& g = f.grid();
  const auto& m = g.modes();
  const std::size_t size = g.spectral_size();
  double acc = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    double a2 = 0.0;
    for (int c = 0; c < f.components(); ++c) a2 += std::norm(f.component(c)[i]);
    const double w = weight(m.norm2[i]);
    if (!std::isfinite(w)) {
      if (i != 0) throw Error(ErrorKind::zero_frequency_singularity, "norm weight not finite at a nonzero mode");
      double scale = 0.0;
      for (int c = 0; c < f.components(); ++c) {
        for (const auto& z : f.component(c)) scale = std::max(scale, std::abs(z));
      }
      if (std::sqrt(a2) > 1e-12 * scale) {
        throw Error(ErrorKind::zero_frequency_singularity,
                    "zero-frequency singularity: negative homogeneous norm of a field with nonzero mean");
      }
      continue;
    }
    acc += m.weight[i] * w * a2;
  }
  return acc * g.mode_volume();
}

}  // namespace detail

/// Inhomogeneous ||(1+|xi|^2)^{s/2} f^|| or homogeneous |||xi|^s f^|| in L^2.
inline double sobolev_norm(const SpectralField& f, double s, bool homogeneous) {
  if (homogeneous) {
    // (|xi|^2)^s = |xi|^{2s}
    return std::sqrt(detail::weighted_spectral_sum(f, [s](double k2) { return detail::power(k2, s); }));
  }
  return std::sqrt(detail::weighted_spectral_sum(f, [s](double k2) { return detail::power(1.0 + k2, s); }));
}

inline double sobolev_norm(const RealField& f, double s, bool homogeneous) {
  return sobolev_norm(to_spectral(f), s, homogeneous);
}

/// sum_xi |xi|^k |f^(xi)| dxi^d.
inline double fourier_l1(const SpectralField& f, double k) {
  const Grid& g = f.grid();
  const auto& m = g.modes();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    double a2 = 0.0;
    for (int c = 0; c < f.components(); ++c) a2 += std::norm(f.component(c)[i]);
    if (a2 == 0.0) continue;
    const double sym = detail::power(m.norm2[i], 0.5 * k);
    acc += m.weight[i] * sym * std::sqrt(a2);
  }
  return acc * g.mode_volume();
}

inline double fourier_l1(const RealField& f, double k) { return fourier_l1(to_spectral(f), k); }

/// E = 1/2 int rho |u|^2 + 1/2 int |v|^2.
inline double energy(const SimState& s) {
  const Grid& g = s.grid;
  double acc = 0.0;
  for (std::size_t i = 0; i < g.real_size(); ++i) {
    double u2 = 0.0, v2 = 0.0;
    for (int c = 0; c < g.dim(); ++c) {
      u2 += s.u.component(c)[i] * s.u.component(c)[i];
      v2 += s.v.component(c)[i] * s.v.component(c)[i];
    }
    acc += s.rho.component(0)[i] * u2 + v2;
  }
  return 0.5 * acc * g.cell_volume();
}

/// D = int |grad v|^2 + int rho |u - v|^2.
inline double dissipation(const SimState& s) {
  const Grid& g = s.grid;
  double drag = 0.0;
  for (std::size_t i = 0; i < g.real_size(); ++i) {
    double w2 = 0.0;
    for (int c = 0; c < g.dim(); ++c) {
      const double w = s.u.component(c)[i] - s.v.component(c)[i];
      w2 += w * w;
    }
    drag += s.rho.component(0)[i] * w2;
  }
  const double grad_v = sobolev_norm(to_spectral(s.v), 1.0, true);
  return grad_v * grad_v + drag * g.cell_volume();
}

/// Squared-seminorm distance used for linear stability:
/// ||rho_a - rho_b||^2_{H^-alpha (homogeneous)} + ||u_a - u_b||^2_{H^1} + ||v_a - v_b||^2_{L^2}.
inline double stability_metric(const SimState& a, const SimState& b, double alpha) {
  if (!(a.grid == b.grid)) throw Error(ErrorKind::invalid_argument, "stability metric needs states on the same grid");
  if (!(alpha > 0.0 && alpha < 0.5)) throw Error(ErrorKind::invalid_argument, "stability metric needs alpha in (0, 1/2)");
  SpectralField drho = to_spectral(a.rho - b.rho);
  double mass_scale = 0.0;
  for (double x : a.rho.values()) mass_scale += std::abs(x);
  for (double x : b.rho.values()) mass_scale += std::abs(x);
  mass_scale *= a.grid.cell_volume();
  const double mean_mismatch = std::abs(drho.component(0)[0]) * std::pow(2.0 * std::numbers::pi, 0.5 * a.grid.dim());
  if (mean_mismatch > 1e-10 * mass_scale) {
    throw Error(ErrorKind::invalid_argument,
                "stability metric needs mass-matched densities (mean of rho difference is nonzero)");
  }
  drho.component(0)[0] = Complex{};
  const double r = sobolev_norm(drho, -alpha, true);
  const double du = sobolev_norm(to_spectral(a.u - b.u), 1.0, false);
  const double dv = lp_norm(a.v - b.v, Lp::two);
  return r * r + du * du + dv * dv;
}

/// Solves -Lap p = div[(v.grad)v - rho(u - v)] with zero mean.
inline RealField recover_pressure(const SimState& s) {
  const Grid& g = s.grid;
  const int d = g.dim();
  const SpectralField vh = to_spectral(s.v);
  RealField forcing(g, d);
  for (int a = 0; a < d; ++a) {
    SpectralField comp(g, 1);
    std::copy(vh.component(a).begin(), vh.component(a).end(), comp.component(0).begin());
    const RealField grad = to_real(gradient(comp));
    auto out = forcing.component(a);
    for (std::size_t i = 0; i < g.real_size(); ++i) {
      double adv = 0.0;
      for (int j = 0; j < d; ++j) adv += s.v.component(j)[i] * grad.component(j)[i];
      out[i] = adv - s.rho.component(0)[i] * (s.u.component(a)[i] - s.v.component(a)[i]);
    }
  }
  SpectralField div = divergence(to_spectral(forcing));
  div.component(0)[0] = Complex{};
  const SpectralField p = apply_multiplier(div, [](const Mode& m) { return 1.0 / m.norm2; });
  return to_real(p);
}

/// Regularity indices used for the a-priori functionals.
struct DiagnosticSettings {
  double m = 2.5;
  double s = 1.25;

  static DiagnosticSettings defaults(int d) {
    DiagnosticSettings out;
    out.m = 0.5 * d + 1.5;
    out.s = out.m - 1.25;
    return out;
  }

  /// Largest admissible theta for the relative velocity, min(m-2, d/2).
  double theta(int d) const { return std::min(m - 2.0, 0.5 * d); }
};

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::string theta_channel(double theta) { return "htheta_umv_" + format_double(theta); }

/// Sampled diagnostics: strictly increasing times and named channels of equal length.
class TimeSeries {
 public:
  const std::vector<double>& times() const { return times_; }
  const std::map<std::string, std::vector<double>>& channels() const { return channels_; }
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }

  bool has(const std::string& name) const { return channels_.count(name) != 0; }

  const std::vector<double>& channel(const std::string& name) const {
    auto it = channels_.find(name);
    if (it == channels_.end()) throw Error(ErrorKind::invalid_argument, "missing channel '" + name + "'");
    return it->second;
  }

  void add_sample(double t, const std::map<std::string, double>& values) {
    if (!times_.empty() && !(t > times_.back())) {
      throw Error(ErrorKind::invalid_argument, "sample times must be strictly increasing");
    }
    if (!times_.empty() && values.size() != channels_.size()) {
      throw Error(ErrorKind::invalid_argument, "sample channel set differs from the series");
    }
    for (const auto& [name, value] : values) {
      if (!std::isfinite(value) || value < 0.0) {
        throw Error(ErrorKind::non_finite, "channel '" + name + "' sample must be finite and >= 0");
      }
      if (!times_.empty() && !has(name)) {
        throw Error(ErrorKind::invalid_argument, "unexpected channel '" + name + "'");
      }
    }
    times_.push_back(t);
    for (const auto& [name, value] : values) channels_[name].push_back(value);
  }

 private:
  std::vector<double> times_;
  std::map<std::string, std::vector<double>> channels_;
};

/// Trapezoid integral of y over the sample grid from index 0 to `last`.
inline double trapezoid(const std::vector<double>& t, const std::vector<double>& y, std::size_t last) {
  double acc = 0.0;
  for (std::size_t i = 0; i < last; ++i) acc += 0.5 * (t[i + 1] - t[i]) * (y[i] + y[i + 1]);
  return acc;
}

inline double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
  return t.empty() ? 0.0 : trapezoid(t, y, t.size() - 1);
}

/// R_n = E(t_{n+1}) - E(t_n) + trapezoid(D; t_n, t_{n+1}).
inline std::vector<double> energy_residual(const TimeSeries& series) {
  const auto& t = series.times();
  const auto& e = series.channel("E");
  const auto& d = series.channel("D");
  std::vector<double> r;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    r.push_back(e[i + 1] - e[i] + 0.5 * (t[i + 1] - t[i]) * (d[i] + d[i + 1]));
  }
  return r;
}

/// (int_0^T ||v||_{L^2}^{(d+4)/2} dt)^{2/(d+4)}.
inline double bochner_norm_v(const TimeSeries& series, int d) {
  const double q = 0.5 * (d + 4);
  std::vector<double> powered;
  for (double x : series.channel("l2_v")) powered.push_back(std::pow(x, q));
  return std::pow(trapezoid(series.times(), powered), 1.0 / q);
}

/// sup_t(||rho||^2_{H^s} + ||u||^2_{H^m} + ||v||^2_{H^s}) + ||v||^2_{L^{(d+4)/2}(0,T;L^2)}.
inline double functional_X(const TimeSeries& series, int d) {
  const auto& r = series.channel("hs_rho");
  const auto& u = series.channel("hm_u");
  const auto& v = series.channel("hs_v");
  double sup = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) sup = std::max(sup, r[i] * r[i] + u[i] * u[i] + v[i] * v[i]);
  const double b = bochner_norm_v(series, d);
  return sup + b * b;
}

/// Time integrals of ||grad u||_inf, |||xi| v^||_{L^1}, ||grad^2 u||_{H^{m-2}},
/// ||grad^2 v||_{H^{m-2}}, ||u-v||_{L^2}, plus the Bochner norm of v.
inline double functional_D(const TimeSeries& series, int d) {
  const auto& t = series.times();
  double acc = 0.0;
  for (const char* name : {"linf_grad_u", "xi_l1_v", "hm2_d2u", "hm2_d2v", "l2_umv"}) {
    acc += trapezoid(t, series.channel(name));
  }
  return acc + bochner_norm_v(series, d);
}

/// ||rho_0||^2_{H^s} + ||u_0||^2_{H^m} + ||v_0||^2_{H^s}.
inline double functional_X0(const TimeSeries& series) {
  const double r = series.channel("hs_rho").front();
  const double u = series.channel("hm_u").front();
  const double v = series.channel("hs_v").front();
  return r * r + u * u + v * v;
}

namespace detail {

inline SpectralField component_of(const SpectralField& f, int c) {
  SpectralField out(f.grid(), 1);
  std::copy(f.component(c).begin(), f.component(c).end(), out.component(0).begin());
  return out;
}

// Pointwise max over x of the Frobenius norm of grad w.
inline double linf_gradient(const SpectralField& w) {
  const Grid& g = w.grid();
  std::vector<double> acc(g.real_size(), 0.0);
  for (int a = 0; a < w.components(); ++a) {
    const RealField grad = to_real(gradient(component_of(w, a)));
    for (int j = 0; j < g.dim(); ++j) {
      auto x = grad.component(j);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += x[i] * x[i];
    }
  }
  double m = 0.0;
  for (double x : acc) m = std::max(m, x);
  return std::sqrt(m);
}

}  // namespace detail

/// Evaluates every diagnostic channel on a state.
inline std::map<std::string, double> sample_channels(const SpectralState& sp, const DiagnosticSettings& cfg) {
  const Grid& g = sp.grid();
  const int d = g.dim();
  const SimState s = to_real(sp);
  const SpectralField umv_h = sp.u - sp.v;
  const RealField umv = s.u - s.v;

  std::map<std::string, double> out;
  out["E"] = energy(s);
  out["D"] = dissipation(s);
  out["mass"] = lp_norm(s.rho, Lp::one);
  out["l2_u"] = sobolev_norm(sp.u, 0.0, true);
  out["l2_v"] = sobolev_norm(sp.v, 0.0, true);
  out["l2_umv"] = sobolev_norm(umv_h, 0.0, true);
  out["l1_v"] = lp_norm(s.v, Lp::one);
  for (int k : {1, 2}) {
    out["hk_u_" + std::to_string(k)] = sobolev_norm(sp.u, k, true);
    out["hk_v_" + std::to_string(k)] = sobolev_norm(sp.v, k, true);
  }
  const double theta = cfg.theta(d);
  if (theta >= 0.0) out[theta_channel(theta)] = sobolev_norm(umv_h, theta, true);

  const SpectralField lap_v = apply_multiplier(sp.v, [](const Mode& m) { return -m.norm2; });
  out["linf_dv"] = lp_norm(to_real(lap_v), Lp::inf);
  out["linf_umv"] = lp_norm(umv, Lp::inf);
  out["linf_grad_u"] = detail::linf_gradient(sp.u);
  out["xi_l1_v"] = fourier_l1(sp.v, 1.0);
  out["xi2_l1_v"] = fourier_l1(sp.v, 2.0);
  out["l1hat_umv"] = fourier_l1(umv_h, 0.0);
  out["hs_rho"] = sobolev_norm(sp.rho, cfg.s, false);
  out["hm_u"] = sobolev_norm(sp.u, cfg.m, false);
  out["hs_v"] = sobolev_norm(sp.v, cfg.s, false);
  // ||grad^2 f||_{H^{m-2}} as the multiplier |xi|^2 (1+|xi|^2)^{(m-2)/2}.
  const double m2 = cfg.m - 2.0;
  auto d2 = [m2](double k2) { return k2 * k2 * std::pow(1.0 + k2, m2); };
  out["hm2_d2u"] = std::sqrt(detail::weighted_spectral_sum(sp.u, d2));
  out["hm2_d2v"] = std::sqrt(detail::weighted_spectral_sum(sp.v, d2));
  out["div_v"] = sobolev_norm(divergence(sp.v), 0.0, true);
  return out;
}

}  // namespace pens
