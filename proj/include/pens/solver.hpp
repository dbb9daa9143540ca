#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pens/diagnostics.hpp"
#include "pens/error.hpp"
#include "pens/field.hpp"
#include "pens/initial_data.hpp"
#include "pens/spectral.hpp"
#include "pens/state.hpp"

namespace pens {

/// Stiff-free right-hand sides of the coupled system, all dealiased.
struct Tendencies {
  SpectralField rho;   // -div(rho u)
  SpectralField u;     // -(u.grad)u, without the drag relaxation
  SpectralField v;     // P[-(v.grad)v + rho(u - v)]
  double max_speed = 0.0;
};

namespace detail {

// Weights of int_0^h exp(-lambda r) [f_end (1 - r/h) + f_start r/h] dr with
// z = lambda h: returns {w_start, w_end} / h.
inline std::pair<double, double> linear_exp_weights(double z) {
  if (z < 1e-4) {
    const double g1 = 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0;
    const double g2 = 0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0;
    return {g2, g1 - g2};
  }
  const double em = std::exp(-z);
  const double g1 = -std::expm1(-z) / z;
  const double g2 = (-std::expm1(-z) - z * em) / (z * z);
  return {g2, g1 - g2};
}

inline double min_value(std::span<const double> x) {
  double m = std::numeric_limits<double>::infinity();
  for (double y : x) m = std::min(m, y);
  return m;
}

inline double max_magnitude(const RealField& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.grid().real_size(); ++i) {
    double m2 = 0.0;
    for (int c = 0; c < f.components(); ++c) m2 += f.component(c)[i] * f.component(c)[i];
    m = std::max(m, m2);
  }
  return std::sqrt(m);
}

inline void check_density(const RealField& rho) {
  const double m = min_value(rho.values());
  if (!(m > 0.0)) {
    throw Error(ErrorKind::vacuum, "vacuum/negativity: min rho = " + format_double(m));
  }
}

inline SpectralField forward_dealiased(const RealField& f) {
  SpectralField h = to_spectral(f);
  dealias_inplace(h);
  return h;
}

}  // namespace detail

/// Evaluates all stiff-free tendencies with one shared set of transforms.
inline Tendencies evaluate_tendencies(const SpectralState& s) {
  const Grid& g = s.grid();
  const int d = g.dim();
  const std::size_t size = g.real_size();
  const auto& modes = g.modes();

  const RealField rho = to_real(s.rho);
  detail::check_density(rho);
  const RealField u = to_real(s.u);
  const RealField v = to_real(s.v);

  Tendencies out{SpectralField(g, 1), SpectralField(g, d), SpectralField(g, d), 0.0};
  out.max_speed = std::max(detail::max_magnitude(u), detail::max_magnitude(v));

  // Continuity in conservative form.
  out.rho = divergence(detail::forward_dealiased(pointwise_product(u, rho)));
  out.rho *= -1.0;

  // Nonconservative transport of u.
  RealField adv(g, d);
  for (int a = 0; a < d; ++a) {
    const RealField grad = to_real(gradient(detail::component_of(s.u, a)));
    auto dst = adv.component(a);
    for (int j = 0; j < d; ++j) {
      auto uj = u.component(j);
      auto gj = grad.component(j);
      for (std::size_t i = 0; i < size; ++i) dst[i] -= uj[i] * gj[i];
    }
  }
  out.u = detail::forward_dealiased(adv);

  // (v.grad)v = div(v (x) v) for solenoidal v; only the upper triangle is formed.
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      RealField prod(g, 1);
      auto va = v.component(a);
      auto vb = v.component(b);
      auto dst = prod.component(0);
      for (std::size_t i = 0; i < size; ++i) dst[i] = va[i] * vb[i];
      const SpectralField ph = detail::forward_dealiased(prod);
      auto src = ph.component(0);
      auto out_a = out.v.component(a);
      for (std::size_t i = 0; i < src.size(); ++i) out_a[i] -= Complex(0.0, modes.dxi[b][i]) * src[i];
      if (b != a) {
        auto out_b = out.v.component(b);
        for (std::size_t i = 0; i < src.size(); ++i) out_b[i] -= Complex(0.0, modes.dxi[a][i]) * src[i];
      }
    }
  }

  RealField drag(g, d);
  for (int a = 0; a < d; ++a) {
    auto r = rho.component(0);
    auto ua = u.component(a);
    auto va = v.component(a);
    auto dst = drag.component(a);
    for (std::size_t i = 0; i < size; ++i) dst[i] = r[i] * (ua[i] - va[i]);
  }
  out.v += detail::forward_dealiased(drag);
  leray_project_inplace(out.v);
  return out;
}

struct EulerTendency {
  SpectralField rho;
  SpectralField u;
};

/// (-div(rho u), -(u.grad)u); the -(u - v) relaxation is left to the stepper.
inline EulerTendency euler_tendency(const SimState& state) {
  detail::check_density(state.rho);
  Tendencies t = evaluate_tendencies(to_spectral(state));
  return EulerTendency{std::move(t.rho), std::move(t.u)};
}

/// P[-(v.grad)v + rho(u - v)]; the viscous term is left to the stepper.
inline SpectralField ns_tendency(const SimState& state) {
  detail::check_density(state.rho);
  return evaluate_tendencies(to_spectral(state)).v;
}

/// Largest admissible step for the advective CFL rule.
inline double cfl_limit(const Grid& g, double max_speed, double cfl_safety) {
  return cfl_safety * g.dx() / std::max(1e-12, max_speed);
}

/// Integrating-factor Heun (two-stage, second order) for the coupled system.
///
/// The linear parts are exact: v^ is multiplied by exp(-|xi|^2 dt), and u
/// relaxes toward v exactly, with v taken linear in time across the step.
/// Only -(u.grad)u, the transport of rho and the v forcing are explicit.
class Stepper {
 public:
  explicit Stepper(double cfl_safety = 0.4) : cfl_safety_(cfl_safety) {
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) {
      throw Error(ErrorKind::invalid_argument, "cfl_safety must lie in (0,1]");
    }
  }

  double cfl_safety() const { return cfl_safety_; }

  void step(SpectralState& s, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::invalid_argument, "time step must be positive");
    Tendencies n0 = evaluate_tendencies(s);
    const double limit = cfl_limit(s.grid(), n0.max_speed, cfl_safety_);
    if (dt > limit * (1.0 + 1e-12)) {
      throw Error(ErrorKind::cfl_violation,
                  "CFL violation: dt = " + format_double(dt) + " exceeds limit " + format_double(limit));
    }
    advance(s, std::move(n0), dt);
  }

  /// Steps with dt = min(dt_cap, CFL limit of the current state); returns dt.
  double step_capped(SpectralState& s, double dt_cap) {
    if (!(dt_cap > 0.0)) throw Error(ErrorKind::invalid_argument, "time step must be positive");
    Tendencies n0 = evaluate_tendencies(s);
    const double dt = std::min(dt_cap, cfl_limit(s.grid(), n0.max_speed, cfl_safety_));
    advance(s, std::move(n0), dt);
    return dt;
  }

  void check_invariants(const SpectralState& s) const {
    const RealField rho = to_real(s.rho);
    detail::check_density(rho);
    for (const SpectralField* f : {&s.u, &s.v}) {
      for (const auto& z : f->values()) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
          throw Error(ErrorKind::non_finite, "state became non-finite at t = " + format_double(s.t));
        }
      }
    }
    const double div = sobolev_norm(divergence(s.v), 0.0, true);
    const double h1 = sobolev_norm(s.v, 1.0, false);
    if (div > 1e-8 * h1) {
      throw Error(ErrorKind::non_finite, "v lost incompressibility: ||div v|| = " + format_double(div));
    }
  }

 private:
  static void axpy(SpectralState& s, double a, const Tendencies& t) {
    auto add = [a](SpectralField& y, const SpectralField& x) {
      auto yv = y.values();
      auto xv = x.values();
      for (std::size_t i = 0; i < yv.size(); ++i) yv[i] += a * xv[i];
    };
    add(s.rho, t.rho);
    add(s.u, t.u);
    add(s.v, t.v);
  }

  void propagate(SpectralState& s, double dt) {
    const auto& k2 = s.grid().modes().norm2;
    if (dt != cached_dt_ || cached_modes_ != &k2) {
      heat_.resize(k2.size());
      for (std::size_t i = 0; i < k2.size(); ++i) heat_[i] = std::exp(-k2[i] * dt);
      cached_dt_ = dt;
      cached_modes_ = &k2;
    }
    s.u *= std::exp(-dt);
    for (int c = 0; c < s.v.components(); ++c) {
      auto z = s.v.component(c);
      for (std::size_t i = 0; i < z.size(); ++i) z[i] *= heat_[i];
    }
  }

  // u += dt (w_start v_start + w_end v_end): exact relaxation toward the linear interpolant of v.
  static void relax(SpectralField& u, const SpectralField& v_start, const SpectralField& v_end, double dt) {
    const auto [w0, w1] = detail::linear_exp_weights(dt);
    auto uv = u.values();
    auto a = v_start.values();
    auto b = v_end.values();
    for (std::size_t i = 0; i < uv.size(); ++i) uv[i] += dt * (w0 * a[i] + w1 * b[i]);
  }

  void advance(SpectralState& s, Tendencies n0, double dt) {
    const SpectralField v_start = s.v;

    SpectralState stage{s.rho, s.u, s.v, s.t + dt};
    axpy(stage, dt, n0);
    propagate(stage, dt);
    relax(stage.u, v_start, stage.v, dt);

    Tendencies n1 = evaluate_tendencies(stage);

    axpy(s, 0.5 * dt, n0);
    propagate(s, dt);
    axpy(s, 0.5 * dt, n1);
    leray_project_inplace(s.v);
    relax(s.u, v_start, s.v, dt);
    s.t += dt;

    check_invariants(s);
  }

  double cfl_safety_;
  double cached_dt_ = -1.0;
  const std::vector<double>* cached_modes_ = nullptr;
  std::vector<double> heat_;  // exp(-|xi|^2 dt) for cached_dt_
};

/// One step on a real-space state.
inline SimState step(const SimState& state, double dt, double cfl_safety = 0.4) {
  SpectralState s = to_spectral(state);
  Stepper(cfl_safety).step(s, dt);
  return to_real(s);
}

struct RunResult {
  TimeSeries series;
  SimState final_state;
  std::vector<SimState> snapshots;  // one per sample when requested
  std::size_t steps = 0;
};

struct RunOptions {
  std::optional<DiagnosticSettings> diagnostics;  // defaults for the grid dimension when unset
  bool keep_snapshots = false;
  // Called at every sample with the spectral state; lets callers record extra data.
  std::function<void(const SpectralState&)> on_sample;
};

/// Integrates from `initial` to cfg.t_end, sampling every cfg.sample_every.
///
/// dt = min(dt_max, cfl_safety dx / max|u,v|, time to next sample); sample
/// times are k * sample_every plus t_end, hit exactly.
inline RunResult run(const SolverConfig& cfg, const SimState& initial, const RunOptions& opts) {
  cfg.validate();
  const Grid& g = initial.grid;
  Stepper stepper(cfg.cfl_safety);
  SpectralState s = to_spectral(initial);
  stepper.check_invariants(s);

  const DiagnosticSettings settings = opts.diagnostics.value_or(DiagnosticSettings::defaults(g.dim()));
  RunResult result{TimeSeries{}, initial, {}, 0};
  auto record = [&](const SpectralState& st) {
    result.series.add_sample(st.t, sample_channels(st, settings));
    if (opts.keep_snapshots) result.snapshots.push_back(to_real(st));
    if (opts.on_sample) opts.on_sample(st);
  };
  record(s);

  std::size_t next_sample = 1;
  auto sample_time = [&](std::size_t k) { return std::min(cfg.t_end, static_cast<double>(k) * cfg.sample_every); };
  while (s.t < cfg.t_end) {
    const double target = sample_time(next_sample);
    const double remaining = target - s.t;
    const double dt = stepper.step_capped(s, std::min(cfg.dt_max, remaining));
    ++result.steps;
    if (dt >= remaining * (1.0 - 1e-12)) {
      s.t = target;
      record(s);
      ++next_sample;
    }
  }
  result.final_state = to_real(s);
  return result;
}

inline RunResult run(const SolverConfig& cfg, const RunOptions& opts = {}) {
  return run(cfg, initial_data(cfg), opts);
}

}  // namespace pens
