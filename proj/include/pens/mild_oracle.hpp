#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "pens/diagnostics.hpp"
#include "pens/error.hpp"
#include "pens/solver.hpp"
#include "pens/spectral.hpp"
#include "pens/state.hpp"

namespace pens {

namespace detail {

// Cumulative I_j = int_0^{t_j} exp(-rate (t_j - tau)) f(tau) dtau on a uniform
// tau grid, forcing piecewise linear between samples.
template <typename Rate>
std::vector<SpectralField> cumulative_duhamel(const std::vector<SpectralField>& forcing, double h, Rate&& rate) {
  std::vector<SpectralField> out;
  if (forcing.empty()) return out;
  const Grid& g = forcing.front().grid();
  const std::size_t size = g.spectral_size();
  std::vector<double> decay(size), w0(size), w1(size);
  for (std::size_t i = 0; i < size; ++i) {
    const double lam = rate(i);
    decay[i] = std::exp(-lam * h);
    const auto [a, b] = linear_exp_weights(lam * h);
    w0[i] = h * a;
    w1[i] = h * b;
  }
  out.reserve(forcing.size());
  out.emplace_back(g, forcing.front().components());
  for (std::size_t j = 0; j + 1 < forcing.size(); ++j) {
    SpectralField next(g, forcing[j].components());
    for (int c = 0; c < next.components(); ++c) {
      auto prev = out[j].component(c);
      auto fa = forcing[j].component(c);
      auto fb = forcing[j + 1].component(c);
      auto dst = next.component(c);
      for (std::size_t i = 0; i < size; ++i) dst[i] = decay[i] * prev[i] + w0[i] * fa[i] + w1[i] * fb[i];
    }
    out.push_back(std::move(next));
  }
  return out;
}

}  // namespace detail

/// int_0^t exp(-|xi|^2 (t - tau)) P(xi) f^(tau) dtau for forcing sampled at
/// tau_j = j h (j = 0..M), integrated exactly against the piecewise-linear
/// interpolant of the samples.
inline SpectralField duhamel_integral(const std::vector<SpectralField>& forcing, double h, double t) {
  if (forcing.empty()) throw Error(ErrorKind::invalid_argument, "duhamel integral needs forcing samples");
  if (!(h > 0.0)) throw Error(ErrorKind::invalid_argument, "duhamel integral needs a positive sample spacing");
  const double t_max = h * static_cast<double>(forcing.size() - 1);
  if (t < 0.0 || t > t_max * (1.0 + 1e-12)) {
    throw Error(ErrorKind::invalid_argument, "duhamel integral: t = " + format_double(t) +
                                                 " outside the sampled range [0, " + format_double(t_max) + "]");
  }
  const Grid& g = forcing.front().grid();
  const auto& k2 = g.modes().norm2;

  std::vector<SpectralField> projected;
  projected.reserve(forcing.size());
  for (const auto& f : forcing) {
    SpectralField p = f;
    if (p.components() == g.dim()) leray_project_inplace(p);
    projected.push_back(std::move(p));
  }

  const std::size_t full = std::min(forcing.size() - 1, static_cast<std::size_t>(std::floor(t / h + 1e-12)));
  std::vector<SpectralField> head(projected.begin(), projected.begin() + static_cast<std::ptrdiff_t>(full) + 1);
  SpectralField acc = detail::cumulative_duhamel(head, h, [&](std::size_t i) { return k2[i]; }).back();
  const double rest = t - h * static_cast<double>(full);
  if (rest <= 1e-12 * std::max(1.0, t)) return acc;

  // Partial last interval: the forcing at t is the linear interpolant.
  const double frac = rest / h;
  const SpectralField& fa = projected[full];
  const SpectralField& fb = projected[full + 1];
  for (int c = 0; c < acc.components(); ++c) {
    auto dst = acc.component(c);
    auto a = fa.component(c);
    auto b = fb.component(c);
    for (std::size_t i = 0; i < dst.size(); ++i) {
      const auto [w0, w1] = detail::linear_exp_weights(k2[i] * rest);
      const Complex f_end = (1.0 - frac) * a[i] + frac * b[i];
      dst[i] = std::exp(-k2[i] * rest) * dst[i] + rest * (w0 * a[i] + w1 * f_end);
    }
  }
  return acc;
}

/// (rho, u, v) at the points of a uniform time grid.
struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> rho;
  std::vector<SpectralField> u;
  std::vector<SpectralField> v;
};

struct PicardResult {
  Trajectory trajectory;
  std::vector<double> distances;  // sup-in-time L2 distance between successive iterates
  std::vector<double> ratios;     // distances[k] / distances[k-1]
  bool converged = false;
};

namespace detail {

struct PicardProblem {
  SpectralState initial;
  double h;
  std::size_t steps;
};

inline double pair_distance(const std::vector<SpectralField>& ua, const std::vector<SpectralField>& va,
                            const std::vector<SpectralField>& ub, const std::vector<SpectralField>& vb) {
  double worst = 0.0;
  for (std::size_t j = 0; j < ua.size(); ++j) {
    const double du = sobolev_norm(ua[j] - ub[j], 0.0, true);
    const double dv = sobolev_norm(va[j] - vb[j], 0.0, true);
    worst = std::max(worst, std::sqrt(du * du + dv * dv));
  }
  return worst;
}

// Density along the current u iterate: conservative Heun stepping with u
// taken at the two interval endpoints.
inline std::vector<SpectralField> density_along(const PicardProblem& p, const std::vector<SpectralField>& u) {
  std::vector<SpectralField> rho{p.initial.rho};
  auto flux_div = [](const SpectralField& r, const SpectralField& uu) {
    const RealField rr = to_real(r);
    check_density(rr);
    SpectralField f = divergence(forward_dealiased(pointwise_product(to_real(uu), rr)));
    f *= -1.0;
    return f;
  };
  for (std::size_t j = 0; j < p.steps; ++j) {
    const SpectralField k0 = flux_div(rho[j], u[j]);
    SpectralField pred = rho[j];
    for (std::size_t i = 0; i < pred.values().size(); ++i) pred.values()[i] += p.h * k0.values()[i];
    const SpectralField k1 = flux_div(pred, u[j + 1]);
    SpectralField next = rho[j];
    for (std::size_t i = 0; i < next.values().size(); ++i) {
      next.values()[i] += 0.5 * p.h * (k0.values()[i] + k1.values()[i]);
    }
    rho.push_back(std::move(next));
  }
  return rho;
}

// One application of the mild-solution map (v first, then u from the new v).
inline Trajectory mild_map(const PicardProblem& p, const Trajectory& in) {
  const Grid& g = p.initial.grid();
  const auto& k2 = g.modes().norm2;
  Trajectory out;
  out.times = in.times;
  out.rho = density_along(p, in.u);

  std::vector<SpectralField> fv, adv_u;
  for (std::size_t j = 0; j <= p.steps; ++j) {
    Tendencies t = evaluate_tendencies(SpectralState{out.rho[j], in.u[j], in.v[j], in.times[j]});
    fv.push_back(std::move(t.v));
    adv_u.push_back(std::move(t.u));
  }
  const auto dv = cumulative_duhamel(fv, p.h, [&](std::size_t i) { return k2[i]; });
  for (std::size_t j = 0; j <= p.steps; ++j) {
    SpectralField v = p.initial.v;
    for (int c = 0; c < v.components(); ++c) {
      auto z = v.component(c);
      for (std::size_t i = 0; i < z.size(); ++i) z[i] *= std::exp(-k2[i] * in.times[j]);
    }
    v += dv[j];
    out.v.push_back(std::move(v));
  }

  std::vector<SpectralField> fu;
  for (std::size_t j = 0; j <= p.steps; ++j) fu.push_back(out.v[j] + adv_u[j]);
  const auto du = cumulative_duhamel(fu, p.h, [](std::size_t) { return 1.0; });
  for (std::size_t j = 0; j <= p.steps; ++j) {
    SpectralField u = p.initial.u;
    u *= std::exp(-in.times[j]);
    u += du[j];
    out.u.push_back(std::move(u));
  }
  return out;
}

inline PicardProblem make_problem(const SimState& initial, double t_end, double h) {
  if (!(t_end > 0.0) || !(h > 0.0)) throw Error(ErrorKind::invalid_argument, "picard needs t_end > 0 and h > 0");
  const double ratio = t_end / h;
  const auto steps = static_cast<std::size_t>(std::llround(ratio));
  if (steps == 0 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * ratio) {
    throw Error(ErrorKind::invalid_argument, "picard: t_end must be a multiple of the tau spacing");
  }
  return PicardProblem{to_spectral(initial), t_end / static_cast<double>(steps), steps};
}

}  // namespace detail

/// Linear (heat + exponential relaxation) trajectory used as iterate 0.
inline Trajectory linear_trajectory(const SimState& initial, double t_end, double h) {
  const auto p = detail::make_problem(initial, t_end, h);
  const auto& k2 = p.initial.grid().modes().norm2;
  Trajectory out;
  for (std::size_t j = 0; j <= p.steps; ++j) {
    const double t = p.h * static_cast<double>(j);
    out.times.push_back(t);
    out.rho.push_back(p.initial.rho);
    SpectralField u = p.initial.u;
    u *= std::exp(-t);
    out.u.push_back(std::move(u));
    SpectralField v = p.initial.v;
    for (int c = 0; c < v.components(); ++c) {
      auto z = v.component(c);
      for (std::size_t i = 0; i < z.size(); ++i) z[i] *= std::exp(-k2[i] * t);
    }
    out.v.push_back(std::move(v));
  }
  return out;
}

/// Fixed-point iteration of the mild formulation on the (u, v) trajectory.
///
/// v(t) = e^{-|xi|^2 t} v0 + int e^{-|xi|^2(t-tau)} P[-(v.grad)v + rho(u-v)] dtau,
/// u(t) = e^{-t} u0 + int e^{-(t-tau)} [v - (u.grad)u] dtau,
/// with rho recomputed along each u iterate. Throws when the iterate distance
/// grows two consecutive times.
inline PicardResult picard_solve(const SimState& initial, double t_end, double h, double tol, int max_iter) {
  if (!(tol > 0.0) || max_iter < 1) throw Error(ErrorKind::invalid_argument, "picard needs tol > 0 and max_iter >= 1");
  const auto p = detail::make_problem(initial, t_end, h);
  PicardResult res;
  Trajectory current = linear_trajectory(initial, t_end, h);
  int growth = 0;
  for (int k = 0; k < max_iter; ++k) {
    Trajectory next = detail::mild_map(p, current);
    const double dist = detail::pair_distance(next.u, next.v, current.u, current.v);
    if (!res.distances.empty()) {
      const double prev = res.distances.back();
      res.ratios.push_back(prev > 0.0 ? dist / prev : 0.0);
      growth = dist > prev ? growth + 1 : 0;
      if (growth >= 2) {
        throw Error(ErrorKind::contraction, "outside contraction regime: iterate distance grew twice in a row");
      }
    }
    res.distances.push_back(dist);
    current = std::move(next);
    if (dist < tol) {
      res.converged = true;
      break;
    }
  }
  res.trajectory = std::move(current);
  return res;
}

inline PicardResult picard_solve(const SolverConfig& cfg, double t_end, double tol, int max_iter) {
  return picard_solve(initial_data(cfg), t_end, cfg.sample_every, tol, max_iter);
}

/// Distance between a trajectory and its image under the mild map.
inline double mild_residual(const SimState& initial, const Trajectory& traj) {
  const double h = traj.times.size() > 1 ? traj.times[1] - traj.times[0] : 0.0;
  const auto p = detail::make_problem(initial, traj.times.back(), h);
  const Trajectory image = detail::mild_map(p, traj);
  return detail::pair_distance(image.u, image.v, traj.u, traj.v);
}

/// Radial spectral profiles |profile(r)| for the continuous heat envelope.
///
/// "gaussian": exp(-r^2/2); "exponential": exp(-r); "algebraic:a": (1+r^2)^-a;
/// "singular:b": r^b exp(-r^2/2).
struct RadialProfile {
  enum class Kind { gaussian, exponential, algebraic, singular } kind = Kind::gaussian;
  double parameter = 0.0;

  static RadialProfile parse(const std::string& id) {
    RadialProfile p;
    auto param = [&](const std::string& prefix) {
      try {
        std::size_t used = 0;
        const std::string rest = id.substr(prefix.size());
        const double x = std::stod(rest, &used);
        if (used != rest.size()) throw std::invalid_argument(id);
        return x;
      } catch (const std::exception&) {
        throw Error(ErrorKind::invalid_argument, "malformed profile parameter in '" + id + "'");
      }
    };
    if (id == "gaussian") {
      p.kind = Kind::gaussian;
    } else if (id == "exponential") {
      p.kind = Kind::exponential;
    } else if (id.rfind("algebraic:", 0) == 0) {
      p.kind = Kind::algebraic;
      p.parameter = param("algebraic:");
    } else if (id.rfind("singular:", 0) == 0) {
      p.kind = Kind::singular;
      p.parameter = param("singular:");
    } else {
      throw Error(ErrorKind::invalid_argument, "unknown radial profile '" + id + "'");
    }
    return p;
  }

  double operator()(double r) const {
    switch (kind) {
      case Kind::gaussian: return std::exp(-0.5 * r * r);
      case Kind::exponential: return std::exp(-r);
      case Kind::algebraic: return std::pow(1.0 + r * r, -parameter);
      case Kind::singular: return std::pow(r, parameter) * std::exp(-0.5 * r * r);
    }
    return 0.0;
  }
};

/// (int_{R^d} |xi|^{2k} e^{-2|xi|^2 t} |profile(|xi|)|^2 dxi)^{1/2} by adaptive
/// Gauss-Kronrod quadrature in the radius, with the sphere area folded in.
inline double heat_envelope(const RadialProfile& profile, int d, double k, double t) {
  if (d < 1) throw Error(ErrorKind::invalid_argument, "envelope dimension must be >= 1");
  if (!(k >= 0.0) || !(t >= 0.0)) throw Error(ErrorKind::invalid_argument, "envelope needs k >= 0 and t >= 0");
  // Integrability near 0: power 2k + 2b + d - 1 > -1.
  const double low_power = 2.0 * k + d - 1.0 + (profile.kind == RadialProfile::Kind::singular ? 2.0 * profile.parameter : 0.0);
  if (!(low_power > -1.0)) throw Error(ErrorKind::divergent_integral, "envelope integral diverges at xi = 0");
  if (t == 0.0 && profile.kind == RadialProfile::Kind::algebraic && !(4.0 * profile.parameter > 2.0 * k + d)) {
    throw Error(ErrorKind::divergent_integral, "envelope integral diverges at infinity");
  }
  const double sphere = 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
  // r = q * scale keeps the heat factor O(1) wide in q (r^2 = sigma / 2t for large t).
  const double scale = 1.0 / std::sqrt(std::max(1.0, 2.0 * t));
  auto integrand = [&](double q) {
    const double r = q * scale;
    const double p = profile(r);
    const double w = k == 0.0 ? 1.0 : std::pow(r, 2.0 * k);
    return w * std::exp(-2.0 * r * r * t) * p * p * std::pow(r, d - 1) * scale;
  };
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, std::numeric_limits<double>::infinity(), 20, 1e-12, &error);
  if (!std::isfinite(value)) throw Error(ErrorKind::divergent_integral, "envelope integral is not finite");
  return std::sqrt(sphere * value);
}

inline double heat_envelope(const std::string& profile, int d, double k, double t) {
  return heat_envelope(RadialProfile::parse(profile), d, k, t);
}

}  // namespace pens
