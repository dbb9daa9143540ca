#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pens/error.hpp"
#include "pens/field.hpp"
#include "pens/spectral.hpp"
#include "pens/state.hpp"

namespace pens {

/// Shape constants of the initial-data presets (lengths in box units).
struct PresetShape {
  static constexpr double rho_width = 4.0;
  static constexpr double u_width = 2.5;
  static constexpr double v_width = 2.5;
  static constexpr double floor_fraction = 0.1;
  static constexpr double random_fraction = 0.3;
};

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"coupled-small", "coupled-random", "heat-only", "zero-velocity"};
  return names;
}

namespace detail {

inline double centered_r2(const Grid& g, const std::array<double, 3>& x) {
  const double c = 0.5 * g.length();
  double r2 = 0.0;
  for (int a = 0; a < g.dim(); ++a) r2 += (x[a] - c) * (x[a] - c);
  return r2;
}

inline RealField gaussian_bump(const Grid& g, double width) {
  return sample_scalar(g, [&](const auto& x) { return std::exp(-centered_r2(g, x) / (2.0 * width * width)); });
}

// Scales a field so that its largest pointwise magnitude equals `amplitude`.
inline void normalize_peak(RealField& f, double amplitude) {
  double peak = 0.0;
  for (std::size_t i = 0; i < f.grid().real_size(); ++i) {
    double m2 = 0.0;
    for (int c = 0; c < f.components(); ++c) m2 += f.component(c)[i] * f.component(c)[i];
    peak = std::max(peak, std::sqrt(m2));
  }
  if (peak > 0.0) f *= amplitude / peak;
}

// Leray-projected Gaussian times e_1 with zero mean mode, band-limited.
inline RealField solenoidal_gaussian(const Grid& g, double width, double amplitude) {
  const SpectralField bump = to_spectral(gaussian_bump(g, width));
  SpectralField w(g, g.dim());
  std::copy(bump.component(0).begin(), bump.component(0).end(), w.component(0).begin());
  leray_project_inplace(w);
  for (int c = 0; c < g.dim(); ++c) w.component(c)[0] = Complex{};
  dealias_inplace(w);
  RealField out = to_real(w);
  normalize_peak(out, amplitude);
  return out;
}

// Odd swirl (x-c)^perp exp(-|x-c|^2 / 2w^2): smooth, mean-free, band-limited.
inline RealField swirl(const Grid& g, double width, double amplitude) {
  const double c = 0.5 * g.length();
  RealField out = sample_vector(g, [&](const auto& x) {
    const double e = std::exp(-centered_r2(g, x) / (2.0 * width * width)) / width;
    std::array<double, 3> w{-(x[1] - c) * e, (x[0] - c) * e, 0.0};
    return w;
  });
  SpectralField h = to_spectral(out);
  dealias_inplace(h);
  out = to_real(h);
  normalize_peak(out, amplitude);
  return out;
}

inline RealField band_limited(const RealField& f) {
  SpectralField h = to_spectral(f);
  dealias_inplace(h);
  return to_real(h);
}

// Portable uniform in [0,1) and standard normal from a 64-bit Mersenne twister.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// Smooth random field: white noise filtered by exp(-|xi|^2 w^2 / 2), mean removed.
inline SpectralField smooth_noise(const Grid& g, int components, double width, NormalStream& rng) {
  RealField noise(g, components);
  for (auto& x : noise.values()) x = rng.normal();
  SpectralField h = to_spectral(noise);
  h = apply_multiplier(h, [width](const Mode& m) { return std::exp(-0.5 * m.norm2 * width * width); });
  for (int c = 0; c < components; ++c) h.component(c)[0] = Complex{};
  dealias_inplace(h);
  return h;
}

}  // namespace detail

/// Builds the initial state of a named preset.
///
/// coupled-small: rho = eps (G + floor), u = eps-swirl, v = eps-solenoidal Gaussian.
/// coupled-random: coupled-small plus seeded smooth perturbations.
/// heat-only: rho = eps floor, u = 0, v as above.
/// zero-velocity: rho as coupled-small, u = v = 0.
inline SimState initial_data(const std::string& preset, const Grid& g, double epsilon, std::uint64_t seed = 1) {
  if (!(epsilon > 0.0)) throw Error(ErrorKind::invalid_argument, "preset amplitude must be positive");
  using P = PresetShape;
  const double floor = epsilon * P::floor_fraction;

  auto density_bump = [&]() {
    RealField rho = detail::gaussian_bump(g, P::rho_width);
    rho *= epsilon;
    for (auto& x : rho.values()) x += floor;
    return detail::band_limited(rho);
  };

  SimState s(g);
  if (preset == "coupled-small" || preset == "coupled-random") {
    s.rho = density_bump();
    s.u = detail::swirl(g, P::u_width, epsilon);
    s.v = detail::solenoidal_gaussian(g, P::v_width, epsilon);
    if (preset == "coupled-random") {
      detail::NormalStream rng(seed);
      const double amp = P::random_fraction * epsilon;
      RealField du = to_real(detail::smooth_noise(g, g.dim(), P::u_width, rng));
      SpectralField dvh = detail::smooth_noise(g, g.dim(), P::v_width, rng);
      leray_project_inplace(dvh);
      RealField dv = to_real(dvh);
      RealField drho = to_real(detail::smooth_noise(g, 1, P::rho_width, rng));
      detail::normalize_peak(du, amp);
      detail::normalize_peak(dv, amp);
      detail::normalize_peak(drho, 0.5 * floor);
      s.u += du;
      s.v += dv;
      s.rho += drho;
    }
  } else if (preset == "heat-only") {
    for (auto& x : s.rho.values()) x = floor;
    s.v = detail::solenoidal_gaussian(g, P::v_width, epsilon);
  } else if (preset == "zero-velocity") {
    s.rho = density_bump();
  } else {
    throw Error(ErrorKind::invalid_argument, "unknown preset '" + preset + "'");
  }
  double min_rho = s.rho.component(0)[0];
  for (double x : s.rho.values()) min_rho = std::min(min_rho, x);
  if (!(min_rho > 0.0)) throw Error(ErrorKind::vacuum, "preset produced a non-positive density");
  return s;
}

inline SimState initial_data(const SolverConfig& cfg) {
  return initial_data(cfg.preset, cfg.grid(), cfg.epsilon, cfg.seed);
}

}  // namespace pens
