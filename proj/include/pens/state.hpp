#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "pens/error.hpp"
#include "pens/field.hpp"
#include "pens/grid.hpp"
#include "pens/spectral.hpp"

namespace pens {

/// Density, Euler velocity and Navier-Stokes velocity at one instant.
struct SimState {
  Grid grid;
  RealField rho;
  RealField u;
  RealField v;
  double t = 0.0;

  explicit SimState(const Grid& g) : grid(g), rho(g, 1), u(g, g.dim()), v(g, g.dim()) {}
  SimState(const Grid& g, RealField rho_, RealField u_, RealField v_, double t_ = 0.0)
      : grid(g), rho(std::move(rho_)), u(std::move(u_)), v(std::move(v_)), t(t_) {
    if (!(rho.grid() == g) || !(u.grid() == g) || !(v.grid() == g) || rho.components() != 1 ||
        u.components() != g.dim() || v.components() != g.dim()) {
      throw Error(ErrorKind::invalid_argument, "state fields do not match the grid");
    }
  }
};

/// The same state held as Fourier coefficients; this is what the stepper evolves.
struct SpectralState {
  SpectralField rho;
  SpectralField u;
  SpectralField v;
  double t = 0.0;

  const Grid& grid() const { return rho.grid(); }
};

inline SpectralState to_spectral(const SimState& s) {
  return SpectralState{to_spectral(s.rho), to_spectral(s.u), to_spectral(s.v), s.t};
}

inline SimState to_real(const SpectralState& s) {
  return SimState(s.grid(), to_real(s.rho), to_real(s.u), to_real(s.v), s.t);
}

struct SolverConfig {
  int d = 2;
  std::size_t n = 128;
  double length = 64.0 * std::numbers::pi;
  double dt_max = 0.05;
  double cfl_safety = 0.4;
  double t_end = 10.0;
  double sample_every = 0.5;
  std::string preset = "coupled-small";
  double epsilon = 1e-2;
  std::uint64_t seed = 1;

  Grid grid() const { return Grid(d, n, length); }

  void validate() const {
    (void)grid();
    if (!(dt_max > 0.0)) throw Error(ErrorKind::config, "dt_max must be positive");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw Error(ErrorKind::config, "cfl_safety must lie in (0,1]");
    if (!(t_end > 0.0)) throw Error(ErrorKind::config, "t_end must be positive");
    if (!(sample_every > 0.0)) throw Error(ErrorKind::config, "sample_every must be positive");
    if (!(epsilon > 0.0)) throw Error(ErrorKind::config, "epsilon must be positive");
  }
};

}  // namespace pens
