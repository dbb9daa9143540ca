#pragma once

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <type_traits>
#include <vector>

#include "pens/error.hpp"
#include "pens/field.hpp"
#include "pens/grid.hpp"

namespace pens {

/// Wavevector handed to multiplier symbols.
struct Mode {
  std::array<double, 3> xi{0.0, 0.0, 0.0};
  double norm2 = 0.0;
  int dim = 2;

  double norm() const { return std::sqrt(norm2); }
};

namespace detail {

inline double forward_scale(const Grid& g) {
  return g.cell_volume() / std::pow(2.0 * std::numbers::pi, 0.5 * g.dim());
}

inline double inverse_scale(const Grid& g) {
  return std::pow(2.0 * std::numbers::pi, 0.5 * g.dim()) / std::pow(g.length(), g.dim());
}

inline void check_conjugate_symmetry(const Grid& g, std::span<const Complex> z) {
  const auto& modes = g.modes();
  double scale2 = 0.0;
  for (const auto& c : z) scale2 = std::max(scale2, std::norm(c));
  if (scale2 == 0.0) return;
  double worst2 = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (modes.weight[i] != 1.0) continue;
    worst2 = std::max(worst2, std::norm(z[i] - std::conj(z[modes.partner[i]])));
  }
  if (worst2 > 1e-20 * scale2) {
    throw Error(ErrorKind::symmetry_violation, "spectral field is not conjugate symmetric (relative defect " +
                                                   std::to_string(std::sqrt(worst2 / scale2)) + ")");
  }
}

}  // namespace detail

/// Forward transform of every component.
inline SpectralField to_spectral(const RealField& f) {
  const Grid& g = f.grid();
  SpectralField out(g, f.components());
  const double scale = detail::forward_scale(g);
  for (int c = 0; c < f.components(); ++c) {
    auto in = f.component(c);
    auto dst = out.component(c);
    // r2c plans leave the input untouched, the const_cast only satisfies the C API.
    fftw_execute_dft_r2c(g.plans().forward(), const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(dst.data()));
    for (auto& z : dst) z *= scale;
  }
  return out;
}

/// Inverse transform; rejects input that violates conjugate symmetry beyond
/// 1e-10 relative on the self-conjugate planes.
inline RealField to_real(const SpectralField& f) {
  const Grid& g = f.grid();
  RealField out(g, f.components());
  const double scale = detail::inverse_scale(g);
  std::vector<Complex> scratch(g.spectral_size());
  for (int c = 0; c < f.components(); ++c) {
    auto src = f.component(c);
    detail::check_conjugate_symmetry(g, src);
    std::copy(src.begin(), src.end(), scratch.begin());
    auto dst = out.component(c);
    fftw_execute_dft_c2r(g.plans().inverse(), reinterpret_cast<fftw_complex*>(scratch.data()), dst.data());
    for (auto& x : dst) x *= scale;
  }
  out.check_finite();
  return out;
}

inline SpectralField transform(const RealField& f) { return to_spectral(f); }
inline RealField transform(const SpectralField& f) { return to_real(f); }

inline Mode mode_at(const Grid& g, std::size_t idx) {
  const auto& m = g.modes();
  Mode mode;
  mode.dim = g.dim();
  for (int a = 0; a < g.dim(); ++a) mode.xi[a] = m.xi[a][idx];
  mode.norm2 = m.norm2[idx];
  return mode;
}

/// Coefficientwise product m(xi) * f^(xi).
///
/// A symbol that is not finite at xi = 0 (e.g. |xi|^-a) is accepted only when
/// the mean mode of every component is exactly zero; the output mean stays 0.
template <typename Symbol>
SpectralField apply_multiplier(const SpectralField& f, Symbol&& symbol) {
  const Grid& g = f.grid();
  SpectralField out(g, f.components());
  const std::size_t size = g.spectral_size();
  for (std::size_t i = 0; i < size; ++i) {
    const auto m = symbol(mode_at(g, i));
    const bool finite = std::isfinite(std::abs(Complex(m)));
    for (int c = 0; c < f.components(); ++c) {
      const Complex z = f.component(c)[i];
      if (!finite) {
        if (i == 0 && z == Complex{}) continue;
        throw Error(ErrorKind::zero_frequency_singularity,
                    i == 0 ? "zero-frequency singularity: symbol is singular at xi=0 and the mean mode is nonzero"
                           : "multiplier symbol is not finite at a nonzero mode");
      }
      out.component(c)[i] = m * z;
    }
  }
  return out;
}

/// Component j of the result is i xi_j f^.
inline SpectralField gradient(const SpectralField& f) {
  if (f.components() != 1) throw Error(ErrorKind::invalid_argument, "gradient expects a scalar field");
  const Grid& g = f.grid();
  const auto& m = g.modes();
  SpectralField out(g, g.dim());
  auto src = f.component(0);
  for (int a = 0; a < g.dim(); ++a) {
    auto dst = out.component(a);
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = Complex(0.0, m.dxi[a][i]) * src[i];
  }
  return out;
}

/// sum_j i xi_j w^_j.
inline SpectralField divergence(const SpectralField& w) {
  const Grid& g = w.grid();
  if (w.components() != g.dim()) throw Error(ErrorKind::invalid_argument, "divergence expects a d-vector field");
  const auto& m = g.modes();
  SpectralField out(g, 1);
  auto dst = out.component(0);
  for (int a = 0; a < g.dim(); ++a) {
    auto src = w.component(a);
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] += Complex(0.0, m.dxi[a][i]) * src[i];
  }
  return out;
}

/// In-place Leray projection w^ - xi (xi . w^)/|xi|^2 with P(0) = I.
inline void leray_project_inplace(SpectralField& w) {
  const Grid& g = w.grid();
  const int d = g.dim();
  if (w.components() != d) throw Error(ErrorKind::invalid_argument, "leray projection expects a d-vector field");
  const auto& m = g.modes();
  const std::size_t size = g.spectral_size();
  std::array<Complex*, 3> comp{nullptr, nullptr, nullptr};
  for (int a = 0; a < d; ++a) comp[a] = w.component(a).data();
  for (std::size_t i = 0; i < size; ++i) {
    double k2 = 0.0;
    for (int a = 0; a < d; ++a) k2 += m.dxi[a][i] * m.dxi[a][i];
    if (k2 == 0.0) continue;
    Complex dot{};
    for (int a = 0; a < d; ++a) dot += m.dxi[a][i] * comp[a][i];
    const Complex s = dot / k2;
    for (int a = 0; a < d; ++a) comp[a][i] -= m.dxi[a][i] * s;
  }
}

inline SpectralField leray_project(SpectralField w) {
  leray_project_inplace(w);
  return w;
}

/// 2/3 rule: zero every mode with some axis index |n_j| > N/3.
inline void dealias_inplace(SpectralField& f) {
  const auto& keep = f.grid().modes().keep;
  for (int c = 0; c < f.components(); ++c) {
    auto z = f.component(c);
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (!keep[i]) z[i] = Complex{};
    }
  }
}

inline SpectralField dealias(SpectralField f) {
  dealias_inplace(f);
  return f;
}

/// Multiplies real-space samples pointwise: out_c = a_c * b (b scalar) or a_c * b_c.
inline RealField pointwise_product(const RealField& a, const RealField& b) {
  if (!(a.grid() == b.grid()) || (b.components() != 1 && b.components() != a.components())) {
    throw Error(ErrorKind::invalid_argument, "pointwise product shape mismatch");
  }
  RealField out(a.grid(), a.components());
  for (int c = 0; c < a.components(); ++c) {
    auto x = a.component(c);
    auto y = b.component(b.components() == 1 ? 0 : c);
    auto dst = out.component(c);
    for (std::size_t i = 0; i < x.size(); ++i) dst[i] = x[i] * y[i];
  }
  return out;
}

}  // namespace pens
