#pragma once

#include <cstdint>
#include <random>

#include "pens/pens.hpp"

namespace testing_helpers {

inline pens::RealField random_field(const pens::Grid& g, int comps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  pens::RealField f(g, comps);
  for (auto& x : f.values()) x = u(rng);
  return f;
}

// Random field with only modes below the dealias cutoff.
inline pens::RealField random_band_limited(const pens::Grid& g, int comps, std::uint64_t seed) {
  pens::SpectralField h = pens::to_spectral(random_field(g, comps, seed));
  pens::dealias_inplace(h);
  return pens::to_real(h);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(std::span<const pens::Complex> a, std::span<const pens::Complex> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(std::span<const pens::Complex> a) {
  double m = 0.0;
  for (const auto& z : a) m = std::max(m, std::abs(z));
  return m;
}

// Index of the mode with signed integer frequencies n in the half-complex layout.
inline std::size_t mode_index(const pens::Grid& g, std::array<int, 3> n) {
  const std::size_t N = g.n();
  std::size_t idx = 0;
  for (int a = 0; a < g.dim(); ++a) {
    const bool last = a == g.dim() - 1;
    const std::size_t extent = last ? g.half() : N;
    const std::size_t i = n[a] >= 0 ? static_cast<std::size_t>(n[a]) : N - static_cast<std::size_t>(-n[a]);
    idx = idx * extent + i;
  }
  return idx;
}

}  // namespace testing_helpers
