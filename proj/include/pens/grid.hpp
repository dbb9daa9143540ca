#pragma once

#include <fftw3.h>

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "pens/error.hpp"

namespace pens {

namespace detail {

// The FFTW planner is not reentrant; execution on distinct arrays is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Per-mode lookup tables for the half-complex (r2c) layout.
struct ModeTable {
  // Full wavenumbers; the last-axis Nyquist index carries +N/2.
  std::array<std::vector<double>, 3> xi;
  // Wavenumbers used by odd derivatives and the Leray projector: the Nyquist
  // index of every axis maps to 0.
  std::array<std::vector<double>, 3> dxi;
  std::array<std::vector<int>, 3> index;  // signed integer frequency per axis
  std::vector<double> norm2;              // |xi|^2 with full wavenumbers
  std::vector<double> weight;             // 1 on self-conjugate planes, else 2
  std::vector<unsigned char> keep;        // 2/3-rule mask
  std::vector<std::size_t> partner;       // index of -xi (valid on self-conjugate planes)
};

class FftPlans {
 public:
  FftPlans(int dim, std::size_t n) {
    const std::size_t real_size = dim == 2 ? n * n : n * n * n;
    const std::size_t spec_size = (dim == 2 ? n : n * n) * (n / 2 + 1);
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    double* r = fftw_alloc_real(real_size);
    fftw_complex* c = fftw_alloc_complex(spec_size);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    const int ni = static_cast<int>(n);
    if (dim == 2) {
      forward_ = fftw_plan_dft_r2c_2d(ni, ni, r, c, flags);
      inverse_ = fftw_plan_dft_c2r_2d(ni, ni, c, r, flags);
    } else {
      forward_ = fftw_plan_dft_r2c_3d(ni, ni, ni, r, c, flags);
      inverse_ = fftw_plan_dft_c2r_3d(ni, ni, ni, c, r, flags);
    }
    fftw_free(r);
    fftw_free(c);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
  ~FftPlans() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }

  fftw_plan forward() const { return forward_; }
  fftw_plan inverse() const { return inverse_; }

 private:
  fftw_plan forward_{};
  fftw_plan inverse_{};
};

struct GridData {
  ModeTable modes;
  FftPlans plans;
  GridData(int dim, std::size_t n) : plans(dim, n) {}
};

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Signed frequency of FFT-ordered index i on an axis of n points.
inline int signed_frequency(std::size_t i, std::size_t n) {
  return i < n / 2 ? static_cast<int>(i) : static_cast<int>(i) - static_cast<int>(n);
}

}  // namespace detail

/// Uniform periodic grid on [0, L)^d with N points per axis.
///
/// Real samples are stored row-major with the last axis fastest. Spectral
/// coefficients use the half-complex layout of a real-to-complex transform:
/// the last axis keeps indices 0..N/2 and the negative half is implied by
/// conjugate symmetry.
class Grid {
 public:
  Grid(int dim, std::size_t n, double length) : dim_(dim), n_(n), length_(length) {
    if (dim != 2 && dim != 3) {
      throw Error(ErrorKind::invalid_argument, "grid dimension must be 2 or 3, got " + std::to_string(dim));
    }
    if (n < 8 || !detail::is_power_of_two(n)) {
      throw Error(ErrorKind::invalid_argument, "grid N must be a power of two >= 8, got " + std::to_string(n));
    }
    if (!(length > 0.0) || !std::isfinite(length)) {
      throw Error(ErrorKind::invalid_argument, "grid length must be positive and finite");
    }
    auto data = std::make_shared<detail::GridData>(dim, n);
    build_modes(data->modes);
    data_ = std::move(data);
  }

  int dim() const { return dim_; }
  std::size_t n() const { return n_; }
  double length() const { return length_; }
  double dx() const { return length_ / static_cast<double>(n_); }
  double dk() const { return 2.0 * std::numbers::pi / length_; }
  double cell_volume() const { return std::pow(dx(), dim_); }
  double mode_volume() const { return std::pow(dk(), dim_); }
  std::size_t half() const { return n_ / 2 + 1; }
  std::size_t real_size() const { return dim_ == 2 ? n_ * n_ : n_ * n_ * n_; }
  std::size_t spectral_size() const { return (dim_ == 2 ? n_ : n_ * n_) * half(); }

  const detail::ModeTable& modes() const { return data_->modes; }
  const detail::FftPlans& plans() const { return data_->plans; }

  /// Coordinates of real-space sample `idx`.
  std::array<double, 3> point(std::size_t idx) const {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int a = dim_ - 1; a >= 0; --a) {
      x[a] = static_cast<double>(idx % n_) * dx();
      idx /= n_;
    }
    return x;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.dim_ == b.dim_ && a.n_ == b.n_ && a.length_ == b.length_;
  }

 private:
  void build_modes(detail::ModeTable& t) const {
    const std::size_t size = spectral_size();
    for (int a = 0; a < 3; ++a) {
      t.xi[a].assign(size, 0.0);
      t.dxi[a].assign(size, 0.0);
      t.index[a].assign(size, 0);
    }
    t.norm2.assign(size, 0.0);
    t.weight.assign(size, 0.0);
    t.keep.assign(size, 0);
    t.partner.assign(size, 0);

    const std::size_t h = half();
    const int nyq = static_cast<int>(n_ / 2);
    const double k = dk();
    for (std::size_t idx = 0; idx < size; ++idx) {
      std::array<std::size_t, 3> ii{0, 0, 0};
      std::size_t rest = idx;
      for (int a = dim_ - 1; a >= 0; --a) {
        const std::size_t extent = a == dim_ - 1 ? h : n_;
        ii[a] = rest % extent;
        rest /= extent;
      }
      bool keep = true;
      double n2 = 0.0;
      std::size_t partner = 0;
      for (int a = 0; a < dim_; ++a) {
        const bool last = a == dim_ - 1;
        const int f = last ? static_cast<int>(ii[a]) : detail::signed_frequency(ii[a], n_);
        t.index[a][idx] = f;
        t.xi[a][idx] = k * f;
        t.dxi[a][idx] = (std::abs(f) == nyq) ? 0.0 : k * f;
        n2 += (k * f) * (k * f);
        if (3 * std::abs(f) > static_cast<int>(n_)) keep = false;
        const std::size_t extent = last ? h : n_;
        const std::size_t mirrored = last ? ii[a] : (n_ - ii[a]) % n_;
        partner = partner * extent + mirrored;
      }
      t.norm2[idx] = n2;
      const std::size_t last_i = ii[dim_ - 1];
      t.weight[idx] = (last_i == 0 || last_i == n_ / 2) ? 1.0 : 2.0;
      t.keep[idx] = keep ? 1 : 0;
      t.partner[idx] = partner;
    }
  }

  int dim_;
  std::size_t n_;
  double length_;
  std::shared_ptr<const detail::GridData> data_;
};

/// Wavenumbers along one axis in standard FFT order: (2pi/L) * {0,1,...,N/2-1,-N/2,...,-1}.
inline std::vector<double> wavenumber_grid(std::size_t n, double length) {
  std::vector<double> k(n);
  const double dk = 2.0 * std::numbers::pi / length;
  for (std::size_t i = 0; i < n; ++i) k[i] = dk * detail::signed_frequency(i, n);
  return k;
}

inline std::vector<double> wavenumber_grid(const Grid& grid) {
  return wavenumber_grid(grid.n(), grid.length());
}

}  // namespace pens
