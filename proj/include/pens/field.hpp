#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pens/error.hpp"
#include "pens/grid.hpp"

namespace pens {

using Complex = std::complex<double>;

namespace detail {

// Component-major storage shared by real and spectral fields.
template <typename T, typename Derived>
class FieldStorage {
 public:
  const Grid& grid() const { return grid_; }
  int components() const { return components_; }
  std::size_t size_per_component() const { return per_component_; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  std::span<T> component(int c) {
    return std::span<T>(data_).subspan(static_cast<std::size_t>(c) * per_component_, per_component_);
  }
  std::span<const T> component(int c) const {
    return std::span<const T>(data_).subspan(static_cast<std::size_t>(c) * per_component_, per_component_);
  }

  Derived& operator+=(const Derived& other) {
    check_compatible(other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return self();
  }
  Derived& operator-=(const Derived& other) {
    check_compatible(other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return self();
  }
  Derived& operator*=(double a) {
    for (auto& x : data_) x *= a;
    return self();
  }
  friend Derived operator+(Derived a, const Derived& b) { return a += b; }
  friend Derived operator-(Derived a, const Derived& b) { return a -= b; }
  friend Derived operator*(double a, Derived b) { return b *= a; }

  void check_compatible(const FieldStorage& other) const {
    if (!(grid_ == other.grid_) || components_ != other.components_) {
      throw Error(ErrorKind::invalid_argument, "field grid or component count mismatch");
    }
  }

 protected:
  FieldStorage(Grid grid, int components, std::size_t per_component)
      : grid_(std::move(grid)), components_(components), per_component_(per_component) {
    if (components < 1) throw Error(ErrorKind::invalid_argument, "field needs at least one component");
    data_.assign(per_component_ * static_cast<std::size_t>(components_), T{});
  }

  Grid grid_;
  int components_;
  std::size_t per_component_;
  std::vector<T> data_;

 private:
  Derived& self() { return static_cast<Derived&>(*this); }
};

}  // namespace detail

/// Real samples at grid points, row-major, last axis fastest.
class RealField : public detail::FieldStorage<double, RealField> {
 public:
  RealField(Grid grid, int components)
      : FieldStorage(grid, components, grid.real_size()) {}

  RealField(Grid grid, int components, std::vector<double> values)
      : FieldStorage(grid, components, grid.real_size()) {
    if (values.size() != data_.size()) {
      throw Error(ErrorKind::invalid_argument, "real field expects " + std::to_string(data_.size()) +
                                                   " values, got " + std::to_string(values.size()));
    }
    data_ = std::move(values);
    check_finite();
  }

  void check_finite() const {
    for (double x : data_) {
      if (!std::isfinite(x)) throw Error(ErrorKind::non_finite, "real field contains NaN or Inf");
    }
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
  }
};

/// Fourier coefficients in the half-complex layout of `Grid`, normalized so
/// that sum_x |f|^2 dx^d = sum_xi |f^|^2 dxi^d over the full spectrum.
class SpectralField : public detail::FieldStorage<Complex, SpectralField> {
 public:
  SpectralField(Grid grid, int components)
      : FieldStorage(grid, components, grid.spectral_size()) {}

  bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](const Complex& z) { return z == Complex{}; });
  }
};

/// Samples a scalar function f(x) at every grid point.
template <typename F>
RealField sample_scalar(const Grid& grid, F&& f) {
  RealField out(grid, 1);
  auto values = out.component(0);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = f(grid.point(i));
  out.check_finite();
  return out;
}

/// Samples a vector function f(x) -> std::array<double, 3>; only the first d
/// entries are used.
template <typename F>
RealField sample_vector(const Grid& grid, F&& f) {
  const int d = grid.dim();
  RealField out(grid, d);
  for (std::size_t i = 0; i < grid.real_size(); ++i) {
    const std::array<double, 3> value = f(grid.point(i));
    for (int c = 0; c < d; ++c) out.component(c)[i] = value[c];
  }
  out.check_finite();
  return out;
}

}  // namespace pens
