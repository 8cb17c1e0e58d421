#pragma once

// Uniform cell-centred discretisation of [-1, 1], grid functions and
// midpoint quadrature with the weights used throughout the library.

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfp/error.hpp"

namespace cfp {

/// Diffusion coefficient H(w) = 1 - w^2.
inline double diffusion_h(double w) { return (1.0 - w) * (1.0 + w); }

class Grid {
 public:
  explicit Grid(std::size_t n_cells) {
    if (n_cells == 0) throw Error(ErrorKind::InvalidArgument, "grid needs at least one cell");
    n_ = n_cells;
    h_ = 2.0 / static_cast<double>(n_cells);
    auto data = std::make_shared<Data>();
    data->centers.resize(n_);
    data->h_centers.resize(n_);
    data->faces.resize(n_ + 1);
    data->h_faces.resize(n_ + 1);
    for (std::size_t i = 0; i < n_; ++i) {
      // Symmetric construction: w_i = -w_{n-1-i} bit for bit.
      const double w = -1.0 + (static_cast<double>(i) + 0.5) * h_;
      data->centers[i] = w;
    }
    for (std::size_t i = 0; i < n_ / 2; ++i) data->centers[n_ - 1 - i] = -data->centers[i];
    if (n_ % 2 == 1) data->centers[n_ / 2] = 0.0;
    for (std::size_t i = 0; i <= n_; ++i) {
      data->faces[i] = -1.0 + static_cast<double>(i) * h_;
    }
    for (std::size_t i = 0; i <= n_ / 2; ++i) data->faces[n_ - i] = -data->faces[i];
    if (n_ % 2 == 0) data->faces[n_ / 2] = 0.0;
    for (std::size_t i = 0; i < n_; ++i) data->h_centers[i] = diffusion_h(data->centers[i]);
    for (std::size_t i = 0; i <= n_; ++i) data->h_faces[i] = diffusion_h(data->faces[i]);
    data_ = std::move(data);
  }

  std::size_t size() const noexcept { return n_; }
  double h() const noexcept { return h_; }

  std::span<const double> centers() const noexcept { return data_->centers; }
  std::span<const double> faces() const noexcept { return data_->faces; }
  /// H at cell centres, strictly positive.
  std::span<const double> h_centers() const noexcept { return data_->h_centers; }
  /// H at faces; zero at the two boundary faces.
  std::span<const double> h_faces() const noexcept { return data_->h_faces; }

  double center(std::size_t i) const { return data_->centers[i]; }

  /// Indices of the cell(s) touching w = 0: two for even n, one for odd n.
  std::pair<std::size_t, std::size_t> central_cells() const noexcept {
    if (n_ % 2 == 1) return {n_ / 2, n_ / 2};
    return {n_ / 2 - 1, n_ / 2};
  }

 private:
  struct Data {
    std::vector<double> centers;
    std::vector<double> h_centers;
    std::vector<double> faces;
    std::vector<double> h_faces;
  };

  std::size_t n_ = 0;
  double h_ = 0.0;
  std::shared_ptr<const Data> data_;
};

inline Grid make_grid(std::size_t n_cells) { return Grid(n_cells); }

/// Cell values on a grid.  The grid is shared, so copies are cheap apart
/// from the value vector itself.
class GridFunction {
 public:
  GridFunction(Grid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw Error(ErrorKind::InvalidArgument, "grid function length " + std::to_string(values_.size()) +
                                                  " does not match grid size " + std::to_string(grid_.size()));
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw Error(ErrorKind::NumericalInput, "non-finite grid function value");
    }
  }

  static GridFunction constant(const Grid& grid, double value) {
    return GridFunction(grid, std::vector<double>(grid.size(), value));
  }

  static GridFunction sample(const Grid& grid, const std::function<double(double)>& fn) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = fn(grid.center(i));
    return GridFunction(grid, std::move(v));
  }

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Weight |w|^p H(w)^r w^s applied to phi^q under the integral sign.
struct WeightSpec {
  double abs_power = 0.0;  // p
  double h_power = 0.0;    // r
  int w_power = 0;         // s in {0, 1, 2}
  double q = 1.0;          // power applied to the integrand

  static WeightSpec unit() { return {}; }
  static WeightSpec power(double q) { return {0.0, 0.0, 0, q}; }
  static WeightSpec moment(int s) { return {0.0, 0.0, s, 1.0}; }
  static WeightSpec weighted_norm(double p, double q) { return {p, 0.0, 0, q}; }
  static WeightSpec h_weight(double r, double q = 1.0) { return {0.0, r, 0, q}; }

  void validate() const {
    if (!(abs_power >= 0.0) || !(h_power >= 0.0) || w_power < 0 || w_power > 2 || !(q >= 1.0) ||
        !std::isfinite(abs_power) || !std::isfinite(h_power) || !std::isfinite(q)) {
      throw Error(ErrorKind::InvalidArgument, "weight exponents out of range");
    }
  }

  double weight(double w) const {
    double out = 1.0;
    if (abs_power != 0.0) out *= std::pow(std::abs(w), abs_power);  // |0|^p = 0 for p > 0
    if (h_power != 0.0) out *= std::pow(diffusion_h(w), h_power);
    if (w_power == 1) out *= w;
    if (w_power == 2) out *= w * w;
    return out;
  }
};

namespace detail {
inline double signed_power(double x, double q) {
  if (q == 1.0) return x;
  if (q == 2.0) return x * x;
  if (q == std::floor(q) && q < 64.0) {
    double r = 1.0;
    for (int k = 0; k < static_cast<int>(q); ++k) r *= x;
    return r;
  }
  return std::pow(std::abs(x), q);
}
}  // namespace detail

/// Midpoint value of \int weight(w) phi(w)^q dw.  Integer q keeps the sign
/// of phi; fractional q uses |phi|^q.
inline double quadrature(const GridFunction& phi, const WeightSpec& weight) {
  weight.validate();
  const auto w = phi.grid().centers();
  const auto v = phi.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    sum += weight.weight(w[i]) * detail::signed_power(v[i], weight.q);
  }
  const double result = sum * phi.grid().h();
  if (!std::isfinite(result)) throw Error(ErrorKind::NumericalInput, "non-finite quadrature");
  return result;
}

inline double mass(const GridFunction& f) { return quadrature(f, WeightSpec::unit()); }

/// Nonnegative grid function with a time stamp.  `scaled_time` marks tau = lambda t.
struct DensityState {
  GridFunction f;
  double time = 0.0;
  bool scaled_time = false;
};

/// Samples `datum` at cell centres; rescales to `target_mass` when given.
inline DensityState project_density(const std::function<double(double)>& datum, const Grid& grid,
                                    std::optional<double> target_mass = std::nullopt) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = datum(grid.center(i));
    if (!std::isfinite(x)) throw Error(ErrorKind::InvalidInitialData, "initial datum is not finite");
    if (x < 0.0) {
      throw Error(ErrorKind::InvalidInitialData,
                  "initial datum negative at w=" + std::to_string(grid.center(i)));
    }
    v[i] = x;
  }
  if (target_mass) {
    if (!(*target_mass > 0.0)) throw Error(ErrorKind::InvalidArgument, "target mass must be positive");
    double sum = 0.0;
    for (double x : v) sum += x;
    const double current = sum * grid.h();
    if (!(current > 0.0)) throw Error(ErrorKind::InvalidInitialData, "initial datum has zero mass");
    const double scale = *target_mass / current;
    for (double& x : v) x *= scale;
  }
  return DensityState{GridFunction(grid, std::move(v)), 0.0, false};
}

}  // namespace cfp
