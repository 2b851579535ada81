#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace corrbound {

/// Dense row-major n x n matrix of doubles.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0);
  /// Builds from nested rows; throws InvalidConfig unless the rows form a
  /// non-empty square grid of finite values.
  static SquareMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t dim() const noexcept { return n_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * n_, n_};
  }
  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * n_, n_}; }

  std::span<const double> values() const noexcept { return data_; }

  bool all_finite() const noexcept;
  bool is_symmetric() const noexcept;

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Frobenius norm of a - b, accumulated row-major left to right.
double frobenius_distance(const SquareMatrix& a, const SquareMatrix& b);

/// Entrywise maximum of |a - b|.
double max_abs_distance(const SquareMatrix& a, const SquareMatrix& b);

}  // namespace corrbound
