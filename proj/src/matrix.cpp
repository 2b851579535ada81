#include "corrbound/matrix.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "corrbound/errors.hpp"

namespace corrbound {

SquareMatrix::SquareMatrix(std::size_t n, double fill) : n_(n), data_(n * n, fill) {}

SquareMatrix SquareMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  if (n == 0) throw Error(ErrorCode::InvalidConfig, "matrix must have at least one row");
  SquareMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw Error(ErrorCode::InvalidConfig, "row " + std::to_string(i) + " has length " +
                                                std::to_string(rows[i].size()) +
                                                ", expected " + std::to_string(n));
    }
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  if (!m.all_finite()) throw Error(ErrorCode::InvalidConfig, "matrix entries must be finite");
  return m;
}

bool SquareMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool SquareMatrix::is_symmetric() const noexcept {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if ((*this)(i, j) != (*this)(j, i)) return false;
  return true;
}

double frobenius_distance(const SquareMatrix& a, const SquareMatrix& b) {
  assert(a.dim() == b.dim());
  const auto av = a.values();
  const auto bv = b.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = av[i] - bv[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double max_abs_distance(const SquareMatrix& a, const SquareMatrix& b) {
  assert(a.dim() == b.dim());
  const auto av = a.values();
  const auto bv = b.values();
  double worst = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) worst = std::max(worst, std::abs(av[i] - bv[i]));
  return worst;
}

}  // namespace corrbound
