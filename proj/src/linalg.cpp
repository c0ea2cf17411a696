#include "bdf2spde/linalg.hpp"

#include <cmath>

#include "bdf2spde/errors.hpp"

namespace bdf2spde {

void matvec(const TriDiag& matrix, std::span<const double> x, std::span<double> out) {
  const std::size_t n = matrix.dim();
  if (x.size() != n) throw DimensionMismatch("matvec", n, x.size());
  if (out.size() != n) throw DimensionMismatch("matvec", n, out.size());
  if (n == 0) return;
  for (std::size_t i = 0; i < n; ++i) {
    double row = matrix.diag[i] * x[i];
    if (i > 0) row += matrix.off[i - 1] * x[i - 1];
    if (i + 1 < n) row += matrix.off[i] * x[i + 1];
    out[i] = row;
  }
}

std::vector<double> matvec(const TriDiag& matrix, std::span<const double> x) {
  std::vector<double> out(matrix.dim());
  matvec(matrix, x, out);
  return out;
}

TriDiagFactorization::TriDiagFactorization(const TriDiag& matrix)
    : inv_pivot_(matrix.dim()), multiplier_(matrix.dim(), 0.0), upper_(matrix.off) {
  const std::size_t n = matrix.dim();
  if (matrix.off.size() + 1 != n && n > 0) throw DimensionMismatch("TriDiagFactorization", n - 1, matrix.off.size());
  double pivot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    pivot = matrix.diag[i];
    if (i > 0) {
      multiplier_[i] = matrix.off[i - 1] * inv_pivot_[i - 1];
      pivot -= multiplier_[i] * matrix.off[i - 1];
    }
    if (pivot == 0.0 || !std::isfinite(pivot)) throw SingularSystem(i);
    inv_pivot_[i] = 1.0 / pivot;
  }
}

void TriDiagFactorization::solve_in_place(std::span<double> rhs) const {
  const std::size_t n = dim();
  if (rhs.size() != n) throw DimensionMismatch("TriDiagFactorization::solve", n, rhs.size());
  if (n == 0) return;
  for (std::size_t i = 1; i < n; ++i) rhs[i] -= multiplier_[i] * rhs[i - 1];
  rhs[n - 1] *= inv_pivot_[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper_[i] * rhs[i + 1]) * inv_pivot_[i];
}

std::vector<double> TriDiagFactorization::solve(std::span<const double> rhs) const {
  std::vector<double> x(rhs.begin(), rhs.end());
  solve_in_place(x);
  return x;
}

std::vector<double> solve(const TriDiag& matrix, std::span<const double> rhs) {
  if (rhs.size() != matrix.dim()) throw DimensionMismatch("solve", matrix.dim(), rhs.size());
  return TriDiagFactorization(matrix).solve(rhs);
}

}  // namespace bdf2spde
