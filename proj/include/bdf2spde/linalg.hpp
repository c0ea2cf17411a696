#pragma once

#include <span>
#include <vector>

#include "bdf2spde/fem.hpp"

namespace bdf2spde {

/// Exact tridiagonal product T x.
std::vector<double> matvec(const TriDiag& matrix, std::span<const double> x);
void matvec(const TriDiag& matrix, std::span<const double> x, std::span<double> out);

/// LU factors of a TriDiag (Thomas algorithm, no pivoting). Intended for
/// strictly diagonally dominant or SPD systems; throws SingularSystem on a zero pivot.
class TriDiagFactorization {
 public:
  explicit TriDiagFactorization(const TriDiag& matrix);

  std::size_t dim() const noexcept { return inv_pivot_.size(); }

  void solve_in_place(std::span<double> rhs) const;
  std::vector<double> solve(std::span<const double> rhs) const;

 private:
  std::vector<double> inv_pivot_;    // 1 / modified diagonal
  std::vector<double> multiplier_;   // forward-elimination multipliers l_i = off_{i-1} / pivot_{i-1}
  std::vector<double> upper_;        // super-diagonal (equals off by symmetry)
};

/// One-shot solve of T x = rhs.
std::vector<double> solve(const TriDiag& matrix, std::span<const double> rhs);

}  // namespace bdf2spde
