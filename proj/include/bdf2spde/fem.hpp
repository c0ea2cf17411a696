#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace bdf2spde {

/// Nodal values of a P1 function at the interior nodes x_1..x_N (boundary values are 0).
using Coeffs = std::vector<double>;

/// Symmetric tridiagonal matrix stored as its diagonal and one off-diagonal.
struct TriDiag {
  std::vector<double> diag;
  std::vector<double> off;  // off[i] couples rows i and i+1

  TriDiag() = default;
  explicit TriDiag(std::size_t dim) : diag(dim, 0.0), off(dim > 0 ? dim - 1 : 0, 0.0) {}

  std::size_t dim() const noexcept { return diag.size(); }
};

/// Uniform piecewise-linear finite element space on (0,1) with homogeneous
/// Dirichlet conditions. Only the n_dof interior nodes x_i = i*h carry unknowns.
class FemSpace {
 public:
  explicit FemSpace(std::size_t n_dof);

  std::size_t n_dof() const noexcept { return n_dof_; }
  std::size_t n_elements() const noexcept { return n_dof_ + 1; }
  double h() const noexcept { return h_; }
  /// Coordinate of node i, i = 0..n_dof+1 (0 and n_dof+1 are the boundary).
  double node(std::size_t i) const noexcept { return static_cast<double>(i) * h_; }

 private:
  std::size_t n_dof_;
  double h_;
};

TriDiag assemble_mass(const FemSpace& space);
TriDiag assemble_stiffness_linear(const FemSpace& space);

/// Nodal interpolant I_h f. Throws std::invalid_argument if f is not finite at a node.
Coeffs interpolate(const std::function<double(double)>& f, const FemSpace& space);

/// y^T T x.
double bilinear(const TriDiag& matrix, std::span<const double> x, std::span<const double> y);
/// x^T T x.
double quadratic_form(const TriDiag& matrix, std::span<const double> x);

/// Discrete L2 norm sqrt(x^T M x).
double h_norm(std::span<const double> x, const TriDiag& mass);
/// Discrete H1_0 seminorm sqrt(x^T A x).
double v_seminorm(std::span<const double> x, const TriDiag& stiffness);

}  // namespace bdf2spde
