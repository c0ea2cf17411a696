#include "bdf2spde/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "bdf2spde/errors.hpp"

namespace bdf2spde {

FemSpace::FemSpace(std::size_t n_dof) : n_dof_(n_dof), h_(0.0) {
  if (n_dof == 0) throw std::invalid_argument("FemSpace: need at least one interior node");
  h_ = 1.0 / static_cast<double>(n_dof + 1);
}

TriDiag assemble_mass(const FemSpace& space) {
  const double h = space.h();
  TriDiag m(space.n_dof());
  std::fill(m.diag.begin(), m.diag.end(), 2.0 * h / 3.0);
  std::fill(m.off.begin(), m.off.end(), h / 6.0);
  return m;
}

TriDiag assemble_stiffness_linear(const FemSpace& space) {
  const double h = space.h();
  TriDiag a(space.n_dof());
  std::fill(a.diag.begin(), a.diag.end(), 2.0 / h);
  std::fill(a.off.begin(), a.off.end(), -1.0 / h);
  return a;
}

Coeffs interpolate(const std::function<double(double)>& f, const FemSpace& space) {
  Coeffs values(space.n_dof());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = f(space.node(i + 1));
    if (!std::isfinite(v)) {
      throw std::invalid_argument("interpolate: function is not finite at node " + std::to_string(i + 1));
    }
    values[i] = v;
  }
  return values;
}

double bilinear(const TriDiag& matrix, std::span<const double> x, std::span<const double> y) {
  const std::size_t n = matrix.dim();
  if (x.size() != n) throw DimensionMismatch("bilinear", n, x.size());
  if (y.size() != n) throw DimensionMismatch("bilinear", n, y.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = matrix.diag[i] * x[i];
    if (i > 0) row += matrix.off[i - 1] * x[i - 1];
    if (i + 1 < n) row += matrix.off[i] * x[i + 1];
    sum += y[i] * row;
  }
  return sum;
}

double quadratic_form(const TriDiag& matrix, std::span<const double> x) { return bilinear(matrix, x, x); }

double h_norm(std::span<const double> x, const TriDiag& mass) {
  return std::sqrt(std::max(0.0, quadratic_form(mass, x)));
}

double v_seminorm(std::span<const double> x, const TriDiag& stiffness) {
  return std::sqrt(std::max(0.0, quadratic_form(stiffness, x)));
}

}  // namespace bdf2spde
