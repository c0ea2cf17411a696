#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bdf2spde/fem.hpp"
#include "bdf2spde/linalg.hpp"
#include "bdf2spde/problems.hpp"
#include "bdf2spde/wiener.hpp"

namespace bdf2spde {

enum class Scheme { bem, bdf2 };

std::string to_string(Scheme scheme);
/// Accepts "bem" / "bdf2" (case-insensitive); throws std::invalid_argument otherwise.
Scheme parse_scheme(const std::string& text);

/// Equidistant grid t_n = n k on [0, T].
struct TemporalGrid {
  double t_final = 1.0;
  std::size_t n_steps = 1;

  double step() const noexcept { return t_final / static_cast<double>(n_steps); }
  void validate() const;
};

/// Fixed-count Newton protocol: always n_min iterations, then continue up to
/// n_max while the residual |F|_inf exceeds tol.
struct NewtonConfig {
  double tol = 1e-12;
  int n_min = 3;
  int n_max = 10;

  void validate() const;
};

struct NewtonResult {
  Coeffs x;
  int iterations = 0;
  double residual = 0.0;               // |F(x)|_inf at the returned iterate
  std::vector<double> residual_history;  // |F|_inf at the start value and after every update
};

/// Solves F(x) = (a M + b A_h(x)) x - rhs = 0 with Jacobian a M + b A*_h(x), starting at `start`.
/// Throws NewtonNonconvergence when the residual is above tol after n_max iterations.
NewtonResult newton_solve(const Problem& problem, const FemSpace& space, const TriDiag& mass, double mass_scale,
                          double drift_scale, std::span<const double> rhs, std::span<const double> start,
                          const NewtonConfig& newton);

/// One backward Euler-Maruyama step:
///   M (X - X_prev) + k A(X) X = M noise_nodal(X_prev, dW).
Coeffs bem_step(const Problem& problem, const FemSpace& space, std::span<const double> x_prev, double k,
                std::span<const double> dw_nodes, const NewtonConfig& newton = {});

/// One BDF2-Maruyama step:
///   M (3X - 4X_prev + X_prev2) + 2k A(X) X = M (3 noise_nodal(X_prev, dW) - noise_nodal(X_prev2, dW_prev)).
Coeffs bdf2_step(const Problem& problem, const FemSpace& space, std::span<const double> x_prev,
                 std::span<const double> x_prev2, double k, std::span<const double> dw_nodes,
                 std::span<const double> dw_prev_nodes, const NewtonConfig& newton = {});

/// Advances one trajectory of either scheme. The first step is always BEM, which
/// supplies the second start value of BDF2. Linear (heat) systems are factored once.
class Stepper {
 public:
  Stepper(Problem problem, const FemSpace& space, Scheme scheme, double k, NewtonConfig newton = {});

  /// Sets X^0 and rewinds to step 0.
  void reset(Coeffs x0);
  /// Consumes the nodal Wiener increment of the next step and returns X^n.
  const Coeffs& advance(std::span<const double> dw_nodes);

  const Coeffs& current() const noexcept { return x_; }
  std::size_t step_index() const noexcept { return n_; }
  Scheme scheme() const noexcept { return scheme_; }
  double step_size() const noexcept { return k_; }
  /// Newton iterations spent in the last step (0 for the direct linear solve).
  int last_iterations() const noexcept { return last_iterations_; }

 private:
  Coeffs solve(double mass_scale, double drift_scale, const std::optional<TriDiagFactorization>& factor,
               std::span<const double> rhs, std::span<const double> start);

  Problem problem_;
  FemSpace space_;
  Scheme scheme_;
  double k_;
  NewtonConfig newton_;
  TriDiag mass_;
  std::optional<TriDiagFactorization> bem_factor_;
  std::optional<TriDiagFactorization> bdf2_factor_;
  Coeffs x_, x_prev_;
  Coeffs noise_prev_;  // noise_nodal(X^{n-1}, dW^{n-1}) kept for the two-step right-hand side
  std::size_t n_ = 0;
  int last_iterations_ = 0;
};

/// X^0 = I_h(sin(pi .)) and X^1 from one BEM step with the first coarse increment.
std::pair<Coeffs, Coeffs> initialize(const Problem& problem, const FemSpace& space, const TemporalGrid& grid,
                                     std::span<const double> first_dw_nodes, const NewtonConfig& newton = {});

struct Trajectory {
  std::vector<Coeffs> states;  // X^0 .. X^{N_k}
  TemporalGrid grid;
  Scheme scheme = Scheme::bdf2;
};

/// Runs a full trajectory on the mode increments `coarse` (one column per step, N_k columns).
Trajectory run_trajectory(const Problem& problem, const FemSpace& space, const TemporalGrid& grid, Scheme scheme,
                          const WienerIncrements& coarse, const NewtonConfig& newton = {});

}  // namespace bdf2spde
