#include "bdf2spde/schemes.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "bdf2spde/errors.hpp"

namespace bdf2spde {

std::string to_string(Scheme scheme) { return scheme == Scheme::bem ? "BEM" : "BDF2"; }

Scheme parse_scheme(const std::string& text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "bem") return Scheme::bem;
  if (lower == "bdf2") return Scheme::bdf2;
  throw std::invalid_argument("unknown scheme '" + text + "' (expected bem or bdf2)");
}

void TemporalGrid::validate() const {
  if (!(t_final > 0.0)) throw std::invalid_argument("TemporalGrid: T must be positive");
  if (n_steps == 0) throw std::invalid_argument("TemporalGrid: need at least one step");
}

void NewtonConfig::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("NewtonConfig: tol must be positive");
  if (n_min < 1 || n_min > n_max) throw std::invalid_argument("NewtonConfig: need 1 <= n_min <= n_max");
}

namespace {

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// a M + b T
TriDiag combine(const TriDiag& mass, double a, const TriDiag& t, double b) {
  TriDiag out(mass.dim());
  for (std::size_t i = 0; i < out.diag.size(); ++i) out.diag[i] = a * mass.diag[i] + b * t.diag[i];
  for (std::size_t i = 0; i < out.off.size(); ++i) out.off[i] = a * mass.off[i] + b * t.off[i];
  return out;
}

// F(x) = (a M + b A_h(x)) x - rhs
void residual(const TriDiag& mass, double a, const TriDiag& stiffness, double b, std::span<const double> x,
              std::span<const double> rhs, std::vector<double>& f) {
  matvec(combine(mass, a, stiffness, b), x, f);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] -= rhs[i];
}

// M (X_prev + noise)
std::vector<double> bem_rhs(const TriDiag& mass, std::span<const double> x_prev, std::span<const double> noise) {
  std::vector<double> v(x_prev.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = x_prev[i] + noise[i];
  return matvec(mass, v);
}

// M (4 X_prev - X_prev2 + 3 noise - noise_prev)
std::vector<double> bdf2_rhs(const TriDiag& mass, std::span<const double> x_prev, std::span<const double> x_prev2,
                             std::span<const double> noise, std::span<const double> noise_prev) {
  std::vector<double> v(x_prev.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 4.0 * x_prev[i] - x_prev2[i] + 3.0 * noise[i] - noise_prev[i];
  return matvec(mass, v);
}

void check_dim(std::span<const double> v, const FemSpace& space, const char* where) {
  if (v.size() != space.n_dof()) throw DimensionMismatch(where, space.n_dof(), v.size());
}

}  // namespace

NewtonResult newton_solve(const Problem& problem, const FemSpace& space, const TriDiag& mass, double mass_scale,
                          double drift_scale, std::span<const double> rhs, std::span<const double> start,
                          const NewtonConfig& newton) {
  newton.validate();
  check_dim(rhs, space, "newton_solve");
  check_dim(start, space, "newton_solve");
  NewtonResult result;
  result.x.assign(start.begin(), start.end());
  std::vector<double> f(result.x.size());

  DriftLinearization lin = linearize_drift(problem, result.x, space);
  residual(mass, mass_scale, lin.stiffness, drift_scale, result.x, rhs, f);
  result.residual = inf_norm(f);
  result.residual_history.push_back(result.residual);

  for (int it = 1; it <= newton.n_max; ++it) {
    TriDiagFactorization jacobian(combine(mass, mass_scale, lin.jacobian, drift_scale));
    jacobian.solve_in_place(f);
    for (std::size_t i = 0; i < f.size(); ++i) result.x[i] -= f[i];

    lin = linearize_drift(problem, result.x, space);
    residual(mass, mass_scale, lin.stiffness, drift_scale, result.x, rhs, f);
    result.residual = inf_norm(f);
    result.residual_history.push_back(result.residual);
    result.iterations = it;
    if (!std::isfinite(result.residual)) break;
    if (it >= newton.n_min && result.residual <= newton.tol) return result;
  }
  throw NewtonNonconvergence(result.residual, result.iterations);
}

Coeffs bem_step(const Problem& problem, const FemSpace& space, std::span<const double> x_prev, double k,
                std::span<const double> dw_nodes, const NewtonConfig& newton) {
  check_dim(x_prev, space, "bem_step");
  check_dim(dw_nodes, space, "bem_step");
  if (!(k > 0.0)) throw std::invalid_argument("bem_step: k must be positive");
  const TriDiag mass = assemble_mass(space);
  const std::vector<double> rhs = bem_rhs(mass, x_prev, noise_nodal(problem, x_prev, dw_nodes));
  if (is_linear(problem)) return solve(combine(mass, 1.0, assemble_stiffness_linear(space), k), rhs);
  return newton_solve(problem, space, mass, 1.0, k, rhs, x_prev, newton).x;
}

Coeffs bdf2_step(const Problem& problem, const FemSpace& space, std::span<const double> x_prev,
                 std::span<const double> x_prev2, double k, std::span<const double> dw_nodes,
                 std::span<const double> dw_prev_nodes, const NewtonConfig& newton) {
  check_dim(x_prev, space, "bdf2_step");
  check_dim(x_prev2, space, "bdf2_step");
  check_dim(dw_nodes, space, "bdf2_step");
  check_dim(dw_prev_nodes, space, "bdf2_step");
  if (!(k > 0.0)) throw std::invalid_argument("bdf2_step: k must be positive");
  const TriDiag mass = assemble_mass(space);
  const std::vector<double> rhs = bdf2_rhs(mass, x_prev, x_prev2, noise_nodal(problem, x_prev, dw_nodes),
                                           noise_nodal(problem, x_prev2, dw_prev_nodes));
  if (is_linear(problem)) return solve(combine(mass, 3.0, assemble_stiffness_linear(space), 2.0 * k), rhs);
  return newton_solve(problem, space, mass, 3.0, 2.0 * k, rhs, x_prev, newton).x;
}

Stepper::Stepper(Problem problem, const FemSpace& space, Scheme scheme, double k, NewtonConfig newton)
    : problem_(std::move(problem)),
      space_(space),
      scheme_(scheme),
      k_(k),
      newton_(newton),
      mass_(assemble_mass(space)) {
  if (!(k > 0.0)) throw std::invalid_argument("Stepper: k must be positive");
  newton_.validate();
  if (is_linear(problem_)) {
    const TriDiag a = assemble_stiffness_linear(space);
    bem_factor_.emplace(combine(mass_, 1.0, a, k));
    if (scheme_ == Scheme::bdf2) bdf2_factor_.emplace(combine(mass_, 3.0, a, 2.0 * k));
  }
}

void Stepper::reset(Coeffs x0) {
  check_dim(x0, space_, "Stepper::reset");
  x_ = std::move(x0);
  x_prev_.clear();
  noise_prev_.clear();
  n_ = 0;
  last_iterations_ = 0;
}

Coeffs Stepper::solve(double mass_scale, double drift_scale, const std::optional<TriDiagFactorization>& factor,
                      std::span<const double> rhs, std::span<const double> start) {
  if (factor) {
    last_iterations_ = 0;
    return factor->solve(rhs);
  }
  NewtonResult r = newton_solve(problem_, space_, mass_, mass_scale, drift_scale, rhs, start, newton_);
  last_iterations_ = r.iterations;
  return std::move(r.x);
}

const Coeffs& Stepper::advance(std::span<const double> dw_nodes) {
  check_dim(dw_nodes, space_, "Stepper::advance");
  if (x_.empty()) throw std::logic_error("Stepper::advance called before reset");
  try {
    Coeffs noise = noise_nodal(problem_, x_, dw_nodes);
    Coeffs next;
    if (n_ == 0 || scheme_ == Scheme::bem) {
      next = solve(1.0, k_, bem_factor_, bem_rhs(mass_, x_, noise), x_);
    } else {
      next = solve(3.0, 2.0 * k_, bdf2_factor_, bdf2_rhs(mass_, x_, x_prev_, noise, noise_prev_), x_);
    }
    x_prev_ = std::move(x_);
    x_ = std::move(next);
    noise_prev_ = std::move(noise);
    ++n_;
  } catch (const StepFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw StepFailure(n_ + 1, e.what());
  }
  return x_;
}

std::pair<Coeffs, Coeffs> initialize(const Problem& problem, const FemSpace& space, const TemporalGrid& grid,
                                     std::span<const double> first_dw_nodes, const NewtonConfig& newton) {
  grid.validate();
  Coeffs x0 = interpolate(initial_value, space);
  Coeffs x1 = bem_step(problem, space, x0, grid.step(), first_dw_nodes, newton);
  return {std::move(x0), std::move(x1)};
}

Trajectory run_trajectory(const Problem& problem, const FemSpace& space, const TemporalGrid& grid, Scheme scheme,
                          const WienerIncrements& coarse, const NewtonConfig& newton) {
  grid.validate();
  const NoiseSpec& noise = noise_of(problem);
  if (coarse.n_steps() != grid.n_steps) {
    throw std::invalid_argument("run_trajectory: increments have " + std::to_string(coarse.n_steps()) +
                                " steps, grid has " + std::to_string(grid.n_steps));
  }
  if (coarse.modes() != noise.modes) throw DimensionMismatch("run_trajectory", noise.modes, coarse.modes());

  const bool noisy = sigma_of(problem) != 0.0;
  std::optional<SineSynthesis> synthesis;
  if (noisy) synthesis.emplace(noise, space);

  Trajectory traj{{}, grid, scheme};
  traj.states.reserve(grid.n_steps + 1);
  Stepper stepper(problem, space, scheme, grid.step(), newton);
  stepper.reset(interpolate(initial_value, space));
  traj.states.push_back(stepper.current());
  Coeffs dw(space.n_dof(), 0.0);
  for (std::size_t n = 1; n <= grid.n_steps; ++n) {
    if (noisy) synthesis->apply(coarse.step(n), dw);
    traj.states.push_back(stepper.advance(dw));
  }
  return traj;
}

}  // namespace bdf2spde
