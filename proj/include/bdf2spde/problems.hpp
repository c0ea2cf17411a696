#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bdf2spde/fem.hpp"
#include "bdf2spde/wiener.hpp"

namespace bdf2spde {

double erf(double t);

/// psi(t) = erf(t - 2) + 2 for t >= 0; throws std::domain_error for negative t.
double psi(double t);
/// psi'(t) = (2/sqrt(pi)) exp(-(t-2)^2).
double psi_prime(double t);
/// m1 = inf psi = psi(0) = erf(-2) + 2.
double psi_lower_bound();
/// m2 = sup psi (asymptote).
inline constexpr double kPsiUpperBound = 3.0;
/// Exact Lipschitz constant of t -> psi(t) t (about 4.7367; larger than sup psi).
double psi_flux_lipschitz();

/// g(x) = sqrt(8 x^2 + 1), Lipschitz with constant sqrt(8).
double noise_amplitude(double x);
inline constexpr double kNoiseLipschitz = 2.8284271247461903;  // sqrt(8)

/// X_0 = sin(pi x), shared by both problems.
double initial_value(double x);

/// du = u_xx dt + sigma dW.
struct HeatProblem {
  double sigma = 1.0;
  NoiseSpec noise{};
};

/// du = (psi(|u_x|) u_x)_x dt + sigma sqrt(8u^2+1) dW.
struct QuasilinearProblem {
  double sigma = 0.25;
  NoiseSpec noise{};
};

using Problem = std::variant<HeatProblem, QuasilinearProblem>;

double sigma_of(const Problem& problem);
const NoiseSpec& noise_of(const Problem& problem);
bool is_linear(const Problem& problem);
std::string name_of(const Problem& problem);

/// A_h(x): element coefficient psi(|s_e|) (heat: 1) times the P1 stiffness pattern.
TriDiag assemble_drift_stiffness(const Problem& problem, std::span<const double> x, const FemSpace& space);
/// A*_h(x): Jacobian of x -> A_h(x) x; element coefficient psi(|s|) + psi'(|s|) |s|.
TriDiag assemble_drift_jacobian(const Problem& problem, std::span<const double> x, const FemSpace& space);

/// Both matrices from one pass over the elements (the Newton loop needs both).
struct DriftLinearization {
  TriDiag stiffness;
  TriDiag jacobian;
};
DriftLinearization linearize_drift(const Problem& problem, std::span<const double> x, const FemSpace& space);

/// Nodal values of B(x) Delta W before the mass-matrix product:
/// heat sigma * dW_i, quasilinear sigma * g(x_i) * dW_i.
Coeffs noise_nodal(const Problem& problem, std::span<const double> x, std::span<const double> increment_nodes);

/// Result of a randomized check of the structural drift/noise conditions.
struct AssumptionCheck {
  AssumptionCheck(std::string check_name = {}) : name(std::move(check_name)) {}

  std::string name;
  std::size_t evaluated = 0;
  double worst_margin = 0.0;  // min over samples of (lhs - rhs), relative slack already applied
  std::vector<std::size_t> violations;  // sample indices where lhs < rhs
  bool ok() const noexcept { return violations.empty(); }
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  /// Constants used: kappa, nu, K, mu, c as stated for the problem.
  double kappa = 0.0;
  double nu = 0.0;
  double k_monotone = 0.0;
  double mu = 0.0;
  double c = 0.0;
  bool ok() const noexcept;
  const AssumptionCheck& check(const std::string& name) const;
};

/// Samples random pairs (u, v) in V_h and evaluates
///   monotone:  2<A(u)-A(v),u-v> + kappa|u-v|_H^2 >= nu |B(u)-B(v)|_HS^2 + K |u-v|_V^2
///   coercive:  2<A(v),v> + kappa|v|_H^2 >= nu |B(v)|_HS^2 + mu |v|_V^2 - c
/// plus the discrete Lipschitz bound |A(u)-A(v)|_V* <= L |u-v|_V (heat L = 1, quasilinear
/// L = psi_flux_lipschitz()). H-norms on the noise side use nodal quadrature.
/// For the quasilinear problem the scalar conditions
///   psi(t)t - psi(s)s >= m1 (t-s),  |psi(t)t - psi(s)s| <= flux_lipschitz_bound |t-s|,
///   |g(a) - g(b)| <= sqrt(8) |a-b|
/// are sampled as well. The default bound is m2 = sup psi = 3, which t -> psi(t)t
/// does not satisfy near t = 1 + sqrt(2); pass psi_flux_lipschitz() for the sharp value.
AssumptionReport verify_assumptions(const Problem& problem, const FemSpace& space, std::size_t n_samples,
                                    std::uint64_t seed, double flux_lipschitz_bound = kPsiUpperBound);

}  // namespace bdf2spde
