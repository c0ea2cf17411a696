#include "bdf2spde/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "bdf2spde/errors.hpp"
#include "bdf2spde/linalg.hpp"

namespace bdf2spde {

double erf(double t) { return std::erf(t); }

double psi(double t) {
  if (t < 0.0) throw std::domain_error("psi: argument must be nonnegative");
  return erf(t - 2.0) + 2.0;
}

double psi_prime(double t) {
  if (t < 0.0) throw std::domain_error("psi_prime: argument must be nonnegative");
  const double d = t - 2.0;
  return std::numbers::inv_sqrtpi * 2.0 * std::exp(-d * d);
}

double psi_lower_bound() { return erf(-2.0) + 2.0; }

double noise_amplitude(double x) { return std::sqrt(8.0 * x * x + 1.0); }

double initial_value(double x) { return std::sin(std::numbers::pi * x); }

double sigma_of(const Problem& problem) {
  return std::visit([](const auto& p) { return p.sigma; }, problem);
}

const NoiseSpec& noise_of(const Problem& problem) {
  return std::visit([](const auto& p) -> const NoiseSpec& { return p.noise; }, problem);
}

bool is_linear(const Problem& problem) { return std::holds_alternative<HeatProblem>(problem); }

std::string name_of(const Problem& problem) { return is_linear(problem) ? "heat" : "quasilinear"; }

namespace {

void check_state(std::span<const double> x, const FemSpace& space, const char* where) {
  if (x.size() != space.n_dof()) throw DimensionMismatch(where, space.n_dof(), x.size());
}

// Slope of the P1 function on element e = 0..N (element e spans [x_e, x_{e+1}]).
inline double element_slope(std::span<const double> x, std::size_t e, double inv_h) {
  const std::size_t n = x.size();
  const double left = e == 0 ? 0.0 : x[e - 1];
  const double right = e == n ? 0.0 : x[e];
  return (right - left) * inv_h;
}

// Adds coef/h * [[1,-1],[-1,1]] of element e into the interior-node matrix.
inline void scatter_element(TriDiag& m, std::size_t e, double value) {
  const std::size_t n = m.dim();
  if (e > 0) m.diag[e - 1] += value;
  if (e < n) m.diag[e] += value;
  if (e > 0 && e < n) m.off[e - 1] -= value;
}

}  // namespace

double psi_flux_lipschitz() {
  // d/dt (psi(t) t) = psi + psi' t peaks where t^2 - 2t - 1 = 0.
  const double t = 1.0 + std::numbers::sqrt2;
  return psi(t) + psi_prime(t) * t;
}

DriftLinearization linearize_drift(const Problem& problem, std::span<const double> x, const FemSpace& space) {
  check_state(x, space, "linearize_drift");
  if (is_linear(problem)) {
    TriDiag a = assemble_stiffness_linear(space);
    return {a, a};
  }
  const std::size_t n = space.n_dof();
  const double inv_h = 1.0 / space.h();
  DriftLinearization lin{TriDiag(n), TriDiag(n)};
  for (std::size_t e = 0; e <= n; ++e) {
    const double s = std::abs(element_slope(x, e, inv_h));
    const double p = psi(s);
    scatter_element(lin.stiffness, e, p * inv_h);
    scatter_element(lin.jacobian, e, (p + psi_prime(s) * s) * inv_h);
  }
  return lin;
}

TriDiag assemble_drift_stiffness(const Problem& problem, std::span<const double> x, const FemSpace& space) {
  check_state(x, space, "assemble_drift_stiffness");
  if (is_linear(problem)) return assemble_stiffness_linear(space);
  const std::size_t n = space.n_dof();
  const double inv_h = 1.0 / space.h();
  TriDiag a(n);
  for (std::size_t e = 0; e <= n; ++e) scatter_element(a, e, psi(std::abs(element_slope(x, e, inv_h))) * inv_h);
  return a;
}

TriDiag assemble_drift_jacobian(const Problem& problem, std::span<const double> x, const FemSpace& space) {
  return linearize_drift(problem, x, space).jacobian;
}

Coeffs noise_nodal(const Problem& problem, std::span<const double> x, std::span<const double> increment_nodes) {
  if (x.size() != increment_nodes.size()) throw DimensionMismatch("noise_nodal", x.size(), increment_nodes.size());
  const double sigma = sigma_of(problem);
  Coeffs out(x.size());
  if (is_linear(problem)) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigma * increment_nodes[i];
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigma * noise_amplitude(x[i]) * increment_nodes[i];
  }
  return out;
}

bool AssumptionReport::ok() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return c.ok(); });
}

const AssumptionCheck& AssumptionReport::check(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("AssumptionReport: no check named " + name);
}

namespace {

constexpr double kRelativeSlack = 1e-10;

void record(AssumptionCheck& check, std::size_t sample, double lhs, double rhs) {
  const double margin = lhs - rhs;
  if (check.evaluated == 0 || margin < check.worst_margin) check.worst_margin = margin;
  ++check.evaluated;
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  if (margin < -kRelativeSlack * scale) check.violations.push_back(sample);
}

// Sum_i h w_i y_i^2 with w_i = sum_j q_j 2 sin^2(j pi x_i): the KL-frame Hilbert-Schmidt
// norm of a multiplication operator, nodal quadrature in space.
class HilbertSchmidtFrame {
 public:
  HilbertSchmidtFrame(const NoiseSpec& noise, const FemSpace& space) : h_(space.h()), weight_(space.n_dof(), 0.0) {
    for (std::size_t i = 1; i <= space.n_dof(); ++i) {
      double w = 0.0;
      for (std::size_t j = 1; j <= noise.modes; ++j) {
        const double s = std::sin(static_cast<double>(j) * std::numbers::pi * space.node(i));
        w += noise.eigenvalue(j) * 2.0 * s * s;
      }
      weight_[i - 1] = w;
    }
  }

  double squared(std::span<const double> y) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) sum += weight_[i] * y[i] * y[i];
    return h_ * sum;
  }

 private:
  double h_;
  std::vector<double> weight_;
};

double lumped_h_squared(std::span<const double> x, double h) {
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return h * sum;
}

std::vector<double> random_state(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> log_scale(-2.0, 1.0);
  const double scale = std::pow(10.0, log_scale(rng));
  std::vector<double> x(n);
  for (double& v : x) v = scale * normal(rng);
  return x;
}

// Multiplicative noise coefficient at the nodes: b_i(u) = sigma * g(u_i) (heat: sigma).
std::vector<double> noise_coefficient(const Problem& problem, std::span<const double> u) {
  std::vector<double> ones(u.size(), 1.0);
  return noise_nodal(problem, u, ones);
}

}  // namespace

AssumptionReport verify_assumptions(const Problem& problem, const FemSpace& space, std::size_t n_samples,
                                    std::uint64_t seed, double flux_lipschitz_bound) {
  if (n_samples == 0) throw std::invalid_argument("verify_assumptions: need at least one sample");
  const NoiseSpec& noise = noise_of(problem);
  noise.validate();
  const double sigma = sigma_of(problem);
  const double trace_q = noise.trace();
  const std::size_t n = space.n_dof();
  const double h = space.h();
  const TriDiag a_lin = assemble_stiffness_linear(space);
  const TriDiagFactorization a_lin_factor(a_lin);
  const HilbertSchmidtFrame hs(noise, space);

  AssumptionReport report;
  double lipschitz = 1.0;
  report.nu = 2.0;
  if (is_linear(problem)) {
    report.kappa = 0.0;
    report.k_monotone = 2.0;
    report.mu = 1.0;
    report.c = report.nu * sigma * sigma * trace_q;
  } else {
    const double m1 = psi_lower_bound();
    report.kappa = 16.0 * report.nu * sigma * sigma * trace_q;
    report.k_monotone = 2.0 * m1;
    report.mu = m1;
    report.c = 2.0 * report.nu * sigma * sigma * trace_q;
    lipschitz = psi_flux_lipschitz();
  }

  AssumptionCheck monotone{"monotone"}, coercive{"coercive"}, lip{"lipschitz"}, identity{"drift_identity"};
  std::mt19937_64 rng(stream_seed(seed, 0x5eed));
  for (std::size_t sample = 0; sample < n_samples; ++sample) {
    const std::vector<double> u = random_state(rng, n);
    const std::vector<double> v = sample == 0 ? u : random_state(rng, n);
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = u[i] - v[i];

    const std::vector<double> au = matvec(assemble_drift_stiffness(problem, u, space), u);
    const std::vector<double> av = matvec(assemble_drift_stiffness(problem, v, space), v);
    std::vector<double> diff(n);
    double pairing = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diff[i] = au[i] - av[i];
      pairing += diff[i] * w[i];
    }
    const std::vector<double> bu = noise_coefficient(problem, u);
    const std::vector<double> bv = noise_coefficient(problem, v);
    std::vector<double> db(n);
    for (std::size_t i = 0; i < n; ++i) db[i] = bu[i] - bv[i];
    const double w_v2 = quadratic_form(a_lin, w);

    record(monotone, sample, 2.0 * pairing + report.kappa * lumped_h_squared(w, h),
           report.nu * hs.squared(db) + report.k_monotone * w_v2);

    double v_pairing = 0.0;
    for (std::size_t i = 0; i < n; ++i) v_pairing += av[i] * v[i];
    record(coercive, sample, 2.0 * v_pairing + report.kappa * lumped_h_squared(v, h),
           report.nu * hs.squared(bv) + report.mu * quadratic_form(a_lin, v) - report.c);

    // Dual norm in V_h*: |f|^2 = f^T A_lin^{-1} f.
    const std::vector<double> dual = a_lin_factor.solve(diff);
    double dual_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) dual_sq += diff[i] * dual[i];
    record(lip, sample, lipschitz * lipschitz * w_v2, dual_sq);

    if (is_linear(problem)) {
      // <A(v),v> and |v|_V^2 are the same sum; require bit equality.
      const double vv = quadratic_form(a_lin, v);
      if (identity.evaluated == 0 || v_pairing - vv < identity.worst_margin) identity.worst_margin = v_pairing - vv;
      ++identity.evaluated;
      if (v_pairing != vv) identity.violations.push_back(sample);
    }
  }
  report.checks = {monotone, coercive, lip};
  if (is_linear(problem)) {
    report.checks.push_back(identity);
    return report;
  }

  // Scalar hypotheses on psi and g, sampled on [0, 8] (psi) and [-8, 8] (g).
  const double m1 = psi_lower_bound();
  AssumptionCheck scalar_mono{"scalar_monotone"}, scalar_lip{"scalar_lipschitz"}, noise_lip{"noise_lipschitz"};
  std::uniform_real_distribution<double> unit(0.0, 8.0), line(-8.0, 8.0);
  for (std::size_t sample = 0; sample < n_samples; ++sample) {
    double t = unit(rng), s = unit(rng);
    if (t < s) std::swap(t, s);
    const double flux_gap = psi(t) * t - psi(s) * s;
    record(scalar_mono, sample, flux_gap, m1 * (t - s));
    record(scalar_lip, sample, flux_lipschitz_bound * (t - s), std::abs(flux_gap));
    const double a = line(rng), b = line(rng);
    record(noise_lip, sample, kNoiseLipschitz * std::abs(a - b), std::abs(noise_amplitude(a) - noise_amplitude(b)));
  }
  report.checks.push_back(scalar_mono);
  report.checks.push_back(scalar_lip);
  report.checks.push_back(noise_lip);
  return report;
}

}  // namespace bdf2spde
