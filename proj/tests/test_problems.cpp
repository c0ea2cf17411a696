#include <cmath>
#include <random>

#include "bdf2spde/errors.hpp"
#include "bdf2spde/linalg.hpp"
#include "bdf2spde/problems.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bdf2spde;

namespace {
// Frozen from the quadrature oracle (see "erf against its integral definition").
constexpr double kErfMinus2 = -0.995322265018952734;
constexpr double kPsi0 = 1.00467773498104727;
constexpr double kPsi1 = 1.15729920705028513;

const Problem kQuasi = QuasilinearProblem{1.0, NoiseSpec{64, 1.0, 1e-3}};
const Problem kHeat = HeatProblem{1.0, NoiseSpec{64, 1.0, 1e-3}};

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}
}  // namespace

TEST_CASE("erf against its integral definition") {
  CHECK(oracle::erf_quadrature(-2.0) == doctest::Approx(kErfMinus2).epsilon(1e-15));
  CHECK(bdf2spde::erf(0.0) == 0.0);
  CHECK(std::abs(bdf2spde::erf(-2.0) - kErfMinus2) <= 1e-13);
  for (double t : {-5.0, -2.5, -1.0, -0.3, 0.01, 0.5, 1.7, 3.0, 6.0}) {
    CAPTURE(t);
    CHECK(std::abs(bdf2spde::erf(t) - oracle::erf_quadrature(t)) <= 1e-13);
  }
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int i = 0; i < 1000; ++i) {
    const double t = u(rng);
    CHECK(bdf2spde::erf(t) + bdf2spde::erf(-t) == 0.0);
  }
}

TEST_CASE("psi and its derivative") {
  CHECK(psi(2.0) == 2.0);
  CHECK(std::abs(psi(0.0) - kPsi0) <= 1e-15);
  CHECK(std::abs(psi(1.0) - kPsi1) <= 1e-15);
  CHECK(psi_lower_bound() == psi(0.0));
  for (double t : {0.5, 2.0, 4.0}) {
    const double d = 1e-6;
    CHECK(std::abs((psi(t + d) - psi(t - d)) / (2 * d) - psi_prime(t)) <= 1e-6);
  }
  for (double t = 0.0; t <= 40.0; t += 0.01) {
    CHECK(psi(t) >= psi_lower_bound());
    CHECK(psi(t) <= kPsiUpperBound);
    CHECK(psi_prime(t) >= 0.0);
  }
  for (double t = 0.0; t <= 5.0; t += 0.01) CHECK(psi_prime(t) > 0.0);
  CHECK_THROWS_AS(psi(-0.1), std::domain_error);
  CHECK_THROWS_AS(psi_prime(-0.1), std::domain_error);
}

TEST_CASE("flux slope bound is attained at 1 + sqrt(2)") {
  const double peak = 1.0 + std::sqrt(2.0);
  double best = 0.0;
  for (double t = 0.0; t <= 10.0; t += 1e-4) best = std::max(best, psi(t) + psi_prime(t) * t);
  CHECK(psi_flux_lipschitz() == doctest::Approx(best).epsilon(1e-9));
  CHECK(psi_flux_lipschitz() == doctest::Approx(psi(peak) + psi_prime(peak) * peak));
  CHECK(psi_flux_lipschitz() > kPsiUpperBound);
  // coefficient of the Jacobian stays above m1
  for (double s = 0.0; s <= 10.0; s += 1e-3) CHECK(psi(s) + psi_prime(s) * s >= psi_lower_bound());
}

TEST_CASE("noise amplitude") {
  CHECK(noise_amplitude(0.0) == 1.0);
  CHECK(noise_amplitude(1.0) == 3.0);
  CHECK(kNoiseLipschitz == doctest::Approx(std::sqrt(8.0)).epsilon(1e-16));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng), b = u(rng);
    CHECK(noise_amplitude(a) >= 1.0);
    CHECK(std::abs(noise_amplitude(a) - noise_amplitude(b)) <= kNoiseLipschitz * std::abs(a - b) * (1 + 1e-14));
  }
}

TEST_CASE("drift stiffness") {
  FemSpace s(17);
  const Coeffs zero(17, 0.0);
  const TriDiag a0 = assemble_drift_stiffness(kQuasi, zero, s);
  const TriDiag lin = assemble_stiffness_linear(s);
  for (std::size_t i = 0; i < 17; ++i) CHECK(a0.diag[i] == doctest::Approx(kPsi0 * lin.diag[i]).epsilon(1e-15));
  for (std::size_t i = 0; i < 16; ++i) CHECK(a0.off[i] == doctest::Approx(kPsi0 * lin.off[i]).epsilon(1e-15));

  // v(x) = x restricted to the interior node of a two-element mesh: slopes +1 and -1
  FemSpace s1(1);
  const TriDiag a1 = assemble_drift_stiffness(kQuasi, Coeffs{0.5}, s1);
  CHECK(a1.diag[0] == doctest::Approx(2.0 * kPsi1 / s1.h()).epsilon(1e-15));

  // heat: bit-equal to the linear stiffness for any state
  std::mt19937_64 rng(3);
  const auto x = oracle::random_vector(rng, 17);
  const TriDiag ah = assemble_drift_stiffness(kHeat, x, s);
  CHECK(ah.diag == lin.diag);
  CHECK(ah.off == lin.off);
  const TriDiag jh = assemble_drift_jacobian(kHeat, x, s);
  CHECK(jh.diag == lin.diag);
  CHECK(jh.off == lin.off);

  CHECK_THROWS_AS(assemble_drift_stiffness(kQuasi, Coeffs(3, 0.0), s), DimensionMismatch);
}

TEST_CASE("property: quasilinear stiffness is symmetric and diagonally dominant") {
  std::mt19937_64 rng(4);
  FemSpace s(40);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = oracle::random_vector(rng, 40, trial % 2 ? 0.1 : 3.0);
    const TriDiag a = assemble_drift_stiffness(kQuasi, x, s);
    const TriDiag j = assemble_drift_jacobian(kQuasi, x, s);
    for (const TriDiag* m : {&a, &j}) {
      REQUIRE(m->off.size() == 39);  // a single stored off-diagonal is symmetric by construction
      for (std::size_t i = 0; i < 40; ++i) {
        double row = 0.0;
        if (i > 0) row += std::abs(m->off[i - 1]);
        if (i < 39) row += std::abs(m->off[i]);
        CHECK(m->diag[i] > 0.0);
        CHECK(m->diag[i] >= row);
        if (i == 0 || i == 39) CHECK(m->diag[i] > row);
      }
      for (double o : m->off) CHECK(o < 0.0);
    }
    // linearize_drift bundles both assemblies
    const DriftLinearization both = linearize_drift(kQuasi, x, s);
    CHECK(both.stiffness.diag == a.diag);
    CHECK(both.jacobian.diag == j.diag);
  }
}

TEST_CASE("drift Jacobian") {
  FemSpace s(25);
  const Coeffs zero(25, 0.0);
  const TriDiag j0 = assemble_drift_jacobian(kQuasi, zero, s);
  const TriDiag a0 = assemble_drift_stiffness(kQuasi, zero, s);
  CHECK(j0.diag == a0.diag);
  CHECK(j0.off == a0.off);

  std::mt19937_64 rng(5);
  auto apply = [&](const std::vector<double>& x) { return matvec(assemble_drift_stiffness(kQuasi, x, s), x); };
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = oracle::random_vector(rng, 25, 0.05);
    const auto d = oracle::random_vector(rng, 25, 0.05);
    const auto jd = matvec(assemble_drift_jacobian(kQuasi, x, s), d);
    const auto ax = apply(x);
    std::vector<double> residuals;
    for (double delta : {1e-4, 1e-5, 1e-6}) {
      std::vector<double> xp(25);
      for (std::size_t i = 0; i < 25; ++i) xp[i] = x[i] + delta * d[i];
      const auto axp = apply(xp);
      std::vector<double> fd(25);
      for (std::size_t i = 0; i < 25; ++i) fd[i] = (axp[i] - ax[i]) / delta;
      residuals.push_back(max_abs_diff(fd, jd));
    }
    CHECK(residuals[0] < 1e-2);
    CHECK(residuals[1] < residuals[0] * 0.2);
    CHECK(residuals[2] < residuals[1] * 0.2);
  }
}

TEST_CASE("noise_nodal") {
  const Problem heat = HeatProblem{0.5, {}};
  const Problem quasi = QuasilinearProblem{1.0, {}};
  CHECK(noise_nodal(heat, Coeffs{3.0, 4.0}, Coeffs{1.0, -2.0}) == Coeffs{0.5, -1.0});
  CHECK(noise_nodal(quasi, Coeffs{1.0, 2.0}, Coeffs{0.0, 0.0}) == Coeffs{0.0, 0.0});
  CHECK(noise_nodal(quasi, Coeffs{0.0, 0.0}, Coeffs{0.3, -0.7}) == Coeffs{0.3, -0.7});
  CHECK(noise_nodal(quasi, Coeffs{1.0}, Coeffs{1.0}) == Coeffs{3.0});
  const Problem quasi_small = QuasilinearProblem{0.25, {}};
  CHECK(noise_nodal(quasi_small, Coeffs{1.0}, Coeffs{2.0})[0] == doctest::Approx(1.5));
  CHECK_THROWS_AS(noise_nodal(quasi, Coeffs{1.0}, Coeffs{1.0, 2.0}), DimensionMismatch);
}

TEST_CASE("problem helpers") {
  CHECK(is_linear(kHeat));
  CHECK_FALSE(is_linear(kQuasi));
  CHECK(name_of(kHeat) == "heat");
  CHECK(name_of(kQuasi) == "quasilinear");
  CHECK(sigma_of(kQuasi) == 1.0);
  CHECK(noise_of(kQuasi).modes == 64);
  CHECK(QuasilinearProblem{}.sigma == 0.25);
  CHECK(initial_value(0.5) == 1.0);
}

TEST_CASE("verify_assumptions: heat") {
  const AssumptionReport report = verify_assumptions(kHeat, FemSpace(63), 500, 1);
  CHECK(report.ok());
  CHECK(report.kappa == 0.0);
  CHECK(report.k_monotone == 2.0);
  CHECK(report.check("drift_identity").evaluated == 500);
  CHECK(report.check("drift_identity").ok());
  // u = v in the first sample: all sides vanish
  CHECK(report.check("monotone").worst_margin <= 0.0);
  const AssumptionReport single = verify_assumptions(kHeat, FemSpace(63), 1, 1);
  CHECK(single.check("monotone").worst_margin == 0.0);
  CHECK(single.check("lipschitz").worst_margin == 0.0);
  CHECK_THROWS_AS(report.check("nope"), std::out_of_range);
  CHECK_THROWS_AS(verify_assumptions(kHeat, FemSpace(3), 0, 1), std::invalid_argument);
}

TEST_CASE("verify_assumptions: quasilinear") {
  for (double sigma : {0.25, 0.75}) {
    const Problem p = QuasilinearProblem{sigma, NoiseSpec{63, 1.0, 1e-3}};
    const AssumptionReport sharp = verify_assumptions(p, FemSpace(63), 1000, 2, psi_flux_lipschitz());
    CAPTURE(sigma);
    CHECK(sharp.ok());
    CHECK(sharp.k_monotone == doctest::Approx(2.0 * kPsi0));
    for (const char* name : {"monotone", "coercive", "lipschitz", "scalar_monotone", "scalar_lipschitz",
                             "noise_lipschitz"}) {
      CAPTURE(name);
      CHECK(sharp.check(name).evaluated == 1000);
      CHECK(sharp.check(name).ok());
    }

    // sup psi = 3 does not bound the slope of t -> psi(t) t
    const AssumptionReport m2 = verify_assumptions(p, FemSpace(63), 1000, 2);
    CHECK_FALSE(m2.check("scalar_lipschitz").ok());
    CHECK(m2.check("scalar_monotone").ok());
    CHECK(m2.check("noise_lipschitz").ok());
  }
}

TEST_CASE("property: elementwise strong monotonicity of the flux") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  const double m1 = psi_lower_bound();
  for (int i = 0; i < 10000; ++i) {
    const double s = u(rng), t = u(rng);
    const double lhs = (psi(std::abs(s)) * s - psi(std::abs(t)) * t) * (s - t);
    CHECK(lhs >= m1 * (s - t) * (s - t) * (1 - 1e-12));
  }
}
