#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "bdf2spde/errors.hpp"
#include "bdf2spde/wiener.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bdf2spde;

TEST_CASE("noise spec") {
  NoiseSpec spec{64, 1.0, 1e-3};
  CHECK(spec.eigenvalue(1) == 1.0);
  CHECK(spec.mode_weight(1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  for (std::size_t j = 1; j < 64; ++j) {
    CHECK(spec.eigenvalue(j) > 0.0);
    CHECK(spec.eigenvalue(j + 1) <= spec.eigenvalue(j));
    CHECK(spec.mode_weight(j) * spec.mode_weight(j) == doctest::Approx(2.0 * spec.eigenvalue(j)).epsilon(1e-13));
  }
  CHECK_THROWS_AS((NoiseSpec{0, 1.0, 1e-3}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((NoiseSpec{4, -1.0, 1e-3}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((NoiseSpec{4, 1.0, 0.0}.validate()), std::invalid_argument);
}

TEST_CASE("fine increments: moments") {
  const std::size_t n = std::size_t{1} << 14;
  const double k = 1.0 / static_cast<double>(n);
  const NoiseSpec spec{8, 1.0, 1e-3};
  const WienerIncrements w = sample_fine_increments(spec, n, k, 7, 0);
  for (std::size_t j = 1; j <= spec.modes; ++j) {
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t s = 1; s <= n; ++s) {
      sum += w.at(j, s);
      sum2 += w.at(j, s) * w.at(j, s);
    }
    const double mean = sum / static_cast<double>(n);
    const double var = (sum2 - n * mean * mean) / static_cast<double>(n - 1);
    CAPTURE(j);
    CHECK(std::abs(mean) <= 4.0 * std::sqrt(k / static_cast<double>(n)));
    CHECK(var == doctest::Approx(k).epsilon(0.1));
  }
}

TEST_CASE("fine increments: determinism") {
  const NoiseSpec spec{32, 1.0, 1e-3};
  const auto a = sample_fine_increments(spec, 100, 0.01, 42, 3);
  const auto b = sample_fine_increments(spec, 100, 0.01, 42, 3);
  CHECK(a == b);
  const auto c = sample_fine_increments(spec, 100, 0.01, 42, 4);
  const auto d = sample_fine_increments(spec, 100, 0.01, 43, 3);
  CHECK(a.step(1)[0] != c.step(1)[0]);
  CHECK(a.step(1)[0] != d.step(1)[0]);

  // the streamed draws are the stored matrix, step by step
  IncrementStream stream(spec.modes, 0.01, 42, 3);
  std::vector<double> buf(spec.modes);
  for (std::size_t n = 1; n <= 100; ++n) {
    stream.next(buf);
    CHECK(std::equal(buf.begin(), buf.end(), a.step(n).begin()));
  }

  // generated in other threads: same values
  std::vector<WienerIncrements> from_threads(4, WienerIncrements(0, 0, 1.0, 0, 0));
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] { from_threads[t] = sample_fine_increments(spec, 100, 0.01, 42, 3); });
  }
  for (auto& t : threads) t.join();
  for (const auto& w : from_threads) CHECK(w == a);
}

TEST_CASE("aggregate_to_coarse") {
  const NoiseSpec spec{5, 0.0, 1e-3};
  const auto fine = sample_fine_increments(spec, 24, 1.0 / 24, 1, 0);

  CHECK(aggregate_to_coarse(fine, 1) == fine);

  const auto one = aggregate_to_coarse(fine, 24);
  REQUIRE(one.n_steps() == 1);
  CHECK(one.step_size() == doctest::Approx(1.0));
  for (std::size_t j = 1; j <= 5; ++j) {
    double row = 0.0;
    for (std::size_t n = 1; n <= 24; ++n) row += fine.at(j, n);
    CHECK(one.at(j, 1) == row);
  }

  for (std::size_t factor : {2u, 3u, 4u, 6u, 8u, 12u}) {
    const auto coarse = aggregate_to_coarse(fine, factor);
    CHECK(coarse.n_steps() == 24 / factor);
    for (std::size_t j = 1; j <= 5; ++j) {
      for (std::size_t m = 1; m <= coarse.n_steps(); ++m) {
        double s = 0.0;
        for (std::size_t n = (m - 1) * factor + 1; n <= m * factor; ++n) s += fine.at(j, n);
        CHECK(coarse.at(j, m) == s);
      }
    }
  }

  // integer-valued increments: every partial sum is exact, so totals must agree bit for bit
  WienerIncrements ints(3, 16, 1.0, 0, 0);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> d(-1000, 1000);
  for (std::size_t n = 1; n <= 16; ++n)
    for (double& v : ints.step(n)) v = d(rng);
  for (std::size_t factor : {1u, 2u, 4u, 8u, 16u}) {
    const auto c = aggregate_to_coarse(ints, factor);
    for (std::size_t j = 1; j <= 3; ++j) {
      double fs = 0.0, cs = 0.0;
      for (std::size_t n = 1; n <= 16; ++n) fs += ints.at(j, n);
      for (std::size_t m = 1; m <= c.n_steps(); ++m) cs += c.at(j, m);
      CHECK(fs == cs);
    }
  }

  CHECK_THROWS_AS(aggregate_to_coarse(fine, 5), std::invalid_argument);
  CHECK_THROWS_AS(aggregate_to_coarse(fine, 0), std::invalid_argument);
}

TEST_CASE("increment_at_nodes") {
  FemSpace space(15);
  const NoiseSpec spec{20, 0.0, 1e-3};
  const Coeffs zero = increment_at_nodes(spec, std::vector<double>(20, 0.0), space);
  for (double v : zero) CHECK(v == 0.0);

  std::vector<double> e1(20, 0.0);
  e1[0] = 1.0;
  const Coeffs first = increment_at_nodes(spec, e1, space);
  for (std::size_t i = 1; i <= 15; ++i) {
    CHECK(first[i - 1] == doctest::Approx(std::sqrt(2.0) * std::sin(M_PI * space.node(i))).epsilon(1e-14));
  }
  CHECK_THROWS_AS(increment_at_nodes(spec, std::vector<double>(3, 0.0), space), DimensionMismatch);
}

TEST_CASE("sine transform agrees with the direct sum") {
  std::mt19937_64 rng(9);
  struct Case {
    std::size_t n_h, modes;
    double r;
  };
  for (const Case c : {Case{255, 255, 1.0}, Case{255, 255, 0.0}, Case{1, 1, 1.0}, Case{7, 3, 0.5},
                       Case{63, 1000, 0.0}, Case{31, 64, 0.1}, Case{100, 707, 2.0}}) {
    FemSpace space(c.n_h);
    const NoiseSpec spec{c.modes, c.r, 1e-3};
    const SineSynthesis synth(spec, space);
    for (int trial = 0; trial < 5; ++trial) {
      const auto dw = oracle::random_vector(rng, c.modes);
      const Coeffs direct = increment_at_nodes(spec, dw, space);
      const Coeffs fast = synth.apply(dw);
      double diff = 0.0;
      for (std::size_t i = 0; i < c.n_h; ++i) diff = std::max(diff, std::abs(direct[i] - fast[i]));
      CAPTURE(c.n_h);
      CAPTURE(c.modes);
      CHECK(diff <= 1e-12);
    }
  }
}

TEST_CASE("property: coupling commutes with node evaluation") {
  FemSpace space(31);
  const NoiseSpec spec{31, 1.0, 1e-3};
  const SineSynthesis synth(spec, space);
  const auto fine = sample_fine_increments(spec, 64, 1.0 / 64, 3, 1);
  for (std::size_t factor : {2u, 8u, 64u}) {
    const auto coarse = aggregate_to_coarse(fine, factor);
    for (std::size_t m = 1; m <= coarse.n_steps(); ++m) {
      const Coeffs agg = increment_at_nodes(spec, coarse.step(m), space);
      Coeffs summed(space.n_dof(), 0.0);
      for (std::size_t n = (m - 1) * factor + 1; n <= m * factor; ++n) {
        const Coeffs v = increment_at_nodes(spec, fine.step(n), space);
        for (std::size_t i = 0; i < v.size(); ++i) summed[i] += v[i];
      }
      for (std::size_t i = 0; i < agg.size(); ++i) CHECK(agg[i] == doctest::Approx(summed[i]).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("property: nodal variance matches the KL covariance") {
  FemSpace space(15);
  const NoiseSpec spec{15, 0.0, 1e-3};
  const SineSynthesis synth(spec, space);
  const double k = 0.01;
  const std::size_t samples = 10000;
  std::vector<double> sum2(space.n_dof(), 0.0);
  for (std::size_t m = 0; m < samples; ++m) {
    const auto w = sample_fine_increments(spec, 1, k, 77, m);
    const Coeffs v = synth.apply(w.step(1));
    for (std::size_t i = 0; i < v.size(); ++i) sum2[i] += v[i] * v[i];
  }
  for (std::size_t i = 1; i <= space.n_dof(); ++i) {
    double expected = 0.0;
    for (std::size_t j = 1; j <= spec.modes; ++j) {
      const double s = std::sin(static_cast<double>(j) * M_PI * space.node(i));
      expected += 2.0 * spec.eigenvalue(j) * s * s;
    }
    expected *= k;
    CAPTURE(i);
    CHECK(sum2[i - 1] / samples == doctest::Approx(expected).epsilon(0.1));
  }
}
