#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "bdf2spde/fem.hpp"

namespace bdf2spde {

/// Truncated Q-Wiener process on L2(0,1) in the sine basis chi_j = sqrt(2) sin(j pi x)
/// with eigenvalues q_j = j^-(2r+1+eps).
struct NoiseSpec {
  std::size_t modes = 256;  // truncation J
  double r = 1.0;           // spatial regularity
  double eps = 1e-3;

  void validate() const;
  double eigenvalue(std::size_t j) const;
  /// sqrt(2) * sqrt(q_j): coefficient of beta_j(t) sin(j pi x).
  double mode_weight(std::size_t j) const;
  /// Sum of the first `modes` eigenvalues.
  double trace() const;
};

/// Per-sample Gaussian stream. Seeded by mixing (seed, sample_index), so a
/// sample's path never depends on which worker draws it.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t sample_index) noexcept;

/// Draws the mode increments step by step; step n fills J values ~ N(0, step).
class IncrementStream {
 public:
  IncrementStream(std::size_t modes, double step_size, std::uint64_t seed, std::uint64_t sample_index);

  void next(std::span<double> out);
  std::size_t modes() const noexcept { return modes_; }

 private:
  std::size_t modes_;
  double std_dev_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Mode increments Delta beta_j^n for j = 1..J and n = 1..n_steps, stored step-major.
class WienerIncrements {
 public:
  WienerIncrements(std::size_t modes, std::size_t n_steps, double step_size, std::uint64_t seed,
                   std::uint64_t sample_index);

  std::size_t modes() const noexcept { return modes_; }
  std::size_t n_steps() const noexcept { return n_steps_; }
  double step_size() const noexcept { return step_size_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t sample_index() const noexcept { return sample_index_; }

  /// Increments of step n (1-based) for all modes.
  std::span<const double> step(std::size_t n) const;
  std::span<double> step(std::size_t n);
  /// Increment of mode j (1-based) in step n (1-based).
  double at(std::size_t j, std::size_t n) const { return step(n)[j - 1]; }

  bool operator==(const WienerIncrements& other) const = default;

 private:
  std::size_t modes_;
  std::size_t n_steps_;
  double step_size_;
  std::uint64_t seed_;
  std::uint64_t sample_index_;
  std::vector<double> data_;
};

WienerIncrements sample_fine_increments(const NoiseSpec& spec, std::size_t n_steps_fine, double k_fine,
                                        std::uint64_t seed, std::uint64_t sample_index);

/// Sums consecutive blocks of `factor` fine steps; throws std::invalid_argument
/// when factor does not divide the number of fine steps.
WienerIncrements aggregate_to_coarse(const WienerIncrements& fine, std::size_t factor);

/// Delta W^J(x_i) = sum_j sqrt(2) q_j^(1/2) Delta beta_j sin(j pi x_i) by direct summation.
/// Serial reference path; see SineSynthesis for the transform path.
Coeffs increment_at_nodes(const NoiseSpec& spec, std::span<const double> mode_increments, const FemSpace& space);

/// Fast evaluation of the KL sum at the interior nodes through a type-I discrete
/// sine transform (FFTW RODFT00). Modes beyond N_h are folded back onto the
/// transform length using the 2(N_h+1)-periodicity of j -> sin(j pi i h).
/// Construct once (planning is not thread-safe); apply() is safe to call concurrently.
class SineSynthesis {
 public:
  SineSynthesis(const NoiseSpec& spec, const FemSpace& space);
  ~SineSynthesis();
  SineSynthesis(SineSynthesis&&) noexcept;
  SineSynthesis& operator=(SineSynthesis&&) noexcept;
  SineSynthesis(const SineSynthesis&) = delete;
  SineSynthesis& operator=(const SineSynthesis&) = delete;

  std::size_t modes() const noexcept { return weights_.size(); }
  std::size_t n_dof() const noexcept { return n_dof_; }

  void apply(std::span<const double> mode_increments, std::span<double> out) const;
  Coeffs apply(std::span<const double> mode_increments) const;

 private:
  struct Plan;
  std::size_t n_dof_;
  std::vector<double> weights_;          // mode_weight(j) / 2 (RODFT00 carries a factor 2)
  std::vector<std::size_t> target_;      // folded transform index per mode
  std::vector<signed char> sign_;        // +1, -1 or 0 (mode vanishes on the grid)
  std::unique_ptr<Plan> plan_;
};

}  // namespace bdf2spde
