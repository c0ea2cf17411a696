#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bdf2spde/problems.hpp"
#include "bdf2spde/schemes.hpp"

namespace bdf2spde {

enum class ProblemKind { heat, quasilinear };

std::string to_string(ProblemKind kind);
ProblemKind parse_problem_kind(const std::string& text);

/// Monte Carlo convergence experiment. Defaults are the desk-scale setting;
/// full_scale() returns the published setting N_h = J = 2^12, n_ref = 2^15, levels 2^5..2^10, M = 10^4.
struct ExperimentConfig {
  ProblemKind problem = ProblemKind::heat;
  double sigma = 1.0;
  double r = 1.0;
  double eps = 1e-3;
  double t_final = 1.0;
  std::size_t n_h = 256;
  std::size_t modes = 256;
  std::vector<std::size_t> levels{32, 64, 128, 256, 512};
  std::size_t n_ref = 4096;
  std::size_t samples = 100;
  std::uint64_t seed = 20240101;
  double alpha = 0.05;
  std::vector<Scheme> schemes{Scheme::bem, Scheme::bdf2};
  Scheme reference = Scheme::bdf2;
  NewtonConfig newton{};
  bool record_timing = false;  // wall_seconds stays 0 unless set, keeping reports reproducible

  static ExperimentConfig full_scale();

  /// Throws ConfigError naming the offending key.
  void validate() const;
  Problem make_problem() const;
  NoiseSpec noise() const { return NoiseSpec{modes, r, eps}; }
};

/// One row of an error table.
struct LevelResult {
  Scheme scheme = Scheme::bdf2;
  std::size_t n_steps = 0;
  double error = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool ci_clipped = false;  // negative lower radicand reported as 0
  std::optional<double> eoc;
  std::size_t argmax_n = 0;
  double wall_seconds = 0.0;

  bool operator==(const LevelResult&) const = default;
};

struct ErrorReport {
  std::vector<LevelResult> rows;  // grouped by scheme (config order), levels ascending within a scheme

  const LevelResult& at(Scheme scheme, std::size_t n_steps) const;
  std::vector<LevelResult> rows_for(Scheme scheme) const;
  bool operator==(const ErrorReport&) const = default;
};

/// Streaming mean and sum of squared deviations (Welford).
class Welford {
 public:
  void push(double y) noexcept;
  std::size_t count() const noexcept { return count_; }
  double mean() const noexcept { return mean_; }
  /// Unbiased sample variance; 0 for fewer than two observations.
  double variance() const noexcept;

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Inverse standard normal CDF at p in (0,1); z_{0.975} = 1.959964...
double normal_quantile(double p);

/// (log e_i - log e_{i-1}) / (log k_i - log k_{i-1}); nullopt when an input is not positive.
std::optional<double> eoc(double err_prev, double err_cur, double k_prev, double k_cur);

struct StrongErrorEstimate {
  double error = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool ci_clipped = false;
  std::size_t argmax_n = 0;
};

/// error = max_n sqrt(mean Y_n) over the supplied time indices (index i of `per_step`
/// is time index first_n + i) and the CI [sqrt(Ybar - z S/sqrt(M)), sqrt(Ybar + z S/sqrt(M))] at the argmax.
StrongErrorEstimate estimate_strong_error(std::span<const Welford> per_step, std::size_t first_n, double alpha);

/// Everything one Monte Carlo sample contributes: Y_n = |X^n - X_ref(t_n)|_H^2
/// for every (scheme, level) and n = 2..N_k, in config order.
struct SampleErrors {
  std::vector<std::vector<double>> y;  // [scheme * levels + level][n - 2]
  std::vector<double> seconds;         // stepper wall time per (scheme, level) when timing is on
};

/// Runs the reference and every coarse stepper of one sample on a single
/// streamed fine path (coarse increments are partial sums of the fine ones).
SampleErrors simulate_sample(const ExperimentConfig& config, std::uint64_t sample_index);

/// Reference trajectory of one sample (n_ref steps of the reference scheme, full storage).
Trajectory compute_reference(const ExperimentConfig& config, std::uint64_t sample_index);

/// Error estimate of one (scheme, level) pair over config.samples samples.
StrongErrorEstimate strong_error(const ExperimentConfig& config, Scheme scheme, std::size_t n_steps,
                                 int workers = 0);

/// OpenMP over samples with `workers` threads (0: BDF2SPDE_WORKERS or all available).
/// Per-sample results are merged in sample-index order, so the report does not
/// depend on the worker count.
ErrorReport run_experiment(const ExperimentConfig& config, int workers = 0);

/// Single-threaded reference implementation of run_experiment.
ErrorReport run_experiment_serial(const ExperimentConfig& config);

/// Worker count from BDF2SPDE_WORKERS, falling back to the OpenMP default.
int default_workers();

}  // namespace bdf2spde
