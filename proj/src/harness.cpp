#include "bdf2spde/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "bdf2spde/errors.hpp"
#include "bdf2spde/linalg.hpp"
#include "bdf2spde/wiener.hpp"

namespace bdf2spde {

std::string to_string(ProblemKind kind) { return kind == ProblemKind::heat ? "heat" : "quasilinear"; }

ProblemKind parse_problem_kind(const std::string& text) {
  if (text == "heat") return ProblemKind::heat;
  if (text == "quasilinear") return ProblemKind::quasilinear;
  throw ConfigError("problem", "expected heat or quasilinear, got '" + text + "'");
}

ExperimentConfig ExperimentConfig::full_scale() {
  ExperimentConfig c;
  c.n_h = 4096;
  c.modes = 4096;
  c.levels = {32, 64, 128, 256, 512, 1024};
  c.n_ref = 32768;
  c.samples = 10000;
  return c;
}

void ExperimentConfig::validate() const {
  if (!std::isfinite(sigma)) throw ConfigError("sigma", "must be finite");
  if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("r", "must be a nonnegative number");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("eps", "must be positive");
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw ConfigError("t-final", "must be positive");
  if (n_h == 0) throw ConfigError("nh", "must be positive");
  if (modes == 0) throw ConfigError("j", "must be positive");
  if (n_ref == 0) throw ConfigError("nref", "must be positive");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const std::size_t l = levels[i];
    if (l < 2) throw ConfigError("levels", "every level needs at least 2 steps, got " + std::to_string(l));
    if (n_ref % l != 0) {
      throw ConfigError("levels", "level " + std::to_string(l) + " does not divide nref " + std::to_string(n_ref));
    }
    if (i > 0 && l <= levels[i - 1]) throw ConfigError("levels", "levels must be strictly increasing");
  }
  if (samples == 0) throw ConfigError("samples", "must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha", "must lie in (0, 1)");
  if (schemes.empty()) throw ConfigError("scheme", "no scheme selected");
  if (!(newton.tol > 0.0)) throw ConfigError("newton-tol", "must be positive");
  if (newton.n_min < 1 || newton.n_min > newton.n_max) throw ConfigError("newton-min", "need 1 <= newton-min <= newton-max");
}

Problem ExperimentConfig::make_problem() const {
  if (problem == ProblemKind::heat) return HeatProblem{sigma, noise()};
  return QuasilinearProblem{sigma, noise()};
}

const LevelResult& ErrorReport::at(Scheme scheme, std::size_t n_steps) const {
  for (const auto& row : rows) {
    if (row.scheme == scheme && row.n_steps == n_steps) return row;
  }
  throw std::out_of_range("ErrorReport: no row for " + to_string(scheme) + " at N_k = " + std::to_string(n_steps));
}

std::vector<LevelResult> ErrorReport::rows_for(Scheme scheme) const {
  std::vector<LevelResult> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out),
               [scheme](const LevelResult& r) { return r.scheme == scheme; });
  return out;
}

void Welford::push(double y) noexcept {
  ++count_;
  const double delta = y - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (y - mean_);
}

double Welford::variance() const noexcept {
  return count_ < 2 ? 0.0 : m2_ / static_cast<double>(count_ - 1);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0, 1)");
  // Acklam's rational approximation, then one Halley step against erfc.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double rr = q * q;
    x = (((((a[0] * rr + a[1]) * rr + a[2]) * rr + a[3]) * rr + a[4]) * rr + a[5]) * q /
        (((((b[0] * rr + b[1]) * rr + b[2]) * rr + b[3]) * rr + b[4]) * rr + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

std::optional<double> eoc(double err_prev, double err_cur, double k_prev, double k_cur) {
  if (!(err_prev > 0.0) || !(err_cur > 0.0) || !(k_prev > 0.0) || !(k_cur > 0.0) || k_prev == k_cur) {
    return std::nullopt;
  }
  return (std::log(err_cur) - std::log(err_prev)) / (std::log(k_cur) - std::log(k_prev));
}

StrongErrorEstimate estimate_strong_error(std::span<const Welford> per_step, std::size_t first_n, double alpha) {
  StrongErrorEstimate est;
  if (per_step.empty()) return est;
  std::size_t best = 0;
  for (std::size_t i = 1; i < per_step.size(); ++i) {
    if (per_step[i].mean() > per_step[best].mean()) best = i;
  }
  const Welford& w = per_step[best];
  const double mean = std::max(0.0, w.mean());
  const double half = normal_quantile(1.0 - 0.5 * alpha) * std::sqrt(w.variance()) /
                      std::sqrt(static_cast<double>(w.count()));
  est.argmax_n = first_n + best;
  est.error = std::sqrt(mean);
  const double lo = mean - half;
  est.ci_clipped = lo < 0.0;
  est.ci_lo = est.ci_clipped ? 0.0 : std::sqrt(lo);
  est.ci_hi = std::sqrt(mean + half);
  return est;
}

namespace {

using Clock = std::chrono::steady_clock;

struct LevelRun {
  std::size_t factor;
  std::vector<double> modes;  // running coarse mode increment
  std::vector<Stepper> steppers;  // one per scheme
};

}  // namespace

SampleErrors simulate_sample(const ExperimentConfig& config, std::uint64_t sample_index) {
  const Problem problem = config.make_problem();
  const FemSpace space(config.n_h);
  const NoiseSpec noise = config.noise();
  const TriDiag mass = assemble_mass(space);
  const double k_fine = config.t_final / static_cast<double>(config.n_ref);
  const bool noisy = config.sigma != 0.0;
  const std::size_t n_schemes = config.schemes.size();

  const Coeffs x0 = interpolate(initial_value, space);
  Stepper reference(problem, space, config.reference, k_fine, config.newton);
  reference.reset(x0);

  std::vector<LevelRun> levels;
  levels.reserve(config.levels.size());
  for (std::size_t level : config.levels) {
    LevelRun run{config.n_ref / level, std::vector<double>(noise.modes, 0.0), {}};
    const double k = config.t_final / static_cast<double>(level);
    for (Scheme s : config.schemes) {
      run.steppers.emplace_back(problem, space, s, k, config.newton);
      run.steppers.back().reset(x0);
    }
    levels.push_back(std::move(run));
  }

  SampleErrors out;
  out.y.resize(n_schemes * levels.size());
  out.seconds.assign(n_schemes * levels.size(), 0.0);
  for (std::size_t l = 0; l < levels.size(); ++l) {
    for (std::size_t s = 0; s < n_schemes; ++s) out.y[s * levels.size() + l].reserve(config.levels[l] - 1);
  }

  std::optional<SineSynthesis> synthesis;
  std::optional<IncrementStream> stream;
  if (noisy) {
    synthesis.emplace(noise, space);
    stream.emplace(noise.modes, k_fine, config.seed, sample_index);
  }
  std::vector<double> fine_modes(noise.modes, 0.0);
  Coeffs dw_fine(space.n_dof(), 0.0), dw_coarse(space.n_dof(), 0.0), diff(space.n_dof());

  for (std::size_t n = 1; n <= config.n_ref; ++n) {
    if (noisy) {
      stream->next(fine_modes);
      synthesis->apply(fine_modes, dw_fine);
    }
    const Coeffs& x_ref = reference.advance(dw_fine);
    for (std::size_t l = 0; l < levels.size(); ++l) {
      LevelRun& run = levels[l];
      if (noisy) {
        for (std::size_t j = 0; j < fine_modes.size(); ++j) run.modes[j] += fine_modes[j];
      }
      if (n % run.factor != 0) continue;
      const std::size_t m = n / run.factor;
      if (noisy) {
        synthesis->apply(run.modes, dw_coarse);
        std::fill(run.modes.begin(), run.modes.end(), 0.0);
      }
      for (std::size_t s = 0; s < n_schemes; ++s) {
        Stepper& stepper = run.steppers[s];
        const auto start = config.record_timing ? Clock::now() : Clock::time_point{};
        const Coeffs& x = stepper.advance(dw_coarse);
        if (config.record_timing) {
          out.seconds[s * levels.size() + l] += std::chrono::duration<double>(Clock::now() - start).count();
        }
        if (m < 2) continue;
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = x[i] - x_ref[i];
        out.y[s * levels.size() + l].push_back(quadratic_form(mass, diff));
      }
    }
  }
  return out;
}

Trajectory compute_reference(const ExperimentConfig& config, std::uint64_t sample_index) {
  config.validate();
  const Problem problem = config.make_problem();
  const FemSpace space(config.n_h);
  const TemporalGrid grid{config.t_final, config.n_ref};
  if (config.sigma == 0.0) {
    // The path is never read; skip drawing it.
    WienerIncrements zero(config.modes, config.n_ref, grid.step(), config.seed, sample_index);
    return run_trajectory(problem, space, grid, config.reference, zero, config.newton);
  }
  const WienerIncrements fine =
      sample_fine_increments(config.noise(), config.n_ref, grid.step(), config.seed, sample_index);
  return run_trajectory(problem, space, grid, config.reference, fine, config.newton);
}

int default_workers() {
  if (const char* env = std::getenv("BDF2SPDE_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return std::max(1, omp_get_max_threads());
}

namespace {

class Accumulator {
 public:
  explicit Accumulator(const ExperimentConfig& config) : config_(config) {
    for (std::size_t s = 0; s < config.schemes.size(); ++s) {
      for (std::size_t level : config.levels) per_step_.emplace_back(level - 1);
    }
    seconds_.assign(per_step_.size(), 0.0);
  }

  void push(const SampleErrors& sample) {
    for (std::size_t c = 0; c < per_step_.size(); ++c) {
      for (std::size_t i = 0; i < per_step_[c].size(); ++i) per_step_[c][i].push(sample.y[c][i]);
      seconds_[c] += sample.seconds[c];
    }
  }

  ErrorReport finish() const {
    ErrorReport report;
    const std::size_t n_levels = config_.levels.size();
    for (std::size_t s = 0; s < config_.schemes.size(); ++s) {
      for (std::size_t l = 0; l < n_levels; ++l) {
        const std::size_t c = s * n_levels + l;
        const StrongErrorEstimate est = estimate_strong_error(per_step_[c], 2, config_.alpha);
        LevelResult row;
        row.scheme = config_.schemes[s];
        row.n_steps = config_.levels[l];
        row.error = est.error;
        row.ci_lo = est.ci_lo;
        row.ci_hi = est.ci_hi;
        row.ci_clipped = est.ci_clipped;
        row.argmax_n = est.argmax_n;
        row.wall_seconds = seconds_[c];
        if (l > 0) {
          const LevelResult& prev = report.rows.back();
          row.eoc = eoc(prev.error, row.error, config_.t_final / static_cast<double>(prev.n_steps),
                        config_.t_final / static_cast<double>(row.n_steps));
        }
        report.rows.push_back(row);
      }
    }
    return report;
  }

 private:
  const ExperimentConfig& config_;
  std::vector<std::vector<Welford>> per_step_;
  std::vector<double> seconds_;
};

// Without noise every sample is the same deterministic run.
bool deterministic(const ExperimentConfig& config) { return config.sigma == 0.0; }

ErrorReport run_deterministic(const ExperimentConfig& config) {
  Accumulator acc(config);
  SampleErrors sample = simulate_sample(config, 0);
  for (std::size_t m = 0; m < config.samples; ++m) {
    acc.push(sample);
    std::fill(sample.seconds.begin(), sample.seconds.end(), 0.0);  // computed once, timed once
  }
  return acc.finish();
}

}  // namespace

ErrorReport run_experiment_serial(const ExperimentConfig& config) {
  config.validate();
  if (deterministic(config)) return run_deterministic(config);
  Accumulator acc(config);
  for (std::size_t m = 0; m < config.samples; ++m) acc.push(simulate_sample(config, m));
  return acc.finish();
}

ErrorReport run_experiment(const ExperimentConfig& config, int workers) {
  config.validate();
  if (deterministic(config)) return run_deterministic(config);
  if (workers <= 0) workers = default_workers();

  Accumulator acc(config);
  const std::size_t batch = static_cast<std::size_t>(workers) * 4;
  std::vector<SampleErrors> buffer(batch);
  std::vector<std::exception_ptr> failures(batch);
  for (std::size_t start = 0; start < config.samples; start += batch) {
    const std::size_t count = std::min(batch, config.samples - start);
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        buffer[i] = simulate_sample(config, start + static_cast<std::size_t>(i));
        failures[i] = nullptr;
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
    std::string diagnostics;
    std::size_t n_failed = 0;
    for (std::size_t i = 0; i < count; ++i) {
      if (!failures[i]) continue;
      ++n_failed;
      try {
        std::rethrow_exception(failures[i]);
      } catch (const std::exception& e) {
        if (n_failed <= 5) diagnostics += "\n  sample " + std::to_string(start + i) + ": " + e.what();
      }
    }
    if (n_failed > 0) {
      throw std::runtime_error(std::to_string(n_failed) + " sample(s) failed in batch starting at " +
                               std::to_string(start) + diagnostics);
    }
    for (std::size_t i = 0; i < count; ++i) acc.push(buffer[i]);
  }
  return acc.finish();
}

StrongErrorEstimate strong_error(const ExperimentConfig& config, Scheme scheme, std::size_t n_steps, int workers) {
  ExperimentConfig single = config;
  single.schemes = {scheme};
  single.levels = {n_steps};
  const LevelResult row = run_experiment(single, workers).rows.front();
  return {row.error, row.ci_lo, row.ci_hi, row.ci_clipped, row.argmax_n};
}

}  // namespace bdf2spde
