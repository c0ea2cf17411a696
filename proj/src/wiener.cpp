#include "bdf2spde/wiener.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "bdf2spde/errors.hpp"

namespace bdf2spde {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void NoiseSpec::validate() const {
  if (modes == 0) throw std::invalid_argument("NoiseSpec: truncation J must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("NoiseSpec: eps must be positive");
  if (!(r >= 0.0)) throw std::invalid_argument("NoiseSpec: r must be nonnegative");
}

double NoiseSpec::eigenvalue(std::size_t j) const {
  return std::pow(static_cast<double>(j), -(2.0 * r + 1.0 + eps));
}

double NoiseSpec::mode_weight(std::size_t j) const {
  return std::numbers::sqrt2 * std::pow(static_cast<double>(j), -0.5 * (2.0 * r + 1.0 + eps));
}

double NoiseSpec::trace() const {
  double sum = 0.0;
  for (std::size_t j = modes; j >= 1; --j) sum += eigenvalue(j);  // small terms first
  return sum;
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t sample_index) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(sample_index + 0x632be59bd9b4e019ULL));
}

IncrementStream::IncrementStream(std::size_t modes, double step_size, std::uint64_t seed,
                                 std::uint64_t sample_index)
    : modes_(modes), std_dev_(std::sqrt(step_size)), engine_(stream_seed(seed, sample_index)) {
  if (!(step_size > 0.0)) throw std::invalid_argument("IncrementStream: step size must be positive");
}

void IncrementStream::next(std::span<double> out) {
  if (out.size() != modes_) throw DimensionMismatch("IncrementStream::next", modes_, out.size());
  for (double& v : out) v = std_dev_ * normal_(engine_);
}

WienerIncrements::WienerIncrements(std::size_t modes, std::size_t n_steps, double step_size,
                                   std::uint64_t seed, std::uint64_t sample_index)
    : modes_(modes),
      n_steps_(n_steps),
      step_size_(step_size),
      seed_(seed),
      sample_index_(sample_index),
      data_(modes * n_steps, 0.0) {}

std::span<const double> WienerIncrements::step(std::size_t n) const {
  if (n == 0 || n > n_steps_) throw std::out_of_range("WienerIncrements: step index " + std::to_string(n));
  return {data_.data() + (n - 1) * modes_, modes_};
}

std::span<double> WienerIncrements::step(std::size_t n) {
  if (n == 0 || n > n_steps_) throw std::out_of_range("WienerIncrements: step index " + std::to_string(n));
  return {data_.data() + (n - 1) * modes_, modes_};
}

WienerIncrements sample_fine_increments(const NoiseSpec& spec, std::size_t n_steps_fine, double k_fine,
                                        std::uint64_t seed, std::uint64_t sample_index) {
  spec.validate();
  if (n_steps_fine == 0) throw std::invalid_argument("sample_fine_increments: need at least one step");
  WienerIncrements w(spec.modes, n_steps_fine, k_fine, seed, sample_index);
  IncrementStream stream(spec.modes, k_fine, seed, sample_index);
  for (std::size_t n = 1; n <= n_steps_fine; ++n) stream.next(w.step(n));
  return w;
}

WienerIncrements aggregate_to_coarse(const WienerIncrements& fine, std::size_t factor) {
  if (factor == 0 || fine.n_steps() % factor != 0) {
    throw std::invalid_argument("aggregate_to_coarse: factor " + std::to_string(factor) +
                                " does not divide " + std::to_string(fine.n_steps()) + " fine steps");
  }
  const std::size_t n_coarse = fine.n_steps() / factor;
  WienerIncrements coarse(fine.modes(), n_coarse, fine.step_size() * static_cast<double>(factor), fine.seed(),
                          fine.sample_index());
  for (std::size_t m = 1; m <= n_coarse; ++m) {
    auto dst = coarse.step(m);
    for (std::size_t n = (m - 1) * factor + 1; n <= m * factor; ++n) {
      auto src = fine.step(n);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
  }
  return coarse;
}

Coeffs increment_at_nodes(const NoiseSpec& spec, std::span<const double> mode_increments, const FemSpace& space) {
  if (mode_increments.size() != spec.modes) {
    throw DimensionMismatch("increment_at_nodes", spec.modes, mode_increments.size());
  }
  Coeffs out(space.n_dof(), 0.0);
  for (std::size_t i = 1; i <= space.n_dof(); ++i) {
    const double x = space.node(i);
    double sum = 0.0;
    for (std::size_t j = 1; j <= spec.modes; ++j) {
      sum += spec.mode_weight(j) * mode_increments[j - 1] * std::sin(static_cast<double>(j) * std::numbers::pi * x);
    }
    out[i - 1] = sum;
  }
  return out;
}

struct SineSynthesis::Plan {
  fftw_plan plan = nullptr;
  ~Plan() {
    if (plan) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

SineSynthesis::SineSynthesis(const NoiseSpec& spec, const FemSpace& space)
    : n_dof_(space.n_dof()), weights_(spec.modes), target_(spec.modes), sign_(spec.modes), plan_(new Plan) {
  spec.validate();
  const std::size_t n1 = n_dof_ + 1;
  const std::size_t period = 2 * n1;
  for (std::size_t j = 1; j <= spec.modes; ++j) {
    weights_[j - 1] = 0.5 * spec.mode_weight(j);
    const std::size_t m = j % period;
    if (m == 0 || m == n1) {
      sign_[j - 1] = 0;
      target_[j - 1] = 0;
    } else if (m < n1) {
      sign_[j - 1] = 1;
      target_[j - 1] = m - 1;
    } else {
      sign_[j - 1] = -1;
      target_[j - 1] = period - m - 1;
    }
  }
  std::vector<double> in(n_dof_), out(n_dof_);
  std::lock_guard lock(planner_mutex());
  plan_->plan = fftw_plan_r2r_1d(static_cast<int>(n_dof_), in.data(), out.data(), FFTW_RODFT00,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plan_->plan) throw std::runtime_error("SineSynthesis: FFTW planning failed");
}

SineSynthesis::~SineSynthesis() = default;
SineSynthesis::SineSynthesis(SineSynthesis&&) noexcept = default;
SineSynthesis& SineSynthesis::operator=(SineSynthesis&&) noexcept = default;

void SineSynthesis::apply(std::span<const double> mode_increments, std::span<double> out) const {
  if (mode_increments.size() != weights_.size()) {
    throw DimensionMismatch("SineSynthesis::apply", weights_.size(), mode_increments.size());
  }
  if (out.size() != n_dof_) throw DimensionMismatch("SineSynthesis::apply", n_dof_, out.size());
  std::vector<double> folded(n_dof_, 0.0);
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    if (sign_[j] == 0) continue;
    const double c = weights_[j] * mode_increments[j];
    folded[target_[j]] += sign_[j] > 0 ? c : -c;
  }
  fftw_execute_r2r(plan_->plan, folded.data(), out.data());
}

Coeffs SineSynthesis::apply(std::span<const double> mode_increments) const {
  Coeffs out(n_dof_);
  apply(mode_increments, out);
  return out;
}

}  // namespace bdf2spde
