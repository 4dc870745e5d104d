#include "parcell/drive_cycle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "parcell/errors.hpp"

namespace parcell {

DriveCycle::DriveCycle(std::vector<CycleSample> samples, CycleInterp interp)
    : samples_(std::move(samples)), interp_(interp) {
  for (std::size_t k = 0; k < samples_.size(); ++k) {
    if (!std::isfinite(samples_[k].t) || !std::isfinite(samples_[k].i)) {
      throw Error(ErrorCode::InvalidArgument,
                  "non-finite drive-cycle sample at index " + std::to_string(k));
    }
    if (k > 0 && !(samples_[k].t > samples_[k - 1].t)) {
      throw Error(ErrorCode::InvalidArgument,
                  "drive-cycle timestamps must be strictly increasing (index " +
                      std::to_string(k) + ")");
    }
  }
}

double DriveCycle::t_begin() const { return samples_.empty() ? 0.0 : samples_.front().t; }
double DriveCycle::t_end() const { return samples_.empty() ? 0.0 : samples_.back().t; }

bool DriveCycle::covers(double t0, double t1) const {
  if (samples_.empty()) return false;
  const double slack = 1e-9 * std::max(1.0, std::abs(t1));
  return t_begin() <= t0 + slack && t_end() >= t1 - slack;
}

double DriveCycle::current_at(double t) const {
  if (samples_.empty()) throw Error(ErrorCode::CycleGap, "empty drive cycle");
  if (t <= samples_.front().t) return samples_.front().i;
  if (t >= samples_.back().t) return samples_.back().i;
  auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                             [](double v, const CycleSample& s) { return v < s.t; });
  const CycleSample& hi = *it;
  const CycleSample& lo = *(it - 1);
  if (interp_ == CycleInterp::ZeroOrderHold) return lo.i;
  const double w = (t - lo.t) / (hi.t - lo.t);
  return lo.i + w * (hi.i - lo.i);
}

double DriveCycle::max_abs_current() const {
  double m = 0.0;
  for (const auto& s : samples_) m = std::max(m, std::abs(s.i));
  return m;
}

DriveCycle synth_udds_like(double amplitude, double duration, std::uint64_t seed) {
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw Error(ErrorCode::InvalidArgument, "drive-cycle amplitude must be positive");
  }
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw Error(ErrorCode::InvalidArgument, "drive-cycle duration must be positive");
  }
  const auto count = static_cast<std::size_t>(std::ceil(duration)) + 1;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  // Speed-like AR(1) walk; current follows its rate of change (acceleration
  // draws, braking regenerates), plus a cruising load term.
  std::vector<double> raw(count);
  double speed = 0.0;
  double accel = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    accel = 0.8 * accel + 0.6 * noise(rng);
    speed = std::max(0.0, 0.97 * speed + accel);
    raw[k] = -(accel + 0.05 * speed);
  }
  // Five-point moving average for band limiting.
  std::vector<double> smooth(count);
  for (std::size_t k = 0; k < count; ++k) {
    double acc = 0.0;
    int m = 0;
    for (std::size_t j = (k >= 2 ? k - 2 : 0); j <= std::min(count - 1, k + 2); ++j, ++m) {
      acc += raw[j];
    }
    smooth[k] = acc / m;
  }
  double mean = 0.0;
  for (double v : smooth) mean += v;
  mean /= static_cast<double>(count);
  double peak = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double fade = std::min(1.0, static_cast<double>(k) / 10.0);
    smooth[k] = (smooth[k] - mean) * fade;
    peak = std::max(peak, std::abs(smooth[k]));
  }
  std::vector<CycleSample> samples(count);
  for (std::size_t k = 0; k < count; ++k) {
    samples[k].t = static_cast<double>(k);
    samples[k].i = peak > 0.0 ? std::clamp(smooth[k] * amplitude / peak, -amplitude, amplitude) : 0.0;
  }
  return DriveCycle(std::move(samples), CycleInterp::ZeroOrderHold);
}

DriveCycle constant_cycle(double current, double duration) {
  const auto count = static_cast<std::size_t>(std::ceil(duration)) + 1;
  std::vector<CycleSample> samples(count);
  for (std::size_t k = 0; k < count; ++k) samples[k] = {static_cast<double>(k), current};
  return DriveCycle(std::move(samples));
}

}  // namespace parcell
