#pragma once

#include <cstdint>
#include <vector>

namespace parcell {

enum class CycleInterp { ZeroOrderHold, Linear };

struct CycleSample {
  double t = 0.0;  // [s]
  double i = 0.0;  // total current [A], positive charges the pack
};

/// Time-stamped total-current signal.
class DriveCycle {
 public:
  DriveCycle() = default;
  /// Throws InvalidArgument if timestamps are not strictly increasing or any
  /// value is non-finite.
  explicit DriveCycle(std::vector<CycleSample> samples,
                      CycleInterp interp = CycleInterp::ZeroOrderHold);

  const std::vector<CycleSample>& samples() const { return samples_; }
  CycleInterp interp() const { return interp_; }
  bool empty() const { return samples_.empty(); }
  double t_begin() const;
  double t_end() const;

  bool covers(double t0, double t1) const;
  double current_at(double t) const;
  double max_abs_current() const;

 private:
  std::vector<CycleSample> samples_;
  CycleInterp interp_ = CycleInterp::ZeroOrderHold;
};

/// Reproducible EV-like charge/discharge profile sampled at 1 Hz: low-pass
/// filtered random walk with frequent sign changes, mean removed, faded in
/// from zero over the first ten seconds and scaled so max |I| == amplitude.
DriveCycle synth_udds_like(double amplitude, double duration, std::uint64_t seed);

/// Constant current over [0, duration] at 1 Hz.
DriveCycle constant_cycle(double current, double duration);

}  // namespace parcell
