#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pulsesynth {

// Uniformly sampled 1-D signal. Samples are finite; the rate is positive.
// An empty Waveform is representable (e.g. after cropping) but operations
// that consume samples reject it.
class Waveform {
 public:
  Waveform() = default;
  Waveform(std::vector<double> samples, double sample_rate_hz);

  std::span<const double> samples() const noexcept { return samples_; }
  const std::vector<double>& values() const noexcept { return samples_; }
  double sample_rate_hz() const noexcept { return rate_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double operator[](std::size_t i) const { return samples_[i]; }

  double duration_s() const noexcept { return static_cast<double>(samples_.size()) / rate_; }

  // Samples [first, first + count), clamped to the end.
  Waveform slice(std::size_t first, std::size_t count) const;

 private:
  std::vector<double> samples_;
  double rate_ = 1.0;
};

// Synchronized ECG/PPG channels sharing a rate and time base.
class EcgPpgPair {
 public:
  EcgPpgPair() = default;
  EcgPpgPair(Waveform ecg, Waveform ppg);

  const Waveform& ecg() const noexcept { return ecg_; }
  const Waveform& ppg() const noexcept { return ppg_; }
  double sample_rate_hz() const noexcept { return ecg_.sample_rate_hz(); }
  std::size_t size() const noexcept { return ecg_.size(); }

 private:
  Waveform ecg_;
  Waveform ppg_;
};

// Throws DataError when `w` has no samples.
void require_nonempty(const Waveform& w, const char* what);

}  // namespace pulsesynth
