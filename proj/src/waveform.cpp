#include "pulsesynth/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pulsesynth/error.hpp"

namespace pulsesynth {

Waveform::Waveform(std::vector<double> samples, double sample_rate_hz)
    : samples_(std::move(samples)), rate_(sample_rate_hz) {
  if (!(rate_ > 0.0) || !std::isfinite(rate_)) {
    throw InvalidArgument("sample rate must be positive and finite");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw DataError("non-finite sample at index " + std::to_string(i));
    }
  }
}

Waveform Waveform::slice(std::size_t first, std::size_t count) const {
  first = std::min(first, samples_.size());
  count = std::min(count, samples_.size() - first);
  auto begin = samples_.begin() + static_cast<std::ptrdiff_t>(first);
  return Waveform({begin, begin + static_cast<std::ptrdiff_t>(count)}, rate_);
}

EcgPpgPair::EcgPpgPair(Waveform ecg, Waveform ppg) : ecg_(std::move(ecg)), ppg_(std::move(ppg)) {
  if (ecg_.sample_rate_hz() != ppg_.sample_rate_hz()) {
    throw ShapeError("ECG and PPG sample rates differ");
  }
  if (ecg_.size() != ppg_.size()) {
    throw ShapeError("ECG and PPG lengths differ");
  }
}

void require_nonempty(const Waveform& w, const char* what) {
  if (w.empty()) {
    throw DataError(std::string(what) + ": waveform has no samples");
  }
}

}  // namespace pulsesynth
