#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "pulsesynth/waveform.hpp"

namespace pulsesynth {

// Passband edges used by the preprocessing pipeline.
struct Band {
  double low_hz;
  double high_hz;
};

inline constexpr Band kEcgBand{0.4, 45.0};
inline constexpr Band kPpgBand{0.3, 8.0};

// One second-order section in direct form II transposed, a0 normalized to 1.
struct Biquad {
  double b0, b1, b2;
  double a1, a2;
};

// 4th-order Butterworth high-pass followed by a 4th-order Butterworth
// low-pass, bilinear transform with frequency prewarping. Four sections.
std::vector<Biquad> butterworth_bandpass_sections(double low_hz, double high_hz, double fs_hz);

// Throws BandSpecError unless 0 < low < high < fs/2.
void validate_band(double low_hz, double high_hz, double fs_hz);

// Zero-phase (forward-backward) Butterworth bandpass. Ends are extended by
// odd reflection over one settling length of the slowest pole and the
// filter state starts in steady state for the first padded sample, so the
// operation is linear in its input.
Waveform bandpass(const Waveform& w, double low_hz, double high_hz);
inline Waveform bandpass(const Waveform& w, Band band) {
  return bandpass(w, band.low_hz, band.high_hz);
}

// Band-limited resampling by Kaiser-windowed sinc interpolation at the
// target instants, cutoff 0.45 x min(source, target) rate. Output length is
// round(len * target / source). Equal rates return the input unchanged.
Waveform resample(const Waveform& w, double target_rate_hz);

// Affine map onto [-1, 1]. Throws DegenerateRangeError for constant input.
Waveform minmax_normalize(const Waveform& w);

// Crops each channel to start at its first detected peak and truncates both
// to the shorter remainder. Throws AlignmentError if either channel has no
// peak.
EcgPpgPair align_first_peaks(const EcgPpgPair& pair, int min_distance,
                             double min_prominence = 0.0);

struct Segment {
  std::size_t start_index;
  std::vector<double> values;
};

inline constexpr std::size_t kDefaultSegmentWindow = 512;

// Sliding windows with stride window * (1 - overlap_fraction); trailing
// partial windows are dropped. A window longer than the signal yields no
// segments.
std::vector<Segment> segment(const Waveform& w, std::size_t window = kDefaultSegmentWindow,
                             double overlap_fraction = 0.5);

// Start offsets only, same arithmetic as segment().
std::vector<std::size_t> segment_starts(std::size_t length, std::size_t window,
                                        double overlap_fraction);

struct Spectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;  // window_len / 2 + 1
  std::size_t hop = 0;
  std::size_t window_len = 0;
  std::vector<double> magnitudes;  // row-major [frame][bin], log(|X| + delta)

  double at(std::size_t frame, std::size_t bin) const { return magnitudes[frame * bins + bin]; }
};

struct StftOptions {
  std::size_t window_len = 128;
  std::size_t hop = 64;
  double delta = 1e-10;
};

// Log-magnitude STFT with a periodic Hann window, frames taken without
// centering: frame m covers samples [m*hop, m*hop + window_len).
Spectrogram stft_spectrogram(const Waveform& w, const StftOptions& opt = {});

}  // namespace pulsesynth
