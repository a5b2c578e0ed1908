#include "pulsesynth/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pulsesynth/error.hpp"
#include "pulsesynth/peaks.hpp"
#include "pulsesynth/spectral.hpp"

namespace pulsesynth {

namespace {

constexpr double kPi = std::numbers::pi;

// Q factors of the two sections of a 4th-order Butterworth prototype.
constexpr std::array<double, 2> kButterworth4Q{0.54119610014619698, 1.3065629648763766};

Biquad lowpass_section(double fc, double fs, double q) {
  const double w0 = 2.0 * kPi * fc / fs;
  const double cw = std::cos(w0);
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  return {(1.0 - cw) / 2.0 / a0, (1.0 - cw) / a0, (1.0 - cw) / 2.0 / a0, -2.0 * cw / a0,
          (1.0 - alpha) / a0};
}

Biquad highpass_section(double fc, double fs, double q) {
  const double w0 = 2.0 * kPi * fc / fs;
  const double cw = std::cos(w0);
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  return {(1.0 + cw) / 2.0 / a0, -(1.0 + cw) / a0, (1.0 + cw) / 2.0 / a0, -2.0 * cw / a0,
          (1.0 - alpha) / a0};
}

double pole_radius(const Biquad& s) {
  const double disc = s.a1 * s.a1 - 4.0 * s.a2;
  if (disc < 0.0) return std::sqrt(s.a2);
  const double r = std::sqrt(disc);
  return std::max(std::abs((-s.a1 + r) / 2.0), std::abs((-s.a1 - r) / 2.0));
}

// Samples for the slowest pole to decay by 1e-6.
std::size_t settling_length(const std::vector<Biquad>& sections) {
  double rmax = 0.0;
  for (const auto& s : sections) rmax = std::max(rmax, pole_radius(s));
  if (rmax <= 0.0) return 1;
  if (rmax >= 1.0) throw NumericalError("unstable filter section");
  return static_cast<std::size_t>(std::ceil(std::log(1e-6) / std::log(rmax)));
}

struct SectionState {
  double s1 = 0.0;
  double s2 = 0.0;
};

// Steady-state section states for a unit step at the cascade input.
std::vector<SectionState> step_states(const std::vector<Biquad>& sections) {
  std::vector<SectionState> zi(sections.size());
  double scale = 1.0;
  for (std::size_t k = 0; k < sections.size(); ++k) {
    const auto& s = sections[k];
    const double gain = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    zi[k].s2 = (s.b2 - s.a2 * gain) * scale;
    zi[k].s1 = (s.b1 - s.a1 * gain) * scale + zi[k].s2;
    scale *= gain;
  }
  return zi;
}

void run_cascade(const std::vector<Biquad>& sections, const std::vector<SectionState>& unit_zi,
                 std::vector<double>& x) {
  if (x.empty()) return;
  const double x0 = x.front();
  for (std::size_t k = 0; k < sections.size(); ++k) {
    const auto& s = sections[k];
    double s1 = unit_zi[k].s1 * x0;
    double s2 = unit_zi[k].s2 * x0;
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + s1;
      s1 = s.b1 * in - s.a1 * out + s2;
      s2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

double bessel_i0(double x) { return std::cyl_bessel_i(0.0, x); }

}  // namespace

void validate_band(double low_hz, double high_hz, double fs_hz) {
  const double nyquist = fs_hz / 2.0;
  if (!(low_hz > 0.0) || !(high_hz > low_hz) || !(high_hz < nyquist)) {
    throw BandSpecError("invalid band " + std::to_string(low_hz) + "-" + std::to_string(high_hz) +
                        " Hz for sample rate " + std::to_string(fs_hz) +
                        " Hz (need 0 < low < high < Nyquist)");
  }
}

std::vector<Biquad> butterworth_bandpass_sections(double low_hz, double high_hz, double fs_hz) {
  validate_band(low_hz, high_hz, fs_hz);
  std::vector<Biquad> sections;
  for (double q : kButterworth4Q) sections.push_back(highpass_section(low_hz, fs_hz, q));
  for (double q : kButterworth4Q) sections.push_back(lowpass_section(high_hz, fs_hz, q));
  return sections;
}

Waveform bandpass(const Waveform& w, double low_hz, double high_hz) {
  require_nonempty(w, "bandpass");
  const auto sections = butterworth_bandpass_sections(low_hz, high_hz, w.sample_rate_hz());
  const auto zi = step_states(sections);

  const auto& x = w.values();
  const std::size_t n = x.size();
  const std::size_t pad = std::min(settling_length(sections), n - 1);

  // Odd reflection about each end point.
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t k = pad; k >= 1; --k) ext.push_back(2.0 * x.front() - x[k]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t k = 1; k <= pad; ++k) ext.push_back(2.0 * x.back() - x[n - 1 - k]);

  run_cascade(sections, zi, ext);
  std::reverse(ext.begin(), ext.end());
  run_cascade(sections, zi, ext);
  std::reverse(ext.begin(), ext.end());

  std::vector<double> out(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                          ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
  return Waveform(std::move(out), w.sample_rate_hz());
}

Waveform resample(const Waveform& w, double target_rate_hz) {
  if (!(target_rate_hz > 0.0) || !std::isfinite(target_rate_hz)) {
    throw InvalidArgument("target rate must be positive");
  }
  require_nonempty(w, "resample");
  const double fs = w.sample_rate_hz();
  if (target_rate_hz == fs) return w;

  const auto& x = w.values();
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto m = static_cast<std::size_t>(
      std::llround(static_cast<double>(x.size()) * target_rate_hz / fs));

  constexpr double kZeroCrossings = 16.0;
  constexpr double kBeta = 8.0;
  const double fc = 0.45 * std::min(fs, target_rate_hz);
  const double half_width = kZeroCrossings / (2.0 * fc);  // seconds
  const double i0_beta = bessel_i0(kBeta);

  std::vector<double> out(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double t = static_cast<double>(k) / target_rate_hz;
    const auto first = std::max<std::ptrdiff_t>(
        0, static_cast<std::ptrdiff_t>(std::ceil((t - half_width) * fs)));
    const auto last = std::min<std::ptrdiff_t>(
        n - 1, static_cast<std::ptrdiff_t>(std::floor((t + half_width) * fs)));
    double acc = 0.0;
    double norm = 0.0;
    for (auto j = first; j <= last; ++j) {
      const double d = t - static_cast<double>(j) / fs;
      const double arg = 2.0 * fc * d;
      const double sinc = arg == 0.0 ? 1.0 : std::sin(kPi * arg) / (kPi * arg);
      const double r = d / half_width;
      const double win = bessel_i0(kBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
      const double h = sinc * win;
      acc += h * x[static_cast<std::size_t>(j)];
      norm += h;
    }
    // Normalizing by the kernel sum keeps unit DC gain near the edges.
    out[k] = norm != 0.0 ? acc / norm : 0.0;
  }
  return Waveform(std::move(out), target_rate_hz);
}

Waveform minmax_normalize(const Waveform& w) {
  require_nonempty(w, "minmax_normalize");
  const auto [lo_it, hi_it] = std::minmax_element(w.values().begin(), w.values().end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) throw DegenerateRangeError("cannot normalize a constant signal");
  const double range = hi - lo;
  std::vector<double> out(w.size());
  std::transform(w.values().begin(), w.values().end(), out.begin(),
                 [&](double v) { return 2.0 * (v - lo) / range - 1.0; });
  return Waveform(std::move(out), w.sample_rate_hz());
}

EcgPpgPair align_first_peaks(const EcgPpgPair& pair, int min_distance, double min_prominence) {
  const auto ecg_peaks = find_peaks(pair.ecg(), min_distance, min_prominence);
  const auto ppg_peaks = find_peaks(pair.ppg(), min_distance, min_prominence);
  if (ecg_peaks.empty()) throw AlignmentError("no peak found in ECG channel");
  if (ppg_peaks.empty()) throw AlignmentError("no peak found in PPG channel");
  const std::size_t e0 = ecg_peaks.front();
  const std::size_t p0 = ppg_peaks.front();
  const std::size_t len = std::min(pair.ecg().size() - e0, pair.ppg().size() - p0);
  return {pair.ecg().slice(e0, len), pair.ppg().slice(p0, len)};
}

std::vector<std::size_t> segment_starts(std::size_t length, std::size_t window,
                                        double overlap_fraction) {
  if (window == 0) throw InvalidArgument("segment window must be positive");
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0)) {
    throw InvalidArgument("overlap fraction must lie in [0, 1)");
  }
  const auto stride = static_cast<std::size_t>(
      std::max(1LL, std::llround(static_cast<double>(window) * (1.0 - overlap_fraction))));
  std::vector<std::size_t> starts;
  if (window > length) return starts;
  for (std::size_t s = 0; s + window <= length; s += stride) starts.push_back(s);
  return starts;
}

std::vector<Segment> segment(const Waveform& w, std::size_t window, double overlap_fraction) {
  std::vector<Segment> out;
  for (std::size_t s : segment_starts(w.size(), window, overlap_fraction)) {
    auto begin = w.values().begin() + static_cast<std::ptrdiff_t>(s);
    out.push_back({s, {begin, begin + static_cast<std::ptrdiff_t>(window)}});
  }
  return out;
}

Spectrogram stft_spectrogram(const Waveform& w, const StftOptions& opt) {
  require_nonempty(w, "stft_spectrogram");
  if (opt.window_len == 0 || opt.window_len > w.size()) {
    throw InvalidArgument("STFT window must be in [1, signal length]");
  }
  if (opt.hop == 0) throw InvalidArgument("STFT hop must be >= 1");
  if (!(opt.delta > 0.0)) throw InvalidArgument("STFT delta must be positive");

  Spectrogram spec;
  spec.window_len = opt.window_len;
  spec.hop = opt.hop;
  spec.frames = (w.size() - opt.window_len) / opt.hop + 1;
  spec.bins = opt.window_len / 2 + 1;
  spec.magnitudes.reserve(spec.frames * spec.bins);

  const auto window = hann_window(opt.window_len);
  std::vector<double> frame(opt.window_len);
  for (std::size_t m = 0; m < spec.frames; ++m) {
    const std::size_t start = m * opt.hop;
    for (std::size_t i = 0; i < opt.window_len; ++i) frame[i] = w[start + i] * window[i];
    for (const auto& c : rdft(frame)) spec.magnitudes.push_back(std::log(std::abs(c) + opt.delta));
  }
  return spec;
}

}  // namespace pulsesynth
