#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pulsesynth/peaks.hpp"
#include "pulsesynth/waveform.hpp"

namespace pulsesynth {

// Gaussian wave parameters for one rhythm: amplitude a_i, angular width
// b_i (rad) and reference angle theta_i (rad, strictly increasing in
// (-pi, pi]).
struct RhythmTemplate {
  std::string name;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> theta;

  std::size_t size() const noexcept { return a.size(); }

  // Throws ValidationError naming the offending field.
  void validate() const;
};

struct ModelConstants {
  double A = 0.01;    // baseline wander amplitude
  double f0 = 0.25;   // baseline wander frequency (cycles per model time unit)
  double B0 = 0.5;
  double B1 = 0.5;
  double B2 = 1.25;
  double f_bar = 0.1;  // cycle frequency when the RR interval equals fs samples
};

// u = [x, y, z, v, w]. z is the ECG, v the PPG, w the ECG-to-PPG coupling.
struct State {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double v = 0.0;
  double w = 0.0;

  State& operator+=(const State& o) {
    x += o.x; y += o.y; z += o.z; v += o.v; w += o.w;
    return *this;
  }
  friend State operator+(State l, const State& r) { return l += r; }
  friend State operator*(double s, const State& u) {
    return {s * u.x, s * u.y, s * u.z, s * u.v, s * u.w};
  }
  bool finite() const;
};

// u0 = [1/sqrt(2), 1/sqrt(2), 0.2, 0.005, 0].
State initial_state();

// Right-hand side of the coupled limit-cycle ECG / PPG model at cycle
// frequency f (omega = 2 pi f). The angular offset to each wave is wrapped
// into (-pi, pi].
State derivatives(const State& s, double t, const RhythmTemplate& tmpl,
                  const ModelConstants& constants, double f);

// f_bar * rr_mean / rr_c. Throws DomainError for non-positive intervals.
double cycle_frequency(double f_bar, double rr_mean, double rr_c);

enum class Rhythm { rsr, sa, afib };

RhythmTemplate preset(Rhythm rhythm);
// Case-insensitive "rsr" / "sa" / "afib". Throws LookupError otherwise.
RhythmTemplate preset(std::string_view name);
Rhythm parse_rhythm(std::string_view name);
std::string_view to_string(Rhythm rhythm);

// Adds N(0, (rel_std * |p|)^2) to every entry of a, b and theta. Widths are
// floored at 1e-3 rad; angles are wrapped to (-pi, pi] and the waves
// re-sorted by angle when the noise reorders them.
RhythmTemplate perturb_template(const RhythmTemplate& tmpl, double rel_std, std::uint64_t seed);

inline constexpr double kMinPerturbedWidth = 1e-3;

// Piecewise-constant cycle frequency. Switches happen when the phase
// theta = atan2(y, x) passes the R-wave angle (0 mod 2 pi); since
// d(theta)/dt = omega exactly, the switch instants follow in closed form
// from the starting angle and the RR targets.
class FrequencySchedule {
 public:
  FrequencySchedule(double start_angle, const std::vector<double>& rr_samples, double sample_rate_hz,
                    const ModelConstants& constants, double end_time);

  // Frequency on [breakpoint(i), breakpoint(i + 1)).
  double frequency(std::size_t segment) const { return freqs_[segment]; }
  // breakpoints()[0] == 0; the last one is past end_time.
  const std::vector<double>& breakpoints() const noexcept { return breaks_; }
  std::size_t segments() const noexcept { return freqs_.size(); }
  double frequency_at(double t) const;

 private:
  std::vector<double> breaks_;
  std::vector<double> freqs_;
};

struct SynthesisConfig {
  RhythmTemplate rhythm = preset(Rhythm::rsr);
  ModelConstants constants{};
  // Intervals in samples at sample_rate_hz; reused cyclically when the
  // requested length outlasts them.
  std::vector<double> rr_targets;
  double sample_rate_hz = 125.0;
  int oversample = 8;
  double noise_rel_std = 0.0;
  std::uint64_t seed = 0;
  // Output length; defaults to floor(sum(rr_targets)).
  std::optional<std::size_t> num_samples;
  State initial = initial_state();

  void validate() const;
  std::size_t output_length() const;
  // Model time elapsed per output sample, 1 / (f_bar * fs).
  double sample_period() const { return 1.0 / (constants.f_bar * sample_rate_hz); }
};

struct Trajectory {
  std::vector<State> states;  // one per output sample, states[k] at t = k * dt
  double dt = 0.0;            // model time per output sample
  RhythmTemplate rhythm;      // template actually integrated (after noise)
};

// Fixed-step RK4 at h = dt / oversample, steps split at frequency switches.
// Throws DivergenceError on a non-finite state.
Trajectory integrate(const SynthesisConfig& cfg);

// Output-sample positions (fractional) at which the phase crosses the
// R-wave angle, restricted to [0, output_length - 1].
std::vector<double> r_wave_positions(const SynthesisConfig& cfg);

// ECG = normalized z, PPG = normalized v, both on [-1, 1].
EcgPpgPair synthesize(const SynthesisConfig& cfg);

// Gaussian RR prescription rounded to whole samples (minimum 2), drawn until
// the intervals cover `num_samples` output samples.
RrSeries gaussian_rr(double mean_ms, double std_ms, std::size_t num_samples, double sample_rate_hz,
                     std::uint64_t seed);

}  // namespace pulsesynth
