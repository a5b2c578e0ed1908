#include "pulsesynth/ode.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "pulsesynth/error.hpp"
#include "pulsesynth/signal.hpp"

namespace pulsesynth {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Maps an angle onto (-pi, pi].
double wrap_angle(double a) {
  double r = std::remainder(a, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

// Independent generator streams derived from one user seed.
enum class Stream : std::uint32_t { template_noise = 1, rr_prescription = 2 };

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

std::string indexed(const char* field, std::size_t i) {
  return std::string(field) + "[" + std::to_string(i) + "]";
}

}  // namespace

bool State::finite() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) && std::isfinite(v) &&
         std::isfinite(w);
}

State initial_state() {
  return {1.0 / std::numbers::sqrt2, 1.0 / std::numbers::sqrt2, 0.2, 0.005, 0.0};
}

void RhythmTemplate::validate() const {
  if (a.size() < 5) throw ValidationError("a", "need at least 5 waves, got " + std::to_string(a.size()));
  if (b.size() != a.size()) throw ValidationError("b", "length differs from a");
  if (theta.size() != a.size()) throw ValidationError("theta", "length differs from a");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i])) throw ValidationError(indexed("a", i), "not finite");
    if (!(b[i] > 0.0) || !std::isfinite(b[i])) throw ValidationError(indexed("b", i), "width must be positive");
    if (!(theta[i] > -kPi && theta[i] <= kPi)) {
      throw ValidationError(indexed("theta", i), "angle outside (-pi, pi]");
    }
    if (i > 0 && !(theta[i] > theta[i - 1])) {
      throw ValidationError(indexed("theta", i), "angles must be strictly increasing");
    }
  }
}

State derivatives(const State& s, double t, const RhythmTemplate& tmpl,
                  const ModelConstants& c, double f) {
  const double omega = kTwoPi * f;
  const double alpha = 1.0 - std::sqrt(s.x * s.x + s.y * s.y);
  const double theta = std::atan2(s.y, s.x);

  double wave_sum = 0.0;
  for (std::size_t i = 0; i < tmpl.a.size(); ++i) {
    const double d = wrap_angle(theta - tmpl.theta[i]);
    wave_sum += tmpl.a[i] * d * std::exp(-d * d / (2.0 * tmpl.b[i] * tmpl.b[i]));
  }
  const double z0 = c.A * std::sin(kTwoPi * c.f0 * t);

  return {alpha * s.x - omega * s.y,
          alpha * s.y + omega * s.x,
          -wave_sum - (s.z - z0),
          -c.B0 * s.v + c.B1 * s.w,
          s.z * s.z - c.B2 * s.w};
}

double cycle_frequency(double f_bar, double rr_mean, double rr_c) {
  if (!(rr_c > 0.0) || !(rr_mean > 0.0)) {
    throw DomainError("cycle_frequency needs positive RR intervals");
  }
  return f_bar * rr_mean / rr_c;
}

RhythmTemplate preset(Rhythm rhythm) {
  switch (rhythm) {
    case Rhythm::rsr:
      return {"RSR",
              {1.2, -5.0, 30.0, -7.5, 0.75},
              {0.25, 0.1, 0.1, 0.1, 0.4},
              {-kPi / 3.0, -kPi / 12.0, 0.0, kPi / 12.0, kPi / 2.0}};
    case Rhythm::sa:
      return {"SA",
              {1.0, 2.0, 3.0, 3.0, 2.5, -1.0, 0.5},
              {0.2, 0.15, 0.15, 0.2, 0.15, 0.2, 0.4},
              {-kPi / 1.5, -kPi / 2.0, -kPi / 6.5, -kPi / 12.0, 0.0, kPi / 12.0, kPi / 1.5}};
    case Rhythm::afib:
      return {"AFIB",
              {-1.0, 0.5, 1.0, -2.0, 25.0, -10.0, 2.0, -2.0, 0.5, 0.5, 0.5},
              {0.1, 0.15, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.2, 0.2, 0.2},
              {-kPi / 2.0, -kPi / 3.0, -kPi / 5.0, -kPi / 12.0, 0.0, kPi / 12.0, kPi / 6.0,
               kPi / 5.0, kPi / 2.5, kPi / 2.0, kPi / 1.5}};
  }
  throw LookupError("unknown rhythm");
}

Rhythm parse_rhythm(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "rsr") return Rhythm::rsr;
  if (lower == "sa") return Rhythm::sa;
  if (lower == "afib") return Rhythm::afib;
  throw LookupError("unknown rhythm '" + std::string(name) + "' (expected rsr, sa or afib)");
}

RhythmTemplate preset(std::string_view name) { return preset(parse_rhythm(name)); }

std::string_view to_string(Rhythm rhythm) {
  switch (rhythm) {
    case Rhythm::rsr: return "rsr";
    case Rhythm::sa: return "sa";
    case Rhythm::afib: return "afib";
  }
  return "?";
}

RhythmTemplate perturb_template(const RhythmTemplate& tmpl, double rel_std, std::uint64_t seed) {
  if (!(rel_std >= 0.0)) throw InvalidArgument("noise level must be non-negative");
  if (rel_std == 0.0) return tmpl;

  auto rng = make_rng(seed, Stream::template_noise);
  std::normal_distribution<double> unit(0.0, 1.0);
  auto jitter = [&](std::vector<double>& values) {
    for (double& p : values) p += unit(rng) * rel_std * std::abs(p);
  };

  RhythmTemplate out = tmpl;
  jitter(out.a);
  jitter(out.b);
  jitter(out.theta);
  for (double& w : out.b) w = std::max(w, kMinPerturbedWidth);
  for (double& th : out.theta) th = wrap_angle(th);

  if (!std::is_sorted(out.theta.begin(), out.theta.end())) {
    std::vector<std::size_t> order(out.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return out.theta[l] < out.theta[r]; });
    RhythmTemplate sorted{out.name, {}, {}, {}};
    for (std::size_t i : order) {
      sorted.a.push_back(out.a[i]);
      sorted.b.push_back(out.b[i]);
      sorted.theta.push_back(out.theta[i]);
    }
    out = std::move(sorted);
  }
  return out;
}

FrequencySchedule::FrequencySchedule(double start_angle, const std::vector<double>& rr_samples,
                                     double sample_rate_hz, const ModelConstants& constants,
                                     double end_time) {
  if (rr_samples.empty()) throw InvalidArgument("no RR targets");
  // The reference interval is one second (fs samples), where f = f_bar.
  auto freq_for = [&](std::size_t beat) {
    return cycle_frequency(constants.f_bar, sample_rate_hz, rr_samples[beat % rr_samples.size()]);
  };

  // Lead-in from the starting angle up to the first R-wave crossing runs at
  // roughly the first target's rate, stretched so the crossing lands on a
  // sample instant; beat j then spans one full turn at target j, and
  // whole-sample targets keep every later crossing on the grid too.
  const double dt = 1.0 / (constants.f_bar * sample_rate_hz);
  const double lead_turns = (kTwoPi * (std::floor(start_angle / kTwoPi) + 1.0) - start_angle) / kTwoPi;
  const double lead_samples =
      std::max(1.0, std::round(lead_turns / freq_for(0) / dt));
  double t = lead_samples * dt;
  double f = lead_turns / t;
  breaks_.push_back(0.0);
  freqs_.push_back(f);
  for (std::size_t beat = 0; t <= end_time; ++beat) {
    breaks_.push_back(t);
    f = freq_for(beat);
    freqs_.push_back(f);
    t += 1.0 / f;
  }
  breaks_.push_back(t);
}

double FrequencySchedule::frequency_at(double t) const {
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  const auto seg = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - breaks_.begin() - 1));
  return freqs_[std::min(seg, freqs_.size() - 1)];
}

void SynthesisConfig::validate() const {
  rhythm.validate();
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw ValidationError("sample_rate_hz", "must be positive");
  }
  if (oversample < 1) throw ValidationError("oversample", "must be >= 1");
  if (!(noise_rel_std >= 0.0)) throw ValidationError("noise_rel_std", "must be >= 0");
  if (rr_targets.empty()) throw ValidationError("rr_targets", "must not be empty");
  for (std::size_t i = 0; i < rr_targets.size(); ++i) {
    if (!(rr_targets[i] >= 2.0) || !std::isfinite(rr_targets[i])) {
      throw ValidationError(indexed("rr_targets", i), "interval must be >= 2 samples");
    }
  }
  if (!(constants.B0 > 0.0) || !(constants.B2 > 0.0) || !(constants.f_bar > 0.0)) {
    throw ValidationError("constants", "B0, B2 and f_bar must be positive");
  }
}

std::size_t SynthesisConfig::output_length() const {
  if (num_samples) return *num_samples;
  const double total = std::accumulate(rr_targets.begin(), rr_targets.end(), 0.0);
  return static_cast<std::size_t>(std::floor(total));
}

Trajectory integrate(const SynthesisConfig& cfg) {
  cfg.validate();
  Trajectory traj;
  traj.rhythm = perturb_template(cfg.rhythm, cfg.noise_rel_std, cfg.seed);
  traj.rhythm.validate();
  traj.dt = cfg.sample_period();

  const std::size_t n = cfg.output_length();
  if (n == 0) return traj;
  const auto os = static_cast<std::size_t>(cfg.oversample);
  const double h = traj.dt / static_cast<double>(os);
  const double end_time = static_cast<double>(n - 1) * traj.dt;

  const FrequencySchedule schedule(std::atan2(cfg.initial.y, cfg.initial.x), cfg.rr_targets,
                                   cfg.sample_rate_hz, cfg.constants, end_time);
  const auto& breaks = schedule.breakpoints();
  std::size_t seg = 0;

  const auto& tmpl = traj.rhythm;
  const auto& c = cfg.constants;
  auto rk4 = [&](const State& u, double t, double step, double f) {
    const State k1 = derivatives(u, t, tmpl, c, f);
    const State k2 = derivatives(u + (step / 2.0) * k1, t + step / 2.0, tmpl, c, f);
    const State k3 = derivatives(u + (step / 2.0) * k2, t + step / 2.0, tmpl, c, f);
    const State k4 = derivatives(u + step * k3, t + step, tmpl, c, f);
    return u + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  traj.states.reserve(n);
  State u = cfg.initial;
  traj.states.push_back(u);
  double t = 0.0;
  const std::size_t total_steps = (n - 1) * os;
  for (std::size_t step = 1; step <= total_steps; ++step) {
    const double t_end = static_cast<double>(step) * h;
    // Land exactly on any switch inside this step.
    while (breaks[seg + 1] <= t_end) {
      const double tb = breaks[seg + 1];
      if (tb > t) {
        u = rk4(u, t, tb - t, schedule.frequency(seg));
        t = tb;
      }
      ++seg;
    }
    if (t_end > t) u = rk4(u, t, t_end - t, schedule.frequency(seg));
    t = t_end;
    if (!u.finite()) throw DivergenceError(t, "integration produced a non-finite state");
    if (step % os == 0) traj.states.push_back(u);
  }
  return traj;
}

std::vector<double> r_wave_positions(const SynthesisConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.output_length();
  std::vector<double> out;
  if (n == 0) return out;
  const double dt = cfg.sample_period();
  const double end_time = static_cast<double>(n - 1) * dt;
  const FrequencySchedule schedule(std::atan2(cfg.initial.y, cfg.initial.x), cfg.rr_targets,
                                   cfg.sample_rate_hz, cfg.constants, end_time);
  const auto& breaks = schedule.breakpoints();
  for (std::size_t i = 1; i < breaks.size() && breaks[i] <= end_time; ++i) {
    out.push_back(breaks[i] / dt);
  }
  return out;
}

EcgPpgPair synthesize(const SynthesisConfig& cfg) {
  const Trajectory traj = integrate(cfg);
  std::vector<double> z(traj.states.size());
  std::vector<double> v(traj.states.size());
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    z[k] = traj.states[k].z;
    v[k] = traj.states[k].v;
  }
  return {minmax_normalize(Waveform(std::move(z), cfg.sample_rate_hz)),
          minmax_normalize(Waveform(std::move(v), cfg.sample_rate_hz))};
}

RrSeries gaussian_rr(double mean_ms, double std_ms, std::size_t num_samples, double sample_rate_hz,
                     std::uint64_t seed) {
  if (!(mean_ms > 0.0)) throw InvalidArgument("RR mean must be positive");
  if (!(std_ms >= 0.0)) throw InvalidArgument("RR std must be non-negative");
  if (!(sample_rate_hz > 0.0)) throw InvalidArgument("sample rate must be positive");
  auto rng = make_rng(seed, Stream::rr_prescription);
  std::normal_distribution<double> dist(mean_ms, std_ms > 0.0 ? std_ms : 1.0);
  const double samples_per_ms = sample_rate_hz / 1000.0;

  std::vector<double> rr;
  double covered = 0.0;
  while (covered < static_cast<double>(num_samples)) {
    const double ms = std_ms > 0.0 ? dist(rng) : mean_ms;
    const double samples = std::max(2.0, std::round(ms * samples_per_ms));
    rr.push_back(samples);
    covered += samples;
  }
  return RrSeries::in_samples(std::move(rr), sample_rate_hz);
}

}  // namespace pulsesynth
