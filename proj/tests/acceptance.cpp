// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pulsesynth/metrics.hpp"
#include "pulsesynth/ode.hpp"
#include "pulsesynth/peaks.hpp"
#include "pulsesynth/signal.hpp"

using namespace pulsesynth;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

constexpr double kFs = 125.0;

std::vector<double> detect(const SynthesisConfig& cfg) {
  const EcgPpgPair pair = synthesize(cfg);
  return rr_from_peaks(find_peaks(pair.ecg(), 50, 0.3), cfg.sample_rate_hz).intervals();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0, double e = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d, e);
  return buf;
}

Outcome rr_round_trip() {
  const std::size_t n = static_cast<std::size_t>(480 * kFs);
  const RrSeries prescribed = gaussian_rr(665.45, 3.09, n, kFs, 7);
  SynthesisConfig cfg;
  cfg.rr_targets = prescribed.intervals();
  cfg.num_samples = n;
  const std::vector<double> got = detect(cfg);
  const std::size_t m = std::min(got.size(), prescribed.size());
  const RrSeries truth = RrSeries::in_samples({prescribed.intervals().begin(), prescribed.intervals().begin() + m}, kFs);
  const RrSeries recon = RrSeries::in_samples(got, kFs);
  const UnitHistogram ht = unit_histogram(truth);
  const UnitHistogram hr = unit_histogram(recon);
  const double h = rhi(ht, hr), r = rrmse_rr(truth, recon), k = ks(truth, recon), d = kl(ht, hr), e = remd(ht, hr);
  const bool ok = h >= 0.95 && r <= 0.05 && k <= 0.02 && d <= 0.30 && e <= 1e-3;
  return {ok, fmt("rHI=%.4f rRMSE=%.4g KS=%.4g KL=%.4g rEMD=%.4g", h, r, k, d, e) + " beats=" + std::to_string(got.size())};
}

Outcome hrv_preservation() {
  const std::size_t n = static_cast<std::size_t>(480 * kFs);
  std::string detail;
  bool ok = true;
  struct Case {
    Rhythm rhythm;
    double mean_ms, std_ms;
    std::uint64_t seed;
  };
  for (const Case c : {Case{Rhythm::rsr, 665.45, 3.09, 7}, Case{Rhythm::afib, 750.0, 60.0, 11}}) {
    const RrSeries prescribed = gaussian_rr(c.mean_ms, c.std_ms, n, kFs, c.seed);
    SynthesisConfig cfg;
    cfg.rhythm = preset(c.rhythm);
    cfg.rr_targets = prescribed.intervals();
    cfg.num_samples = n;
    const std::vector<double> got = detect(cfg);
    const std::size_t m = std::min(got.size(), prescribed.size());
    const RrSeries truth = RrSeries::in_samples({prescribed.intervals().begin(), prescribed.intervals().begin() + m}, kFs);
    const RrSeries recon = RrSeries::in_samples(got, kFs);
    const double mean_t = oracle::mean(truth.to_milliseconds().intervals());
    const double mean_r = oracle::mean(recon.to_milliseconds().intervals());
    const double mae = mae_hr(truth, recon);
    ok = ok && std::abs(mean_r - mean_t) <= 1000.0 / kFs && mae <= 1e-9;
    detail += std::string(to_string(c.rhythm)) +
              fmt(": mean %.2f vs %.2f ms, std %.2f vs %.2f ms, MAE_HR=%.3g; ", mean_r, mean_t,
                  oracle::pop_std(recon.to_milliseconds().intervals()),
                  oracle::pop_std(truth.to_milliseconds().intervals()), mae);
  }
  return {ok, detail};
}

Outcome integrator_order() {
  SynthesisConfig cfg;
  cfg.rr_targets = gaussian_rr(800, 50, static_cast<std::size_t>(10 * kFs), kFs, 3).intervals();
  cfg.num_samples = static_cast<std::size_t>(10 * kFs);
  auto z = [&](int os) {
    cfg.oversample = os;
    std::vector<double> out;
    for (const State& s : integrate(cfg).states) out.push_back(s.z);
    return out;
  };
  const auto ref = z(64);
  std::vector<double> err;
  for (int os : {2, 4, 8}) {
    const auto v = z(os);
    double e = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) e = std::max(e, std::abs(v[i] - ref[i]));
    err.push_back(e);
  }
  const double p1 = std::log2(err[0] / err[1]), p2 = std::log2(err[1] / err[2]);
  return {std::min(p1, p2) >= 3.5, fmt("errors %.3g %.3g %.3g, orders %.3f %.3f", err[0], err[1], err[2], p1, p2)};
}

Outcome limit_cycle() {
  bool ok = true;
  std::string detail;
  for (double r0 : {0.5, 1.5}) {
    SynthesisConfig cfg;
    cfg.rr_targets = {125};
    cfg.num_samples = 5 * 125 + 1;
    cfg.initial.x *= r0;
    cfg.initial.y *= r0;
    const State s = integrate(cfg).states.back();
    const double r = std::hypot(s.x, s.y);
    ok = ok && r >= 0.999 && r <= 1.001;
    detail += fmt("r0=%.1f -> %.6f; ", r0, r);
  }
  return {ok, detail};
}

Outcome metric_identities() {
  std::mt19937_64 rng(12345);
  std::uniform_int_distribution<int> bins(1, 12), cnt(0, 9), org(50, 60), rr(40, 160);
  bool ok = true;
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto draw = [&] {
      UnitHistogram h{org(rng), {}};
      const int nb = bins(rng);
      for (int i = 0; i < nb; ++i) h.counts.push_back(static_cast<std::uint64_t>(cnt(rng)));
      if (h.total() == 0) h.counts.back() = 1;
      return h;
    };
    const UnitHistogram a = draw(), b = draw();
    const double r = rhi(a, b), e = remd(a, b), k = kl(a, b);
    ok = ok && r >= 0.0 && r <= 1.0 && e >= 0.0 && e <= 1.0 && k >= 0.0;
    ok = ok && rhi(a, a) == 1.0 && remd(a, a) == 0.0 && kl(a, a) == 0.0;

    std::vector<double> x(2 + trial % 50), y(1 + trial % 31);
    for (double& v : x) v = rr(rng);
    for (double& v : y) v = rr(rng);
    const RrSeries sx = RrSeries::in_samples(x, kFs), sy = RrSeries::in_samples(y, kFs);
    const double s = ks(sx, sy);
    ok = ok && s >= 0.0 && s <= 1.0 && ks(sx, sx) == 0.0 && rrmse_rr(sx, sx) == 0.0 && mae_hr(sx, sx) == 0.0;
    ok = ok && waveform_rmse(Waveform(x, kFs), Waveform(x, kFs)) == 0.0;
    ++checked;
  }
  std::normal_distribution<double> g;
  std::vector<double> rows(4 * 200);
  for (double& v : rows) v = g(rng);
  const FeatureSet f(4, rows);
  const double fd_self = frechet_distance(f, f);
  ok = ok && fd_self <= 1e-8;
  return {ok, std::to_string(checked) + " random pairs; fd(X,X)=" + fmt("%.3g", fd_self)};
}

Outcome emd_oracle() {
  std::mt19937_64 rng(777);
  std::uniform_int_distribution<int> nb(1, 6), tot(1, 10);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int bins = nb(rng), total = tot(rng);
    auto draw = [&] {
      std::vector<std::int64_t> c(static_cast<std::size_t>(bins), 0);
      std::uniform_int_distribution<int> pick(0, bins - 1);
      for (int k = 0; k < total; ++k) ++c[static_cast<std::size_t>(pick(rng))];
      return c;
    };
    const auto ca = draw(), cb = draw();
    UnitHistogram a{0, {}}, b{0, {}};
    for (auto v : ca) a.counts.push_back(static_cast<std::uint64_t>(v));
    for (auto v : cb) b.counts.push_back(static_cast<std::uint64_t>(v));
    std::int64_t lo = bins, hi = -1;
    for (int i = 0; i < bins; ++i)
      if (ca[static_cast<std::size_t>(i)] + cb[static_cast<std::size_t>(i)] > 0) {
        lo = std::min<std::int64_t>(lo, i);
        hi = std::max<std::int64_t>(hi, i);
      }
    const double cost = static_cast<double>(oracle::transport_cost(ca, cb));
    const double want = hi == lo ? 0.0 : cost / (total * static_cast<double>(hi - lo));
    worst = std::max(worst, std::abs(remd(a, b) - want));
  }
  return {worst <= 1e-9, fmt("500 cases, max |remd - brute force| = %.3g", worst)};
}

Outcome fd_closed_form() {
  auto sample = [](double mu, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(mu, sigma);
    std::vector<double> v(10000);
    for (double& x : v) x = g(rng);
    return v;
  };
  auto sample_var = [](const std::vector<double>& v) {
    const double m = oracle::mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
  };
  bool ok = true;
  std::string detail;
  struct Case {
    double mr, sr, mg, sg;
  };
  std::uint64_t seed = 1;
  for (const Case c : {Case{0, 1, 1, 1}, Case{0, 1, 0, 2}, Case{0.5, 1, -1, 3}}) {
    // population parameters, noise-free Gaussian sets
    const double population = (c.mr - c.mg) * (c.mr - c.mg) + (c.sr - c.sg) * (c.sr - c.sg);
    const double fd_q = frechet_distance(FeatureSet(1, oracle::gaussian_quantiles(10000, c.mr, c.sr)),
                                         FeatureSet(1, oracle::gaussian_quantiles(10000, c.mg, c.sg)));
    const double rel = std::abs(fd_q - population) / population;
    // random draws against their exact sample moments
    const auto r = sample(c.mr, c.sr, seed++), g = sample(c.mg, c.sg, seed++);
    const double fd = frechet_distance(FeatureSet(1, r), FeatureSet(1, g));
    const double mr = oracle::mean(r), mg = oracle::mean(g);
    const double sr = std::sqrt(sample_var(r) + 1e-6), sg = std::sqrt(sample_var(g) + 1e-6);
    const double exact = (mr - mg) * (mr - mg) + (sr - sg) * (sr - sg);
    ok = ok && rel <= 0.02 && std::abs(fd - exact) <= 1e-6;
    detail += fmt("FD=%.4f vs %.4f (%.3f%%), sampled |FD-exact|=%.2g; ", fd_q, population, 100 * rel,
                  std::abs(fd - exact));
  }
  return {ok, detail};
}

Outcome preprocessing_contract() {
  const std::size_t n = 60000;
  // residual mean of a DC offset riding on an in-band tone
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + std::sin(2 * 3.141592653589793 * 7.0 * static_cast<double>(i) / kFs);
  const Waveform f_dc = bandpass(Waveform(x, kFs), kEcgBand);
  double dc_mean = 0.0;
  for (std::size_t i = n / 4; i < 3 * n / 4; ++i) dc_mean += f_dc[i];
  dc_mean /= static_cast<double>(n / 2);
  const double dc_db = -20 * std::log10(std::max(std::abs(dc_mean), 1e-300));

  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = std::sin(2 * 3.141592653589793 * 10.0 * static_cast<double>(i) / kFs);
  const Waveform f_s = bandpass(Waveform(s, kFs), kEcgBand);
  double amp = 0.0;
  for (std::size_t i = n / 4; i < 3 * n / 4; ++i) amp = std::max(amp, std::abs(f_s[i]));
  const double ripple_db = std::abs(20 * std::log10(amp));

  const std::size_t segs = segment(Waveform(std::vector<double>(n, 0.0), kFs), 512, 0.5).size();
  const bool ok = dc_db >= 40.0 && ripple_db <= 0.5 && segs == 233;
  return {ok, fmt("DC rejection %.1f dB, 10 Hz ripple %.4f dB, segments ", dc_db, ripple_db) + std::to_string(segs)};
}

int shell(const std::string& cmd) {
  const int st = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / ("pulsesynth_accept_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = PULSESYNTH_CLI;
  const fs::path seed_out = dir / "seed.csv", a = dir / "a.csv", b = dir / "b.csv";
  bool ok = shell(cli + " synth --rhythm afib --duration-s 60 --rr-mean-ms 750 --rr-std-ms 60 --noise-rel-std 0.1 --seed 42 --out " +
                  seed_out.string()) == 0;
  const fs::path m = dir / "seed.manifest.json";
  ok = ok && shell(cli + " synth --config " + m.string() + " --out " + a.string()) == 0;
  ok = ok && shell(cli + " synth --config " + m.string() + " --out " + b.string()) == 0;
  const std::string sa = slurp(a), sb = slurp(b), s0 = slurp(seed_out);
  ok = ok && !sa.empty() && sa == sb && sa == s0;
  fs::remove_all(dir);
  return {ok, "two runs from one manifest: " + std::string(sa == sb ? "bit-identical" : "DIFFER") + ", " +
                  std::to_string(sa.size()) + " bytes"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"RR round-trip fidelity", rr_round_trip},
      {"HRV preservation", hrv_preservation},
      {"integrator order", integrator_order},
      {"limit cycle", limit_cycle},
      {"metric identities and ranges", metric_identities},
      {"EMD exhaustive-transport oracle", emd_oracle},
      {"FD closed form", fd_closed_form},
      {"preprocessing contract", preprocessing_contract},
      {"CLI determinism", cli_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("[%s] criterion %zu: %s (%.2f s) -- %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, secs,
                o.detail.c_str());
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
