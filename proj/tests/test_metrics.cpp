#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "pulsesynth/error.hpp"
#include "pulsesynth/metrics.hpp"

using namespace pulsesynth;
using std::numbers::pi;

namespace {

UnitHistogram hist(std::int64_t origin, std::vector<std::uint64_t> counts) { return {origin, std::move(counts)}; }

RrSeries ms(std::vector<double> v) { return RrSeries::in_milliseconds(std::move(v)); }

UnitHistogram random_hist(std::mt19937_64& rng, int max_bins, int max_count) {
  std::uniform_int_distribution<int> nb(1, max_bins);
  std::uniform_int_distribution<int> c(0, max_count);
  std::uniform_int_distribution<int> o(0, 4);
  UnitHistogram h{o(rng), {}};
  const int n = nb(rng);
  for (int i = 0; i < n; ++i) h.counts.push_back(static_cast<std::uint64_t>(c(rng)));
  if (h.total() == 0) h.counts[0] = 1;
  return h;
}

FeatureSet gaussian_set(std::size_t n, double mu, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(mu, sigma);
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return {1, v};
}

// Sample (n-1) moments of a 1-D feature set.
std::pair<double, double> moments(const FeatureSet& f) {
  const auto& v = f.data();
  const double m = oracle::mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, s / static_cast<double>(v.size() - 1)};
}

}  // namespace

TEST_CASE("unit_histogram") {
  const UnitHistogram h = unit_histogram(RrSeries::in_samples({125, 125, 126}, 125));
  CHECK(h.origin == 125);
  CHECK(h.counts == std::vector<std::uint64_t>{2, 1});
  const UnitHistogram one = unit_histogram(RrSeries::in_samples({80}, 125));
  CHECK(one.counts == std::vector<std::uint64_t>{1});
  CHECK(unit_histogram(std::vector<double>{124.6}).origin == 124);
  const UnitHistogram gap = unit_histogram(std::vector<double>{10.2, 13.9});
  CHECK(gap.counts == std::vector<std::uint64_t>{1, 0, 0, 1});
  CHECK(gap.count_at(13) == 1);
  CHECK(gap.count_at(99) == 0);
}

TEST_CASE("rhi") {
  const auto a = hist(10, {4});
  const auto b = hist(10, {2, 2});
  CHECK(rhi(a, a) == 1.0);
  CHECK(rhi(a, b) == doctest::Approx(0.5));
  CHECK(rhi(hist(0, {3}), hist(5, {3})) == 0.0);
  CHECK_THROWS_AS(rhi(hist(0, {0}), a), DomainError);
}

TEST_CASE("rrmse") {
  CHECK(rrmse_rr(ms({100, 100}), ms({110, 90})) == doctest::Approx(0.1));
  CHECK(rrmse_rr(ms({100, 120}), ms({100, 120})) == 0.0);
  // truncated to 3 pairs: errors 0, 0, 30 against mean 100
  const double got = rrmse_rr(ms({100, 100, 100, 7, 9}), ms({100, 100, 130}));
  CHECK(got == doctest::Approx(std::sqrt(300.0) / 100.0));
}

TEST_CASE("emd and remd examples") {
  const auto a = hist(0, {4});
  CHECK(remd(a, a) == 0.0);
  CHECK(emd(hist(0, {4}), hist(1, {4})) == doctest::Approx(4.0));
  CHECK(remd(hist(0, {4}), hist(1, {4})) == doctest::Approx(1.0));
  CHECK(emd(hist(0, {2, 2}), hist(0, {4})) == doctest::Approx(2.0));
  CHECK(remd(hist(0, {2, 2}), hist(0, {4})) == doctest::Approx(0.5));
  CHECK(remd(hist(7, {3}), hist(7, {5})) == 0.0);
}

TEST_CASE("remd agrees with exhaustive transport") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> nb(1, 6);
  std::uniform_int_distribution<int> tot(1, 10);
  for (int trial = 0; trial < 200; ++trial) {
    const int bins = nb(rng);
    const int total = tot(rng);
    auto draw = [&] {
      std::vector<std::int64_t> c(static_cast<std::size_t>(bins), 0);
      std::uniform_int_distribution<int> pick(0, bins - 1);
      for (int k = 0; k < total; ++k) ++c[static_cast<std::size_t>(pick(rng))];
      return c;
    };
    const auto ca = draw();
    const auto cb = draw();
    UnitHistogram a{0, {}}, b{0, {}};
    for (auto v : ca) a.counts.push_back(static_cast<std::uint64_t>(v));
    for (auto v : cb) b.counts.push_back(static_cast<std::uint64_t>(v));
    const double cost = static_cast<double>(oracle::transport_cost(ca, cb));
    CHECK(std::abs(emd(a, b) - cost) <= 1e-9);
    // union support spans every populated bin of either histogram
    std::int64_t lo = bins, hi = -1;
    for (int i = 0; i < bins; ++i)
      if (ca[static_cast<std::size_t>(i)] + cb[static_cast<std::size_t>(i)] > 0) {
        lo = std::min<std::int64_t>(lo, i);
        hi = std::max<std::int64_t>(hi, i);
      }
    const double want = hi == lo ? 0.0 : cost / (total * static_cast<double>(hi - lo));
    CHECK(std::abs(remd(a, b) - want) <= 1e-9);
  }
}

TEST_CASE("unequal totals compare normalized mass") {
  // a = 2 at bin 0, b = 1 at bin 0 and 1 at bin 1: half of a's mass moves
  // one bin, measured in a's units
  CHECK(emd(hist(0, {2}), hist(0, {1, 1})) == doctest::Approx(1.0));
  // scaled margins must give the same transport as the normalized rule
  const UnitHistogram ha{0, {3, 0, 1}}, hb{0, {1, 1}};
  const double cost = static_cast<double>(oracle::transport_cost({3 * 2, 0, 1 * 2}, {1 * 4, 1 * 4, 0}));
  CHECK(emd(ha, hb) == doctest::Approx(cost / 2.0));
  CHECK(remd(ha, hb) <= 1.0);
}

TEST_CASE("kl") {
  const auto p = hist(0, {1, 1});
  const auto q = hist(0, {1, 3});
  CHECK(kl(p, p) == 0.0);
  CHECK(kl(p, q) == doctest::Approx(0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0)));
  CHECK(kl(p, q) == doctest::Approx(0.1438).epsilon(1e-3));
  CHECK(kl(p, q) != doctest::Approx(kl(q, p)));
  const double disjoint = kl(hist(0, {1}), hist(3, {1}));
  CHECK(std::isfinite(disjoint));
  CHECK(disjoint == doctest::Approx(-std::log(1e-10)));
}

TEST_CASE("ks") {
  CHECK(ks(std::vector<double>{1, 2}, std::vector<double>{3, 4}) == 1.0);
  CHECK(ks(std::vector<double>{1, 2, 3}, std::vector<double>{2, 3, 4}) == doctest::Approx(1.0 / 3.0));
  CHECK(ks(std::vector<double>{5, 1, 3}, std::vector<double>{3, 5, 1}) == 0.0);
  CHECK(ks(std::vector<double>{1, 1, 2}, std::vector<double>{1, 2, 2}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("waveform_rmse") {
  CHECK(waveform_rmse(Waveform({1, 2, 3}, 1.0), Waveform({1, 2, 3}, 1.0)) == 0.0);
  CHECK(waveform_rmse(Waveform({0, 0, 0}, 1.0), Waveform({0.1, 0.1, 0.1}, 1.0)) == doctest::Approx(0.1));
  CHECK(waveform_rmse(Waveform({1, -1}, 1.0), Waveform({-1, 1}, 1.0)) == doctest::Approx(2.0));
  CHECK_THROWS_AS(waveform_rmse(Waveform({1, 2}, 1.0), Waveform({1}, 1.0)), ShapeError);
}

TEST_CASE("hrv") {
  const Hrv flat = hrv(ms({665.45, 665.45}));
  CHECK(flat.mean == doctest::Approx(665.45));
  CHECK(flat.std == 0.0);
  const Hrv h = hrv(ms({600, 700}));
  CHECK(h.mean == 650.0);
  CHECK(h.std == 50.0);
  CHECK_THROWS_AS(hrv(ms({700})), DomainError);
}

TEST_CASE("mae_hr") {
  CHECK(mae_hr(ms({1000}), ms({1200})) == doctest::Approx(10.0));
  CHECK(mae_hr(ms({1000, 1000}), ms({1000, 1200})) == doctest::Approx(5.0));
  CHECK(mae_hr(ms({900, 800}), ms({900, 800})) == 0.0);
  // samples are converted through the rate: 125 samples at 125 Hz is 60 BPM
  CHECK(mae_hr(RrSeries::in_samples({125}, 125), ms({1200})) == doctest::Approx(10.0));
}

TEST_CASE("metric identities on random series") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> d(60, 200);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(5 + trial);
    for (double& x : v) x = d(rng);
    const RrSeries s = RrSeries::in_samples(v, 125);
    const UnitHistogram h = unit_histogram(s);
    CHECK(rhi(h, h) == 1.0);
    CHECK(rrmse_rr(s, s) == 0.0);
    CHECK(remd(h, h) == 0.0);
    CHECK(kl(h, h) == 0.0);
    CHECK(ks(s, s) == 0.0);
    CHECK(mae_hr(s, s) == 0.0);
    const MetricReport r = compare_rr(s, s);
    CHECK(*r.rhi == 1.0);
    CHECK(*r.rrmse == 0.0);
    CHECK(*r.hrv_mean == doctest::Approx(*r.truth_hrv_mean));
  }
}

TEST_CASE("metric ranges and symmetry on random histograms") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const UnitHistogram a = random_hist(rng, 8, 6);
    const UnitHistogram b = random_hist(rng, 8, 6);
    const double r = rhi(a, b), e = remd(a, b), k = kl(a, b);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
    CHECK(e >= 0.0);
    CHECK(e <= 1.0 + 1e-12);
    CHECK(k >= 0.0);
    CHECK(r == doctest::Approx(rhi(b, a)));
    if (a.total() == b.total()) CHECK(e == doctest::Approx(remd(b, a)));
  }
  std::uniform_real_distribution<double> u(0, 10);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(1 + trial % 13), y(1 + trial % 7);
    for (double& v : x) v = std::round(u(rng));
    for (double& v : y) v = std::round(u(rng));
    const double s = ks(x, y);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(s == ks(y, x));
  }
}

TEST_CASE("frechet distance closed forms") {
  // exact 1-D moments: FD = (mu_r - mu_g)^2 + (sigma_r - sigma_g)^2
  const FeatureSet r(1, {-1, 1});    // mean 0, sample variance 2
  const FeatureSet g(1, {3, 7});     // mean 5, sample variance 8
  const double sr = std::sqrt(2.0 + 1e-6), sg = std::sqrt(8.0 + 1e-6);
  CHECK(frechet_distance(r, g) == doctest::Approx(25.0 + (sr - sg) * (sr - sg)).epsilon(1e-9));

  // population closed form on noise-free Gaussian samples
  const FeatureSet qa(1, oracle::gaussian_quantiles(10000, 0.0, 1.0));
  CHECK(frechet_distance(qa, FeatureSet(1, oracle::gaussian_quantiles(10000, 1.0, 1.0))) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(frechet_distance(qa, FeatureSet(1, oracle::gaussian_quantiles(10000, 0.0, 2.0))) == doctest::Approx(1.0).epsilon(0.02));

  // random draws: exact against their own sample moments
  const FeatureSet a = gaussian_set(10000, 0.0, 1.0, 1);
  const FeatureSet b = gaussian_set(10000, 1.0, 1.0, 2);
  const FeatureSet c = gaussian_set(10000, 0.0, 2.0, 3);
  for (const auto* pair : {&b, &c}) {
    const auto [m1, v1] = moments(a);
    const auto [m2, v2] = moments(*pair);
    const double want = (m1 - m2) * (m1 - m2) + std::pow(std::sqrt(v1 + 1e-6) - std::sqrt(v2 + 1e-6), 2);
    CHECK(std::abs(frechet_distance(a, *pair) - want) <= 1e-6);
  }
  CHECK(frechet_distance(a, a) <= 1e-8);
  CHECK_THROWS_AS(frechet_distance(a, FeatureSet(2, {1, 2, 3, 4})), ShapeError);
  CHECK_THROWS_AS(frechet_distance(FeatureSet(1, {1}), a), DataError);
}

TEST_CASE("frechet distance in several dimensions") {
  // independent axes: the trace term separates per axis
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  FeatureSet r(3, {}), q(3, {});
  for (int i = 0; i < 4000; ++i) {
    const std::vector<double> x{g(rng), 2 * g(rng), 0.5 * g(rng)};
    const std::vector<double> y{1 + g(rng), 2 * g(rng), 3 * g(rng)};
    r.push_back(x);
    q.push_back(y);
  }
  const double fd = frechet_distance(r, q);
  CHECK(fd == doctest::Approx(1.0 + 0.0 + 2.5 * 2.5).epsilon(0.05));
  CHECK(frechet_distance(r, r) <= 1e-8);
  CHECK(frechet_distance(q, r) == doctest::Approx(fd).epsilon(1e-8));
}

TEST_CASE("segment descriptors") {
  const std::vector<double> flat(512, 0.7);
  const auto d = segment_descriptor(flat);
  REQUIRE(d.size() == kSegmentFeatureDim);
  CHECK(d[0] == doctest::Approx(0.7));
  CHECK(d[1] == 0.0);
  CHECK(d[5] == 0.0);

  std::vector<double> tone(512);
  for (std::size_t i = 0; i < tone.size(); ++i) tone[i] = std::sin(2 * pi * 9.0 * static_cast<double>(i) / 512.0);
  const auto mags = oracle::dft_magnitudes(tone);
  std::size_t arg = 1;
  for (std::size_t k = 1; k < mags.size(); ++k)
    if (mags[k] > mags[arg]) arg = k;
  REQUIRE(arg == 9);
  CHECK(segment_descriptor(tone)[6] == 9.0);
  CHECK(segment_descriptor(tone)[4] == doctest::Approx(std::sqrt(0.5)));

  std::vector<double> v(3000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.05 * static_cast<double>(i)) + 0.1 * std::cos(0.7 * static_cast<double>(i));
  const Waveform w(v, 125.0);
  const FeatureSet f1 = segment_features(w, 512, 0.5);
  const FeatureSet f2 = segment_features(Waveform(v, 125.0), 512, 0.5);
  CHECK(f1.rows() == 10);
  CHECK(f1.data() == f2.data());
  CHECK(frechet_distance(f1, f2) <= 1e-8);
  CHECK_THROWS_AS(segment_features(Waveform(std::vector<double>(700, 1.0), 125.0), 512, 0.5), DataError);
}

TEST_CASE("compare_rr refuses mixed units") {
  CHECK_THROWS_AS(compare_rr(ms({800, 810}), RrSeries::in_samples({100, 101}, 125)), ShapeError);
}
