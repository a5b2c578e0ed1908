#include "pulsesynth/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "pulsesynth/error.hpp"
#include "pulsesynth/signal.hpp"
#include "pulsesynth/spectral.hpp"

namespace pulsesynth {

namespace {

void require_mass(const UnitHistogram& h, const char* what) {
  if (h.total() == 0) throw DomainError(std::string(what) + ": histogram is empty");
}

struct UnionSupport {
  std::int64_t first;
  std::int64_t last;
  std::size_t bins() const { return static_cast<std::size_t>(last - first + 1); }
};

// Populated span of one histogram; zero-count edge bins are not support.
UnionSupport populated(const UnitHistogram& h) {
  std::size_t lo = 0;
  std::size_t hi = h.counts.size();
  while (lo < hi && h.counts[lo] == 0) ++lo;
  while (hi > lo && h.counts[hi - 1] == 0) --hi;
  return {h.origin + static_cast<std::int64_t>(lo), h.origin + static_cast<std::int64_t>(hi) - 1};
}

// Callers check both histograms carry mass first.
UnionSupport union_support(const UnitHistogram& a, const UnitHistogram& b) {
  const UnionSupport sa = populated(a);
  const UnionSupport sb = populated(b);
  return {std::min(sa.first, sb.first), std::max(sa.last, sb.last)};
}

}  // namespace

std::uint64_t UnitHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::uint64_t UnitHistogram::count_at(std::int64_t value) const {
  if (value < origin || value > last_bin()) return 0;
  return counts[static_cast<std::size_t>(value - origin)];
}

UnitHistogram unit_histogram(std::span<const double> values) {
  if (values.empty()) throw DataError("unit_histogram needs at least one value");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  UnitHistogram h;
  h.origin = static_cast<std::int64_t>(std::floor(*lo));
  h.counts.assign(static_cast<std::size_t>(static_cast<std::int64_t>(std::floor(*hi)) - h.origin + 1), 0);
  for (double v : values) ++h.counts[static_cast<std::size_t>(static_cast<std::int64_t>(std::floor(v)) - h.origin)];
  return h;
}

UnitHistogram unit_histogram(const RrSeries& rr) { return unit_histogram(rr.intervals()); }

double rhi(const UnitHistogram& a, const UnitHistogram& b) {
  require_mass(a, "rhi");
  require_mass(b, "rhi");
  const auto s = union_support(a, b);
  std::uint64_t inter = 0;
  for (std::int64_t v = s.first; v <= s.last; ++v) inter += std::min(a.count_at(v), b.count_at(v));
  return static_cast<double>(inter) / static_cast<double>(std::min(a.total(), b.total()));
}

double rrmse(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("rrmse needs non-empty series");
  const std::size_t n = std::min(a.size(), b.size());
  double sq = 0.0;
  double sum_a = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
    sum_a += a[i];
  }
  const double mean_a = sum_a / static_cast<double>(n);
  if (mean_a == 0.0) throw DomainError("rrmse reference mean is zero");
  return std::sqrt(sq / static_cast<double>(n)) / mean_a;
}

double rrmse_rr(const RrSeries& a, const RrSeries& b) { return rrmse(a.intervals(), b.intervals()); }

double emd(const UnitHistogram& a, const UnitHistogram& b) {
  require_mass(a, "emd");
  require_mass(b, "emd");
  const auto s = union_support(a, b);
  const auto ta = static_cast<double>(a.total());
  const auto tb = static_cast<double>(b.total());
  // Integral of |F_a - F_b| over the unit gaps between bins, in units of a's
  // mass. With equal totals this is sum |cumsum(a - b)|.
  double ca = 0.0;
  double cb = 0.0;
  double area = 0.0;
  for (std::int64_t v = s.first; v < s.last; ++v) {
    ca += static_cast<double>(a.count_at(v));
    cb += static_cast<double>(b.count_at(v));
    area += std::abs(ca / ta - cb / tb);
  }
  return area * ta;
}

double remd(const UnitHistogram& a, const UnitHistogram& b) {
  const double distance = emd(a, b);
  const auto s = union_support(a, b);
  // A single common bin leaves nothing to transport.
  if (s.bins() == 1) return 0.0;
  const double max_distance = static_cast<double>(s.bins() - 1);
  return distance / (static_cast<double>(a.total()) * max_distance);
}

double kl(const UnitHistogram& p, const UnitHistogram& q) {
  require_mass(p, "kl");
  require_mass(q, "kl");
  const auto s = union_support(p, q);
  const auto tp = static_cast<double>(p.total());
  const auto tq = static_cast<double>(q.total());
  double sum = 0.0;
  for (std::int64_t v = s.first; v <= s.last; ++v) {
    const double pi = static_cast<double>(p.count_at(v)) / tp;
    if (pi == 0.0) continue;
    double qi = static_cast<double>(q.count_at(v)) / tq;
    if (qi == 0.0) qi = kKlEpsilon;
    sum += pi * std::log(pi / qi);
  }
  return std::max(0.0, sum);
}

double ks(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks needs non-empty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const auto na = static_cast<double>(sa.size());
  const auto nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  // Walk the merged order, consuming ties on both sides before comparing.
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double waveform_rmse(std::span<const double> truth, std::span<const double> recon) {
  if (truth.size() != recon.size()) {
    throw ShapeError("waveform lengths differ: " + std::to_string(truth.size()) + " vs " +
                     std::to_string(recon.size()));
  }
  if (truth.empty()) throw ShapeError("waveforms are empty");
  double sq = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = truth[i] - recon[i];
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(truth.size()));
}

double waveform_rmse(const Waveform& truth, const Waveform& recon) {
  return waveform_rmse(truth.samples(), recon.samples());
}

Hrv hrv(const RrSeries& rr) {
  if (rr.empty()) throw DomainError("hrv needs at least one interval");
  if (rr.size() < 2) throw DomainError("hrv standard deviation needs at least two intervals");
  const auto& x = rr.intervals();
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

double mae_hr(const RrSeries& truth, const RrSeries& recon) {
  if (truth.empty() || recon.empty()) throw DomainError("mae_hr needs non-empty series");
  const auto ts = truth.seconds();
  const auto rs = recon.seconds();
  const std::size_t n = std::min(ts.size(), rs.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += std::abs(60.0 / ts[i] - 60.0 / rs[i]);
  return sum / static_cast<double>(n);
}

FeatureSet::FeatureSet(std::size_t dim, std::vector<double> row_major)
    : dim_(dim), data_(std::move(row_major)) {
  if (dim_ == 0) throw ShapeError("feature dimension must be positive");
  if (data_.size() % dim_ != 0) throw ShapeError("feature data is not a whole number of rows");
  for (double v : data_) {
    if (!std::isfinite(v)) throw DataError("non-finite feature value");
  }
}

void FeatureSet::push_back(std::span<const double> row) {
  if (dim_ == 0) dim_ = row.size();
  if (row.size() != dim_) throw ShapeError("feature row has the wrong dimension");
  data_.insert(data_.end(), row.begin(), row.end());
}

double frechet_distance(const FeatureSet& real, const FeatureSet& gen) {
  if (real.dim() != gen.dim()) {
    throw ShapeError("feature dimensions differ: " + std::to_string(real.dim()) + " vs " +
                     std::to_string(gen.dim()));
  }
  if (real.rows() < 2 || gen.rows() < 2) throw DataError("need at least 2 feature rows per set");

  // Extended precision: the trace term cancels against the covariance traces,
  // and features on very different scales leave little headroom in double.
  using Real = long double;
  using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const auto d = static_cast<Eigen::Index>(real.dim());
  auto stats = [d](const FeatureSet& f) {
    const Eigen::Map<const RowMat> raw(f.data().data(), static_cast<Eigen::Index>(f.rows()), d);
    const Mat x = raw.cast<Real>();
    const Vec mu = x.colwise().mean().transpose();
    const Mat centered = x.rowwise() - mu.transpose();
    Mat cov = centered.transpose() * centered / static_cast<Real>(f.rows() - 1);
    cov.diagonal().array() += static_cast<Real>(kFrechetRegularization);
    return std::pair{mu, cov};
  };
  const auto [mu_r, cov_r] = stats(real);
  const auto [mu_g, cov_g] = stats(gen);

  Eigen::SelfAdjointEigenSolver<Mat> eig_r(cov_r);
  const Vec sqrt_vals = eig_r.eigenvalues().cwiseMax(Real{0}).cwiseSqrt();
  const Mat sqrt_r = eig_r.eigenvectors() * sqrt_vals.asDiagonal() * eig_r.eigenvectors().transpose();
  Mat inner = sqrt_r * cov_g * sqrt_r;
  inner = Real{0.5} * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig_inner(inner, Eigen::EigenvaluesOnly);
  const Real trace_sqrt = eig_inner.eigenvalues().cwiseMax(Real{0}).cwiseSqrt().sum();

  const auto fd = static_cast<double>((mu_r - mu_g).squaredNorm() + cov_r.trace() + cov_g.trace() -
                                      Real{2} * trace_sqrt);
  return std::max(0.0, fd);
}

std::vector<double> segment_descriptor(std::span<const double> seg) {
  const std::size_t n = seg.size();
  const double nn = static_cast<double>(n);
  const double mean = std::accumulate(seg.begin(), seg.end(), 0.0) / nn;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0, sq = 0.0;
  for (double v : seg) {
    const double c = v - mean;
    m2 += c * c;
    m3 += c * c * c;
    m4 += c * c * c * c;
    sq += v * v;
  }
  m2 /= nn;
  m3 /= nn;
  m4 /= nn;
  const auto [lo, hi] = std::minmax_element(seg.begin(), seg.end());
  if (*lo == *hi) m2 = m3 = m4 = 0.0;  // exact, whatever the rounding in the mean
  const double sd = std::sqrt(m2);

  std::size_t crossings = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if ((seg[i - 1] < 0.0 && seg[i] >= 0.0) || (seg[i - 1] >= 0.0 && seg[i] < 0.0)) ++crossings;
  }
  const double zcr = n > 1 ? static_cast<double>(crossings) / static_cast<double>(n - 1) : 0.0;

  std::vector<double> centered(n);
  std::transform(seg.begin(), seg.end(), centered.begin(), [mean](double v) { return v - mean; });
  const auto spectrum = rdft(centered);
  double best = 0.0, weighted = 0.0, mag_sum = 0.0;
  std::size_t dominant = 0;
  // Magnitudes below this are round-off from a constant segment.
  const double floor = 1e-9 * std::max(1.0, nn * std::abs(mean));
  for (std::size_t k = 1; k < spectrum.size(); ++k) {
    const double m = std::abs(spectrum[k]);
    if (m > best) {
      best = m;
      dominant = k;
    }
    weighted += static_cast<double>(k) * m;
    mag_sum += m;
  }
  if (best <= floor) {
    dominant = 0;
    weighted = 0.0;
    mag_sum = 0.0;
  }
  const double centroid = mag_sum > 0.0 ? weighted / mag_sum : 0.0;
  const double skew = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  const double kurt = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;

  return {mean, sd, *lo, *hi, std::sqrt(sq / nn), zcr, static_cast<double>(dominant), centroid, skew,
          kurt};
}

FeatureSet segment_features(const Waveform& w, std::size_t window, double overlap) {
  const auto segments = segment(w, window, overlap);
  if (segments.size() < 2) {
    throw DataError("feature extraction needs at least 2 segments, got " +
                    std::to_string(segments.size()));
  }
  FeatureSet fs;
  for (const auto& s : segments) fs.push_back(segment_descriptor(s.values));
  return fs;
}

MetricReport compare_rr(const RrSeries& truth, const RrSeries& recon) {
  if (truth.unit() != recon.unit()) throw ShapeError("RR series use different units");
  const auto ht = unit_histogram(truth);
  const auto hr = unit_histogram(recon);
  MetricReport r;
  r.rhi = rhi(ht, hr);
  r.rrmse = rrmse_rr(truth, recon);
  r.remd = remd(ht, hr);
  r.kl = kl(ht, hr);
  r.ks = ks(truth, recon);
  r.mae_hr = mae_hr(truth, recon);
  if (recon.size() >= 2) {
    const auto h = hrv(recon.to_milliseconds());
    r.hrv_mean = h.mean;
    r.hrv_std = h.std;
  }
  if (truth.size() >= 2) {
    const auto h = hrv(truth.to_milliseconds());
    r.truth_hrv_mean = h.mean;
    r.truth_hrv_std = h.std;
  }
  return r;
}

}  // namespace pulsesynth
