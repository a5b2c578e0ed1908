#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pulsesynth/peaks.hpp"
#include "pulsesynth/waveform.hpp"

namespace pulsesynth {

// Histogram with bins of width one RR unit; bin k covers
// [origin + k, origin + k + 1).
struct UnitHistogram {
  std::int64_t origin = 0;
  std::vector<std::uint64_t> counts;

  std::uint64_t total() const;
  std::int64_t last_bin() const { return origin + static_cast<std::int64_t>(counts.size()) - 1; }
  // Count in bin `value`; zero outside the support.
  std::uint64_t count_at(std::int64_t value) const;
};

// Each interval lands in bin floor(value).
UnitHistogram unit_histogram(const RrSeries& rr);
UnitHistogram unit_histogram(std::span<const double> values);

// Histogram intersection over the union of bins, divided by the smaller
// total. In [0, 1].
double rhi(const UnitHistogram& a, const UnitHistogram& b);

// RMSE over chronological pairs (truncated to the shorter series) divided
// by the mean of `a` over the same pairs.
double rrmse_rr(const RrSeries& a, const RrSeries& b);
double rrmse(std::span<const double> a, std::span<const double> b);

// Earth mover's distance between count-level CDFs on the union support,
// divided by total(a) x (union bins - 1).
double remd(const UnitHistogram& a, const UnitHistogram& b);
// Unnormalized count-level EMD, sum |cumsum(a - b)|.
double emd(const UnitHistogram& a, const UnitHistogram& b);

inline constexpr double kKlEpsilon = 1e-10;

// KL(P || Q) in nats over the union support; empty Q bins under P mass are
// floored at kKlEpsilon.
double kl(const UnitHistogram& p, const UnitHistogram& q);

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks(std::span<const double> a, std::span<const double> b);
inline double ks(const RrSeries& a, const RrSeries& b) { return ks(a.intervals(), b.intervals()); }

// Root-mean-square difference. Throws ShapeError on a length mismatch.
double waveform_rmse(const Waveform& truth, const Waveform& recon);
double waveform_rmse(std::span<const double> truth, std::span<const double> recon);

struct Hrv {
  double mean;
  double std;  // population standard deviation
};

// In the series' own unit. Needs at least two intervals.
Hrv hrv(const RrSeries& rr);

// Mean |60/RR_truth - 60/RR_recon| in beats per minute over chronological
// pairs. Intervals are converted to seconds, so both series need a known
// unit and (for samples) rate.
double mae_hr(const RrSeries& truth, const RrSeries& recon);

// Row-major feature matrix, one row per observation.
class FeatureSet {
 public:
  FeatureSet() = default;
  FeatureSet(std::size_t dim, std::vector<double> row_major);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t rows() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * dim_, dim_}; }
  const std::vector<double>& data() const noexcept { return data_; }

  void push_back(std::span<const double> row);

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

inline constexpr double kFrechetRegularization = 1e-6;

// ||mu_r - mu_g||^2 + Tr(S_r + S_g - 2 (S_r S_g)^{1/2}) with unbiased
// covariances regularized by 1e-6 I. The trace of the matrix square root
// is taken from the eigenvalues of S_r^{1/2} S_g S_r^{1/2}.
double frechet_distance(const FeatureSet& real, const FeatureSet& gen);

inline constexpr std::size_t kSegmentFeatureDim = 10;

// Per-segment descriptor, in order: mean, std, min, max, rms,
// zero-crossing rate, dominant DFT bin, spectral centroid (bins), skewness,
// excess kurtosis. Spectral features use the mean-removed segment and
// exclude DC. Needs at least two segments.
FeatureSet segment_features(const Waveform& w, std::size_t window, double overlap);
std::vector<double> segment_descriptor(std::span<const double> segment);

// Flat metric record; absent entries are not applicable to the comparison.
struct MetricReport {
  std::optional<double> rhi, rrmse, remd, kl, ks;
  std::optional<double> waveform_rmse;
  std::optional<double> hrv_mean, hrv_std, truth_hrv_mean, truth_hrv_std;
  std::optional<double> mae_hr;
  std::optional<double> fd;
  std::map<std::string, std::string> inputs;
};

// All RR distribution metrics plus HRV and MAE_HR; `truth` is the reference
// histogram (KL's P, rEMD's total earth).
MetricReport compare_rr(const RrSeries& truth, const RrSeries& recon);

}  // namespace pulsesynth
