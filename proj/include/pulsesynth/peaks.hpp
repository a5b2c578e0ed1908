#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pulsesynth/waveform.hpp"

namespace pulsesynth {

// Strictly increasing sample indices.
class PeakList {
 public:
  PeakList() = default;
  explicit PeakList(std::vector<std::size_t> indices);

  const std::vector<std::size_t>& indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  std::size_t front() const { return indices_.front(); }
  std::size_t back() const { return indices_.back(); }
  std::size_t operator[](std::size_t i) const { return indices_[i]; }

 private:
  std::vector<std::size_t> indices_;
};

enum class RrUnit { samples, milliseconds };

std::string_view to_string(RrUnit unit);
RrUnit parse_rr_unit(std::string_view text);

// Beat-to-beat intervals. Sample-unit series carry the rate they were
// measured at; millisecond series may carry one for conversion back.
class RrSeries {
 public:
  RrSeries() = default;
  RrSeries(std::vector<double> intervals, RrUnit unit,
           std::optional<double> sample_rate_hz = std::nullopt);

  static RrSeries in_samples(std::vector<double> intervals, double sample_rate_hz) {
    return {std::move(intervals), RrUnit::samples, sample_rate_hz};
  }
  static RrSeries in_milliseconds(std::vector<double> intervals) {
    return {std::move(intervals), RrUnit::milliseconds};
  }

  const std::vector<double>& intervals() const noexcept { return intervals_; }
  RrUnit unit() const noexcept { return unit_; }
  std::optional<double> sample_rate_hz() const noexcept { return rate_; }
  std::size_t size() const noexcept { return intervals_.size(); }
  bool empty() const noexcept { return intervals_.empty(); }
  double operator[](std::size_t i) const { return intervals_[i]; }

  RrSeries to_milliseconds() const;
  RrSeries to_samples(double sample_rate_hz) const;
  // Same values expressed in `unit`; conversions need a known rate.
  RrSeries in_unit(RrUnit unit) const;
  std::vector<double> seconds() const;

 private:
  std::vector<double> intervals_;
  RrUnit unit_ = RrUnit::samples;
  std::optional<double> rate_;
};

// Local maxima (strictly above both neighbours, plateaus reduced to their
// midpoint, earlier sample on even plateaus) with prominence >=
// min_prominence, then thinned highest-first so survivors are at least
// min_distance samples apart. Equal heights keep the earlier index.
PeakList find_peaks(const Waveform& w, int min_distance, double min_prominence = 0.0);

// Topographic prominence of each peak against the full signal.
std::vector<double> peak_prominences(std::span<const double> x, const std::vector<std::size_t>& peaks);

// Consecutive index differences in samples. Needs at least two peaks.
RrSeries rr_from_peaks(const PeakList& p, double sample_rate_hz);

struct RrReportRow {
  std::size_t beat;
  double truth;
  double recon;
  double deviation;  // recon - truth
};

struct RrReport {
  RrUnit unit;
  std::vector<RrReportRow> rows;
  double mean_deviation;
  double max_abs_deviation;
};

// Per-beat comparison paired chronologically up to the shorter series.
// `recon` is converted to the unit of `truth` when they differ.
RrReport rr_report(const RrSeries& truth, const RrSeries& recon);

}  // namespace pulsesynth
