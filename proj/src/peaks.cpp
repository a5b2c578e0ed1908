#include "pulsesynth/peaks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pulsesynth/error.hpp"

namespace pulsesynth {

PeakList::PeakList(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
  for (std::size_t i = 1; i < indices_.size(); ++i) {
    if (indices_[i] <= indices_[i - 1]) throw DataError("peak indices must be strictly increasing");
  }
}

std::string_view to_string(RrUnit unit) {
  return unit == RrUnit::samples ? "samples" : "ms";
}

RrUnit parse_rr_unit(std::string_view text) {
  if (text == "samples" || text == "sample") return RrUnit::samples;
  if (text == "ms" || text == "milliseconds") return RrUnit::milliseconds;
  throw DataError("unknown RR unit '" + std::string(text) + "'");
}

RrSeries::RrSeries(std::vector<double> intervals, RrUnit unit, std::optional<double> sample_rate_hz)
    : intervals_(std::move(intervals)), unit_(unit), rate_(sample_rate_hz) {
  if (unit_ == RrUnit::samples && !rate_) {
    throw InvalidArgument("sample-unit RR series needs a sample rate");
  }
  if (rate_ && !(*rate_ > 0.0)) throw InvalidArgument("sample rate must be positive");
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    if (!(intervals_[i] > 0.0) || !std::isfinite(intervals_[i])) {
      throw DomainError("RR interval " + std::to_string(i) + " is not a positive finite value");
    }
  }
}

RrSeries RrSeries::to_milliseconds() const {
  if (unit_ == RrUnit::milliseconds) return *this;
  const double scale = 1000.0 / *rate_;
  std::vector<double> ms(intervals_.size());
  std::transform(intervals_.begin(), intervals_.end(), ms.begin(),
                 [scale](double v) { return v * scale; });
  return {std::move(ms), RrUnit::milliseconds, rate_};
}

RrSeries RrSeries::to_samples(double sample_rate_hz) const {
  if (unit_ == RrUnit::samples && *rate_ == sample_rate_hz) return *this;
  const double ms_per_sample = 1000.0 / sample_rate_hz;
  const auto ms = to_milliseconds();
  std::vector<double> s(ms.size());
  std::transform(ms.intervals_.begin(), ms.intervals_.end(), s.begin(),
                 [ms_per_sample](double v) { return v / ms_per_sample; });
  return {std::move(s), RrUnit::samples, sample_rate_hz};
}

RrSeries RrSeries::in_unit(RrUnit unit) const {
  if (unit == unit_) return *this;
  if (unit == RrUnit::milliseconds) return to_milliseconds();
  if (!rate_) throw InvalidArgument("no sample rate known for conversion to samples");
  return to_samples(*rate_);
}

std::vector<double> RrSeries::seconds() const {
  auto ms = to_milliseconds().intervals();
  for (double& v : ms) v /= 1000.0;
  return ms;
}

std::vector<double> peak_prominences(std::span<const double> x,
                                     const std::vector<std::size_t>& peaks) {
  std::vector<double> prom(peaks.size());
  const std::size_t n = x.size();
  for (std::size_t k = 0; k < peaks.size(); ++k) {
    const std::size_t p = peaks[k];
    const double h = x[p];
    double left_min = h;
    for (std::size_t i = p + 1; i-- > 0;) {
      if (x[i] > h) break;
      left_min = std::min(left_min, x[i]);
    }
    double right_min = h;
    for (std::size_t i = p; i < n; ++i) {
      if (x[i] > h) break;
      right_min = std::min(right_min, x[i]);
    }
    prom[k] = h - std::max(left_min, right_min);
  }
  return prom;
}

PeakList find_peaks(const Waveform& w, int min_distance, double min_prominence) {
  if (min_distance < 1) throw InvalidArgument("min_distance must be >= 1");
  const auto& x = w.values();
  const std::size_t n = x.size();

  std::vector<std::size_t> candidates;
  std::size_t i = 1;
  while (i + 1 < n) {
    if (x[i - 1] < x[i]) {
      std::size_t ahead = i + 1;
      while (ahead + 1 < n && x[ahead] == x[i]) ++ahead;
      if (x[ahead] < x[i]) {
        candidates.push_back((i + ahead - 1) / 2);
        i = ahead;
        continue;
      }
    }
    ++i;
  }

  if (min_prominence > 0.0) {
    const auto prom = peak_prominences(x, candidates);
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      if (prom[k] >= min_prominence) kept.push_back(candidates[k]);
    }
    candidates = std::move(kept);
  }

  if (min_distance > 1 && candidates.size() > 1) {
    const auto dist = static_cast<std::size_t>(min_distance);
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return x[candidates[a]] > x[candidates[b]];
    });
    std::vector<bool> keep(candidates.size(), true);
    for (std::size_t idx : order) {
      if (!keep[idx]) continue;
      for (std::size_t j = idx; j-- > 0 && candidates[idx] - candidates[j] < dist;) keep[j] = false;
      for (std::size_t j = idx + 1; j < candidates.size() && candidates[j] - candidates[idx] < dist;
           ++j) {
        keep[j] = false;
      }
    }
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      if (keep[k]) kept.push_back(candidates[k]);
    }
    candidates = std::move(kept);
  }
  return PeakList(std::move(candidates));
}

RrSeries rr_from_peaks(const PeakList& p, double sample_rate_hz) {
  if (p.size() < 2) {
    throw InsufficientPeaksError("need at least 2 peaks for RR intervals, found " +
                                 std::to_string(p.size()));
  }
  std::vector<double> rr(p.size() - 1);
  for (std::size_t i = 0; i + 1 < p.size(); ++i) rr[i] = static_cast<double>(p[i + 1] - p[i]);
  return RrSeries::in_samples(std::move(rr), sample_rate_hz);
}

RrReport rr_report(const RrSeries& truth, const RrSeries& recon) {
  if (truth.empty() || recon.empty()) throw DataError("rr_report needs non-empty series");
  RrSeries other = recon;
  if (recon.unit() != truth.unit()) {
    other = truth.unit() == RrUnit::milliseconds ? recon.to_milliseconds()
                                                  : recon.to_samples(*truth.sample_rate_hz());
  }
  RrReport report{truth.unit(), {}, 0.0, 0.0};
  const std::size_t n = std::min(truth.size(), other.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dev = other[i] - truth[i];
    report.rows.push_back({i, truth[i], other[i], dev});
    sum += dev;
    report.max_abs_deviation = std::max(report.max_abs_deviation, std::abs(dev));
  }
  report.mean_deviation = sum / static_cast<double>(n);
  return report;
}

}  // namespace pulsesynth
