#include "pulsesynth/io.hpp"

#include <unistd.h>

#include <charconv>
#include <cmath>
#include <optional>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include "pulsesynth/error.hpp"

namespace pulsesynth::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    out.push_back(trim(line.substr(pos, next == std::string_view::npos ? next : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

double parse_number(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("line " + std::to_string(line_no) + ": cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

// Comment metadata, header columns and data rows of a small CSV file.
struct CsvTable {
  std::optional<double> fs_hz;
  std::vector<std::string_view> header;
  std::vector<std::vector<std::string_view>> rows;
  std::vector<std::size_t> line_numbers;
};

CsvTable parse_table(std::string_view text) {
  CsvTable t;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    auto line = trim(text.substr(pos, end == std::string_view::npos ? end : end - pos));
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      auto body = trim(line.substr(1));
      constexpr std::string_view key = "fs_hz=";
      if (body.starts_with(key)) t.fs_hz = parse_number(trim(body.substr(key.size())), line_no);
      continue;
    }
    if (t.header.empty()) {
      t.header = split(line, ',');
      continue;
    }
    auto cells = split(line, ',');
    if (cells.size() != t.header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(t.header.size()) + " columns");
    }
    t.rows.push_back(std::move(cells));
    t.line_numbers.push_back(line_no);
  }
  if (t.header.empty()) throw DataError("CSV has no header line");
  return t;
}

std::size_t column(const CsvTable& t, std::string_view name) {
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == name) return i;
  }
  throw DataError("CSV is missing column '" + std::string(name) + "'");
}

std::vector<double> numeric_column(const CsvTable& t, std::size_t col) {
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) out.push_back(parse_number(t.rows[r][col], t.line_numbers[r]));
  return out;
}

double require_rate(const CsvTable& t) {
  if (!t.fs_hz) throw DataError("CSV lacks a '# fs_hz=<rate>' comment line");
  return *t.fs_hz;
}

std::vector<double> number_array(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_array()) {
    throw ValidationError(field, "missing or not an array");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < j[field].size(); ++i) {
    const auto& v = j[field][i];
    if (!v.is_number()) {
      throw ValidationError(std::string(field) + "[" + std::to_string(i) + "]", "not a number");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("number formatting failed");
  return {buf, ptr};
}

void write_text_atomic(const fs::path& path, std::string_view content) {
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw DataError("cannot move output into place at " + path.string() + ": " + ec.message());
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string waveform_csv(const Waveform& w) {
  std::string out = "# fs_hz=" + format_double(w.sample_rate_hz()) + "\nindex,value\n";
  for (std::size_t i = 0; i < w.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_double(w[i]);
    out += '\n';
  }
  return out;
}

std::string pair_csv(const EcgPpgPair& pair) {
  std::string out = "# fs_hz=" + format_double(pair.sample_rate_hz()) + "\nindex,ecg,ppg\n";
  for (std::size_t i = 0; i < pair.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_double(pair.ecg()[i]);
    out += ',';
    out += format_double(pair.ppg()[i]);
    out += '\n';
  }
  return out;
}

std::string peaks_csv(const PeakList& peaks) {
  std::string out = "index\n";
  for (std::size_t idx : peaks.indices()) out += std::to_string(idx) + "\n";
  return out;
}

std::string rr_csv(const RrSeries& rr) {
  std::string out;
  if (rr.sample_rate_hz()) out += "# fs_hz=" + format_double(*rr.sample_rate_hz()) + "\n";
  out += "interval,unit\n";
  const std::string unit(to_string(rr.unit()));
  for (double v : rr.intervals()) out += format_double(v) + "," + unit + "\n";
  return out;
}

std::string histogram_csv(const UnitHistogram& h) {
  std::string out = "bin,count\n";
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    out += std::to_string(h.origin + static_cast<std::int64_t>(k)) + "," + std::to_string(h.counts[k]) + "\n";
  }
  return out;
}

Waveform parse_waveform_csv(std::string_view text) {
  const auto t = parse_table(text);
  return Waveform(numeric_column(t, column(t, "value")), require_rate(t));
}

EcgPpgPair parse_pair_csv(std::string_view text) {
  const auto t = parse_table(text);
  const double fs_hz = require_rate(t);
  return {Waveform(numeric_column(t, column(t, "ecg")), fs_hz),
          Waveform(numeric_column(t, column(t, "ppg")), fs_hz)};
}

Waveform parse_channel_csv(std::string_view text, std::string_view channel) {
  const auto t = parse_table(text);
  const double fs_hz = require_rate(t);
  for (const auto& h : t.header) {
    if (h == "value") return Waveform(numeric_column(t, column(t, "value")), fs_hz);
  }
  if (channel != "ecg" && channel != "ppg") {
    throw InvalidArgument("channel must be 'ecg' or 'ppg'");
  }
  return Waveform(numeric_column(t, column(t, channel)), fs_hz);
}

PeakList parse_peaks_csv(std::string_view text) {
  const auto t = parse_table(text);
  std::vector<std::size_t> idx;
  for (double v : numeric_column(t, column(t, "index"))) {
    if (v < 0 || v != std::floor(v)) throw DataError("peak index must be a non-negative integer");
    idx.push_back(static_cast<std::size_t>(v));
  }
  return PeakList(std::move(idx));
}

RrSeries parse_rr_csv(std::string_view text) {
  const auto t = parse_table(text);
  const auto values = numeric_column(t, column(t, "interval"));
  const std::size_t unit_col = column(t, "unit");
  if (t.rows.empty()) throw DataError("RR file has no intervals");
  const RrUnit unit = parse_rr_unit(t.rows.front()[unit_col]);
  for (std::size_t r = 1; r < t.rows.size(); ++r) {
    if (parse_rr_unit(t.rows[r][unit_col]) != unit) {
      throw DataError("line " + std::to_string(t.line_numbers[r]) + ": RR unit changes within file");
    }
  }
  if (unit == RrUnit::samples) require_rate(t);
  return {values, unit, t.fs_hz};
}

Waveform read_waveform(const fs::path& path) { return parse_waveform_csv(read_text(path)); }
EcgPpgPair read_pair(const fs::path& path) { return parse_pair_csv(read_text(path)); }
RrSeries read_rr(const fs::path& path) { return parse_rr_csv(read_text(path)); }

json template_to_json(const RhythmTemplate& t) {
  return {{"name", t.name}, {"a", t.a}, {"b", t.b}, {"theta", t.theta}};
}

RhythmTemplate template_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("", "template must be a JSON object");
  RhythmTemplate t;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ValidationError("name", "not a string");
    t.name = j["name"].get<std::string>();
  }
  t.a = number_array(j, "a");
  t.b = number_array(j, "b");
  t.theta = number_array(j, "theta");
  t.validate();
  return t;
}

RhythmTemplate read_template(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("", std::string("template is not valid JSON: ") + e.what());
  }
  return template_from_json(j);
}

json report_to_json(const MetricReport& r) {
  json j = json::object();
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
  };
  put("rhi", r.rhi);
  put("rrmse", r.rrmse);
  put("remd", r.remd);
  put("kl", r.kl);
  put("ks", r.ks);
  put("waveform_rmse", r.waveform_rmse);
  put("hrv_mean", r.hrv_mean);
  put("hrv_std", r.hrv_std);
  put("truth_hrv_mean", r.truth_hrv_mean);
  put("truth_hrv_std", r.truth_hrv_std);
  put("mae_hr", r.mae_hr);
  put("fd", r.fd);
  j["inputs"] = r.inputs;
  return j;
}

}  // namespace pulsesynth::io
