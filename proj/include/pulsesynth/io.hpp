#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "pulsesynth/metrics.hpp"
#include "pulsesynth/ode.hpp"
#include "pulsesynth/peaks.hpp"
#include "pulsesynth/waveform.hpp"

#include <json.hpp>

namespace pulsesynth::io {

// Text formats. Every numeric field is written with the shortest decimal
// representation that parses back to the same double.
//
//   waveform CSV   # fs_hz=<rate>
//                  index,value
//   pair CSV       # fs_hz=<rate>
//                  index,ecg,ppg
//   peak CSV       index
//   RR CSV         [# fs_hz=<rate>]   (required when unit is samples)
//                  interval,unit

std::string format_double(double v);

// Writes through a temporary file in the same directory followed by a
// rename, so readers never observe a partial file.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_text(const std::filesystem::path& path);

std::string waveform_csv(const Waveform& w);
std::string pair_csv(const EcgPpgPair& pair);
std::string peaks_csv(const PeakList& peaks);
std::string rr_csv(const RrSeries& rr);
std::string histogram_csv(const UnitHistogram& h);

Waveform parse_waveform_csv(std::string_view text);
EcgPpgPair parse_pair_csv(std::string_view text);
PeakList parse_peaks_csv(std::string_view text);
RrSeries parse_rr_csv(std::string_view text);

// Reads a single channel from either a waveform CSV or a pair CSV
// (`channel` is "ecg" or "ppg" for the latter; ignored for the former).
Waveform parse_channel_csv(std::string_view text, std::string_view channel);

Waveform read_waveform(const std::filesystem::path& path);
EcgPpgPair read_pair(const std::filesystem::path& path);
RrSeries read_rr(const std::filesystem::path& path);

// {name, a[], b[], theta[]}, angles in radians.
nlohmann::json template_to_json(const RhythmTemplate& t);
RhythmTemplate template_from_json(const nlohmann::json& j);
RhythmTemplate read_template(const std::filesystem::path& path);

// Flat metric name -> value plus an "inputs" block.
nlohmann::json report_to_json(const MetricReport& r);

}  // namespace pulsesynth::io
