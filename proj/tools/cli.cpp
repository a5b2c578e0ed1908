#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pulsesynth/error.hpp"
#include "pulsesynth/io.hpp"
#include "pulsesynth/metrics.hpp"
#include "pulsesynth/ode.hpp"
#include "pulsesynth/peaks.hpp"
#include "pulsesynth/signal.hpp"

namespace pulsesynth::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path manifest_path(const fs::path& output) {
  fs::path p = output;
  p.replace_extension(".manifest.json");
  return p;
}

void write_manifest(const fs::path& output, const std::string& command, json parameters,
                    std::uint64_t seed) {
  const json manifest = {{"command", command},
                         {"parameters", std::move(parameters)},
                         {"seed", seed},
                         {"tool_version", kToolVersion},
                         {"timestamp", utc_timestamp()}};
  io::write_text_atomic(manifest_path(output), manifest.dump(2) + "\n");
}

Band parse_band(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("band must be written lo:hi, got '" + text + "'");
  try {
    std::size_t used_lo = 0;
    std::size_t used_hi = 0;
    const std::string lo_text = text.substr(0, colon);
    const std::string hi_text = text.substr(colon + 1);
    const double lo = std::stod(lo_text, &used_lo);
    const double hi = std::stod(hi_text, &used_hi);
    if (used_lo != lo_text.size() || used_hi != hi_text.size()) throw std::invalid_argument("trailing");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw UsageError("band must be written lo:hi, got '" + text + "'");
  }
}

std::uint64_t seed_from_env() {
  if (const char* env = std::getenv("PULSESYNTH_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::logic_error&) {
      throw UsageError(std::string("PULSESYNTH_SEED is not an unsigned integer: ") + env);
    }
  }
  return 0;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string config;
  std::string rhythm = "rsr";
  std::string template_path;
  std::optional<double> duration_s;
  std::optional<double> rr_mean_ms;
  std::optional<double> rr_std_ms;
  std::string rr_file;
  double fs_hz = 125.0;
  std::optional<std::uint64_t> seed;
  double noise_rel_std = 0.0;
  int oversample = 8;
  std::string out = "pair.csv";
  std::string emit_rr;
};

// Fills fields not given on the command line from a synthesis manifest, or
// from the `parameters` block of a previous run manifest.
void apply_config(SynthArgs& a, const CLI::App& cmd) {
  json j;
  try {
    j = json::parse(io::read_text(a.config));
  } catch (const json::parse_error& e) {
    throw ValidationError("", std::string("config is not valid JSON: ") + e.what());
  }
  if (j.contains("parameters")) j = j["parameters"];
  if (!j.is_object()) throw ValidationError("", "config must be a JSON object");

  auto given = [&](const char* flag) { return cmd.count(flag) > 0; };
  auto number = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_number()) throw ValidationError(key, "not a number");
    return j[key].get<double>();
  };
  auto text = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_string()) throw ValidationError(key, "not a string");
    return j[key].get<std::string>();
  };

  if (!given("--rhythm")) {
    if (auto v = text("rhythm")) a.rhythm = *v;
  }
  if (!given("--template")) {
    if (auto v = text("template")) a.template_path = *v;
  }
  if (!given("--fs")) {
    if (auto v = number("sample_rate_hz")) a.fs_hz = *v;
  }
  if (!given("--noise-rel-std")) {
    if (auto v = number("noise_rel_std")) a.noise_rel_std = *v;
  }
  if (!given("--oversample")) {
    if (auto v = number("oversample")) a.oversample = static_cast<int>(*v);
  }
  if (!given("--seed") && j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ValidationError("seed", "not an unsigned integer");
    a.seed = j["seed"].get<std::uint64_t>();
  }
  // RR source: command-line choice wins as a whole.
  const bool cli_rr = given("--duration-s") || given("--rr-file") || given("--rr-mean-ms") ||
                      given("--rr-std-ms");
  if (!cli_rr) {
    a.duration_s = number("duration_s");
    a.rr_mean_ms = number("rr_mean_ms");
    a.rr_std_ms = number("rr_std_ms");
    if (auto v = text("rr_file")) a.rr_file = *v;
  }
}

int cmd_synth(SynthArgs a, const CLI::App& cmd) {
  if (!a.config.empty()) apply_config(a, cmd);
  const std::uint64_t seed = a.seed ? *a.seed : seed_from_env();

  const bool gaussian = a.duration_s || a.rr_mean_ms || a.rr_std_ms;
  if (gaussian && !a.rr_file.empty()) {
    throw UsageError("--rr-file conflicts with --duration-s/--rr-mean-ms/--rr-std-ms");
  }
  if (!gaussian && a.rr_file.empty()) {
    throw UsageError("give either --duration-s with --rr-mean-ms, or --rr-file");
  }
  if (gaussian && (!a.duration_s || !a.rr_mean_ms)) {
    throw UsageError("the Gaussian RR prescription needs --duration-s and --rr-mean-ms");
  }
  if (!(a.fs_hz > 0.0)) throw UsageError("--fs must be positive");

  SynthesisConfig cfg;
  cfg.rhythm = a.template_path.empty() ? preset(a.rhythm) : io::read_template(a.template_path);
  cfg.sample_rate_hz = a.fs_hz;
  cfg.oversample = a.oversample;
  cfg.noise_rel_std = a.noise_rel_std;
  cfg.seed = seed;

  RrSeries prescribed;
  if (gaussian) {
    if (!(*a.duration_s > 0.0)) throw UsageError("--duration-s must be positive");
    const auto n = static_cast<std::size_t>(std::llround(*a.duration_s * a.fs_hz));
    prescribed = gaussian_rr(*a.rr_mean_ms, a.rr_std_ms.value_or(0.0), n, a.fs_hz, seed);
    cfg.num_samples = n;
  } else {
    prescribed = io::read_rr(a.rr_file).to_samples(a.fs_hz);
  }
  cfg.rr_targets = prescribed.intervals();

  const EcgPpgPair pair = synthesize(cfg);
  io::write_text_atomic(a.out, io::pair_csv(pair));
  if (!a.emit_rr.empty()) io::write_text_atomic(a.emit_rr, io::rr_csv(prescribed));

  json params = {{"rhythm", a.template_path.empty() ? std::string(to_string(parse_rhythm(a.rhythm)))
                                                    : cfg.rhythm.name},
                 {"sample_rate_hz", a.fs_hz},
                 {"noise_rel_std", a.noise_rel_std},
                 {"seed", seed},
                 {"oversample", a.oversample},
                 {"samples", pair.size()},
                 {"beats", r_wave_positions(cfg).size()},
                 {"prescribed_intervals", prescribed.size()}};
  if (!a.template_path.empty()) params["template"] = a.template_path;
  if (gaussian) {
    params["duration_s"] = *a.duration_s;
    params["rr_mean_ms"] = *a.rr_mean_ms;
    params["rr_std_ms"] = a.rr_std_ms.value_or(0.0);
  } else {
    params["rr_file"] = a.rr_file;
  }
  if (!a.emit_rr.empty()) params["emit_rr"] = a.emit_rr;
  write_manifest(a.out, "synth", params, seed);
  std::cout << "wrote " << pair.size() << " samples per channel to " << a.out << "\n";
  return kOk;
}

// ----------------------------------------------------------- preprocess

struct PreprocessArgs {
  std::string in;
  std::string out;
  std::string ecg_band = "0.4:45";
  std::string ppg_band = "0.3:8";
  std::optional<double> resample_hz;
  bool align = false;
  int align_distance = 50;
  double align_prominence = 0.0;
  bool normalize = false;
};

int cmd_preprocess(const PreprocessArgs& a) {
  const Band ecg_band = parse_band(a.ecg_band);
  const Band ppg_band = parse_band(a.ppg_band);
  if (a.resample_hz && !(*a.resample_hz > 0.0)) throw UsageError("--resample-hz must be positive");
  if (a.align_distance < 1) throw UsageError("--align-distance must be >= 1");

  EcgPpgPair pair = io::read_pair(a.in);
  const double fs_in = pair.sample_rate_hz();
  validate_band(ecg_band.low_hz, ecg_band.high_hz, fs_in);
  validate_band(ppg_band.low_hz, ppg_band.high_hz, fs_in);

  pair = {bandpass(pair.ecg(), ecg_band), bandpass(pair.ppg(), ppg_band)};
  if (a.resample_hz) pair = {resample(pair.ecg(), *a.resample_hz), resample(pair.ppg(), *a.resample_hz)};
  if (a.align) pair = align_first_peaks(pair, a.align_distance, a.align_prominence);
  if (a.normalize) pair = {minmax_normalize(pair.ecg()), minmax_normalize(pair.ppg())};

  io::write_text_atomic(a.out, io::pair_csv(pair));
  json params = {{"in", a.in},
                 {"ecg_band", {ecg_band.low_hz, ecg_band.high_hz}},
                 {"ppg_band", {ppg_band.low_hz, ppg_band.high_hz}},
                 {"input_rate_hz", fs_in},
                 {"output_rate_hz", pair.sample_rate_hz()},
                 {"align", a.align},
                 {"normalize", a.normalize},
                 {"samples", pair.size()}};
  if (a.align) {
    params["align_distance"] = a.align_distance;
    params["align_prominence"] = a.align_prominence;
  }
  write_manifest(a.out, "preprocess", params, 0);
  return kOk;
}

// ---------------------------------------------------------------- peaks

struct PeaksArgs {
  std::string in;
  std::string channel = "ecg";
  int min_distance = 50;
  double prominence = 0.0;
  std::string out_peaks;
  std::string out_rr;
  std::string rr_unit = "samples";
};

int cmd_peaks(const PeaksArgs& a) {
  if (a.min_distance < 1) throw UsageError("--min-distance must be >= 1");
  if (a.prominence < 0.0) throw UsageError("--prominence must be >= 0");
  if (a.out_peaks.empty() && a.out_rr.empty()) throw UsageError("give --out-peaks and/or --out-rr");
  const RrUnit unit = [&] {
    try {
      return parse_rr_unit(a.rr_unit);
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
  }();

  const Waveform w = io::parse_channel_csv(io::read_text(a.in), a.channel);
  const PeakList peaks = find_peaks(w, a.min_distance, a.prominence);
  const RrSeries rr = rr_from_peaks(peaks, w.sample_rate_hz()).in_unit(unit);

  if (!a.out_peaks.empty()) io::write_text_atomic(a.out_peaks, io::peaks_csv(peaks));
  if (!a.out_rr.empty()) io::write_text_atomic(a.out_rr, io::rr_csv(rr));
  const json params = {{"in", a.in},
                       {"channel", a.channel},
                       {"min_distance", a.min_distance},
                       {"prominence", a.prominence},
                       {"peaks", peaks.size()},
                       {"rr_unit", std::string(to_string(unit))}};
  write_manifest(a.out_peaks.empty() ? a.out_rr : a.out_peaks, "peaks", params, 0);
  std::cout << "peaks=" << peaks.size() << " intervals=" << rr.size() << "\n";
  return kOk;
}

// -------------------------------------------------------------- metrics

struct MetricsArgs {
  std::string truth;
  std::string recon;
  std::string channel = "ecg";
  std::size_t window = kDefaultSegmentWindow;
  double overlap = 0.5;
  std::string out;
  std::string emit_hist;
  std::string report;
};

int emit_report(const MetricsArgs& a, const std::string& kind, MetricReport report) {
  report.inputs["kind"] = kind;
  report.inputs["truth"] = a.truth;
  report.inputs["recon"] = a.recon;
  const std::string text = io::report_to_json(report).dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    io::write_text_atomic(a.out, text);
    json params = report.inputs;
    write_manifest(a.out, "metrics " + kind, params, 0);
  }
  return kOk;
}

int cmd_metrics_rr(const MetricsArgs& a) {
  const RrSeries truth = io::read_rr(a.truth);
  const RrSeries recon = io::read_rr(a.recon);
  if (truth.unit() != recon.unit()) {
    throw UsageError("RR files use different units (" + std::string(to_string(truth.unit())) +
                     " vs " + std::string(to_string(recon.unit())) + ")");
  }
  if (truth.unit() == RrUnit::samples && truth.sample_rate_hz() != recon.sample_rate_hz()) {
    throw UsageError("sample-unit RR files were measured at different rates");
  }
  MetricReport report = compare_rr(truth, recon);
  report.inputs["unit"] = std::string(to_string(truth.unit()));
  report.inputs["histogram_bin_width"] = "1 " + std::string(to_string(truth.unit()));
  report.inputs["kl_log"] = "natural";
  report.inputs["pairing"] = "chronological, truncated to shorter series";

  if (!a.emit_hist.empty()) {
    io::write_text_atomic(a.emit_hist + "_truth.csv", io::histogram_csv(unit_histogram(truth)));
    io::write_text_atomic(a.emit_hist + "_recon.csv", io::histogram_csv(unit_histogram(recon)));
  }
  if (!a.report.empty()) {
    const RrReport table = rr_report(truth, recon);
    std::string csv = "beat,truth,recon,deviation\n";
    for (const auto& row : table.rows) {
      csv += std::to_string(row.beat) + "," + io::format_double(row.truth) + "," +
             io::format_double(row.recon) + "," + io::format_double(row.deviation) + "\n";
    }
    csv += "summary,mean_deviation=" + io::format_double(table.mean_deviation) +
           ",max_abs_deviation=" + io::format_double(table.max_abs_deviation) + ",\n";
    io::write_text_atomic(a.report, csv);
  }
  return emit_report(a, "rr", std::move(report));
}

int cmd_metrics_waveform(const MetricsArgs& a) {
  const Waveform truth = io::parse_channel_csv(io::read_text(a.truth), a.channel);
  const Waveform recon = io::parse_channel_csv(io::read_text(a.recon), a.channel);
  MetricReport report;
  report.waveform_rmse = waveform_rmse(truth, recon);
  report.inputs["channel"] = a.channel;
  return emit_report(a, "waveform", std::move(report));
}

int cmd_metrics_fd(const MetricsArgs& a) {
  if (a.window == 0) throw UsageError("--window must be positive");
  if (!(a.overlap >= 0.0 && a.overlap < 1.0)) throw UsageError("--overlap must lie in [0, 1)");
  const Waveform real = io::parse_channel_csv(io::read_text(a.truth), a.channel);
  const Waveform gen = io::parse_channel_csv(io::read_text(a.recon), a.channel);
  MetricReport report;
  report.fd = frechet_distance(segment_features(real, a.window, a.overlap),
                               segment_features(gen, a.window, a.overlap));
  report.inputs["channel"] = a.channel;
  report.inputs["window"] = std::to_string(a.window);
  report.inputs["overlap"] = io::format_double(a.overlap);
  report.inputs["features"] = "10-dim segment descriptor";
  return emit_report(a, "fd", std::move(report));
}

// ---------------------------------------------------------- spectrogram

struct SpectrogramArgs {
  std::string in;
  std::string channel = "ecg";
  StftOptions opt;
  std::string out;
};

int cmd_spectrogram(const SpectrogramArgs& a) {
  const Waveform w = io::parse_channel_csv(io::read_text(a.in), a.channel);
  const Spectrogram s = stft_spectrogram(w, a.opt);
  std::string csv = "frame";
  for (std::size_t b = 0; b < s.bins; ++b) csv += ",bin" + std::to_string(b);
  csv += "\n";
  for (std::size_t m = 0; m < s.frames; ++m) {
    csv += std::to_string(m);
    for (std::size_t b = 0; b < s.bins; ++b) csv += "," + io::format_double(s.at(m, b));
    csv += "\n";
  }
  io::write_text_atomic(a.out, csv);
  write_manifest(a.out, "spectrogram",
                 {{"in", a.in},
                  {"channel", a.channel},
                  {"window_len", a.opt.window_len},
                  {"hop", a.opt.hop},
                  {"delta", a.opt.delta},
                  {"frames", s.frames}},
                 0);
  return kOk;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Synthetic ECG/PPG generation and RR / waveform fidelity metrics"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Synthesize a paired ECG/PPG recording");
  s->add_option("--config", synth.config, "Synthesis or run manifest JSON");
  s->add_option("--rhythm", synth.rhythm, "Preset rhythm: rsr, sa, afib");
  s->add_option("--template", synth.template_path, "Rhythm template JSON (overrides --rhythm)");
  s->add_option("--duration-s", synth.duration_s, "Duration for the Gaussian RR prescription");
  s->add_option("--rr-mean-ms", synth.rr_mean_ms, "Mean RR interval (ms)");
  s->add_option("--rr-std-ms", synth.rr_std_ms, "RR interval standard deviation (ms)");
  s->add_option("--rr-file", synth.rr_file, "RR CSV with prescribed intervals");
  s->add_option("--fs", synth.fs_hz, "Output sample rate (Hz)")->capture_default_str();
  s->add_option("--seed", synth.seed, "Random seed (default: $PULSESYNTH_SEED or 0)");
  s->add_option("--noise-rel-std", synth.noise_rel_std, "Relative std of template parameter noise")
      ->capture_default_str();
  s->add_option("--oversample", synth.oversample, "Integrator steps per output sample")
      ->capture_default_str();
  s->add_option("--out", synth.out, "Output pair CSV")->capture_default_str();
  s->add_option("--emit-rr", synth.emit_rr, "Also write the prescribed RR series to this CSV");

  PreprocessArgs pre;
  auto* p = app.add_subcommand("preprocess", "Filter, resample, align and normalize a pair CSV");
  p->add_option("--in", pre.in, "Input pair CSV")->required();
  p->add_option("--out", pre.out, "Output pair CSV")->required();
  p->add_option("--ecg-band", pre.ecg_band, "ECG passband lo:hi (Hz)")->capture_default_str();
  p->add_option("--ppg-band", pre.ppg_band, "PPG passband lo:hi (Hz)")->capture_default_str();
  p->add_option("--resample-hz", pre.resample_hz, "Resample to this rate after filtering");
  p->add_flag("--align", pre.align, "Crop both channels to their first detected peak");
  p->add_option("--align-distance", pre.align_distance, "Peak distance used for alignment")
      ->capture_default_str();
  p->add_option("--align-prominence", pre.align_prominence, "Peak prominence used for alignment")
      ->capture_default_str();
  p->add_flag("--normalize", pre.normalize, "Min-max normalize both channels to [-1, 1]");

  PeaksArgs pk;
  auto* k = app.add_subcommand("peaks", "Detect peaks and derive RR intervals");
  k->add_option("--in", pk.in, "Waveform or pair CSV")->required();
  k->add_option("--channel", pk.channel, "Channel of a pair CSV: ecg or ppg")->capture_default_str();
  k->add_option("--min-distance", pk.min_distance, "Minimum peak spacing (samples)")
      ->capture_default_str();
  k->add_option("--prominence", pk.prominence, "Minimum peak prominence")->capture_default_str();
  k->add_option("--out-peaks", pk.out_peaks, "Peak index CSV");
  k->add_option("--out-rr", pk.out_rr, "RR interval CSV");
  k->add_option("--rr-unit", pk.rr_unit, "RR unit: samples or ms")->capture_default_str();

  MetricsArgs rr_args, wf_args, fd_args;
  auto* m = app.add_subcommand("metrics", "Compare RR series, waveforms or feature distributions");
  m->require_subcommand(1);
  auto* mrr = m->add_subcommand("rr", "rHI, rRMSE, rEMD, KL, KS, HRV and MAE_HR");
  mrr->add_option("--truth", rr_args.truth, "Reference RR CSV")->required();
  mrr->add_option("--recon", rr_args.recon, "Compared RR CSV")->required();
  mrr->add_option("--out", rr_args.out, "Report JSON (default: stdout)");
  mrr->add_option("--emit-hist", rr_args.emit_hist, "Write unit histograms to <prefix>_{truth,recon}.csv");
  mrr->add_option("--report", rr_args.report, "Write the per-beat RR comparison table");
  auto* mwf = m->add_subcommand("waveform", "Waveform RMSE");
  mwf->add_option("--truth", wf_args.truth, "Reference CSV")->required();
  mwf->add_option("--recon", wf_args.recon, "Compared CSV")->required();
  mwf->add_option("--channel", wf_args.channel, "Channel of pair CSVs")->capture_default_str();
  mwf->add_option("--out", wf_args.out, "Report JSON (default: stdout)");
  auto* mfd = m->add_subcommand("fd", "Frechet distance over segment features");
  mfd->add_option("--real", fd_args.truth, "Real CSV")->required();
  mfd->add_option("--gen", fd_args.recon, "Generated CSV")->required();
  mfd->add_option("--channel", fd_args.channel, "Channel of pair CSVs")->capture_default_str();
  mfd->add_option("--window", fd_args.window, "Segment length")->capture_default_str();
  mfd->add_option("--overlap", fd_args.overlap, "Segment overlap fraction")->capture_default_str();
  mfd->add_option("--out", fd_args.out, "Report JSON (default: stdout)");

  SpectrogramArgs sp;
  auto* g = app.add_subcommand("spectrogram", "Log-magnitude STFT of one channel");
  g->add_option("--in", sp.in, "Waveform or pair CSV")->required();
  g->add_option("--channel", sp.channel, "Channel of a pair CSV")->capture_default_str();
  g->add_option("--window", sp.opt.window_len, "Window length")->capture_default_str();
  g->add_option("--hop", sp.opt.hop, "Hop length")->capture_default_str();
  g->add_option("--delta", sp.opt.delta, "Log offset")->capture_default_str();
  g->add_option("--out", sp.out, "Output CSV (frames x bins)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (s->parsed()) return cmd_synth(synth, *s);
    if (p->parsed()) return cmd_preprocess(pre);
    if (k->parsed()) return cmd_peaks(pk);
    if (mrr->parsed()) return cmd_metrics_rr(rr_args);
    if (mwf->parsed()) return cmd_metrics_waveform(wf_args);
    if (mfd->parsed()) return cmd_metrics_fd(fd_args);
    if (g->parsed()) return cmd_spectrogram(sp);
  } catch (const InvalidArgument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

}  // namespace pulsesynth::cli
