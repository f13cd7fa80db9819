#include "zfepoch/cli.hpp"

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "zfepoch/compare.hpp"
#include "zfepoch/epochs.hpp"
#include "zfepoch/filters.hpp"
#include "zfepoch/io.hpp"
#include "zfepoch/lock.hpp"
#include "zfepoch/synth.hpp"

namespace fs = std::filesystem;

namespace zfepoch::cli {

namespace {

// Thrown for argument combinations CLI11 cannot validate on its own.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FilterOptions {
  std::string method = "zpzfr";
  std::optional<double> r;
  double window_ms = 15.0;
  int passes = 2;
  std::optional<double> trim_ms;
  bool no_preemphasis = false;
  std::string detector = "crossing";

  FilterConfig build() const {
    FilterConfig c = FilterConfig::defaults_for(*parse_method(method));
    if (r) c.r = *r;
    c.detrend_window_s = window_ms / 1000.0;
    c.detrend_passes = passes;
    if (trim_ms) c.trim_s = *trim_ms / 1000.0;
    c.pre_emphasis = !no_preemphasis;
    c.detector = *parse_detector(detector);
    try {
      for (const auto& w : validate_config(c)) spdlog::warn("{}", w);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

void add_filter_options(CLI::App* cmd, FilterOptions& o) {
  cmd->add_option("--method", o.method, "zfr, zff or zpzfr")
      ->check(CLI::IsMember({"zfr", "zff", "zpzfr"}))
      ->capture_default_str();
  cmd->add_option("--r", o.r, "resonator pole radius (zfr, zpzfr)");
  cmd->add_option("--window", o.window_ms, "detrend window in ms")->capture_default_str();
  cmd->add_option("--passes", o.passes, "detrend passes")
      ->check(CLI::Range(1, kMaxDetrendPasses))
      ->capture_default_str();
  cmd->add_option("--trim", o.trim_ms, "samples dropped from each end, in ms (default: window)");
  cmd->add_flag("--no-preemphasis", o.no_preemphasis, "skip the first-difference stage");
  cmd->add_option("--detector", o.detector, "crossing or negpeak")
      ->check(CLI::IsMember({"crossing", "negpeak"}))
      ->capture_default_str();
}

MatchConfig build_match(double epsilon_ms, const std::string& alignment) {
  if (!(epsilon_ms > 0.0)) throw UsageError("--epsilon must be positive");
  return MatchConfig{epsilon_ms / 1000.0, *parse_alignment(alignment)};
}

bool is_csv(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext == ".csv";
}

EpochSequence load_epochs(const fs::path& p, const FilterConfig& config) {
  if (is_csv(p)) return read_epochs_csv(p);
  return extract_epochs(read_wav(p), config);
}

int cmd_extract(const FilterOptions& fo, const fs::path& in, const fs::path& out,
                const std::optional<fs::path>& doc) {
  const FilterConfig config = fo.build();
  const EpochSequence e = extract_epochs(read_wav(in), config);
  write_epochs_csv(e, out);
  if (doc) write_epochs_document(e, config, *doc);
  fmt::print("{} epochs written to {}\n", e.size(), out.string());
  return kExitOk;
}

int cmd_compare(const FilterOptions& fo, const std::vector<fs::path>& locks,
                const fs::path& test, double epsilon_ms, const std::string& alignment,
                const std::optional<fs::path>& json_out) {
  const FilterConfig config = fo.build();
  const MatchConfig match = build_match(epsilon_ms, alignment);
  std::vector<EpochSequence> lock_epochs;
  std::vector<std::string> ids;
  for (const auto& p : locks) {
    lock_epochs.push_back(load_epochs(p, config));
    ids.push_back(p.filename().string());
  }
  const SimilarityScore score = confidence(load_epochs(test, config), lock_epochs, match);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    fmt::print("{}: delta12_count {} compared_pairs {}\n", ids[k], score.per_lock_counts[k],
               score.per_lock_pairs[k]);
  }
  if (ids.size() == 1) {
    fmt::print("delta12_count: {}\ncompared_pairs: {}\n", score.delta12_count,
               score.compared_pairs);
  } else {
    fmt::print("average: {}\n", score.average);
  }
  if (json_out) write_text_file(*json_out, format_score(score, ids, match));
  return kExitOk;
}

int cmd_verify_egg(const FilterOptions& fo, const fs::path& audio, const fs::path& egg,
                   double tolerance_ms, double prominence) {
  if (!(tolerance_ms > 0.0)) throw UsageError("--tolerance must be positive");
  const FilterConfig config = fo.build();
  const SampledSignal a = read_wav(audio);
  const SampledSignal g = read_wav(egg);
  if (a.sample_rate_hz() != g.sample_rate_hz()) {
    throw Error(ErrorCode::SampleRateMismatch, "audio and egg sample rates differ");
  }
  const EvalReport rep =
      evaluate(extract_epochs(a, config), egg_reference_epochs(g, prominence), tolerance_ms / 1000.0);
  fmt::print("{}", format_eval_report(rep));
  return kExitOk;
}

int cmd_analyze(const FilterOptions& fo, std::size_t points, const std::optional<fs::path>& out) {
  const FilterConfig config = fo.build();
  const double r = config.effective_r();
  const FrequencyResponse resp = frequency_response(config.method, r, open_omega_grid(points));
  if (out) {
    write_frequency_response_csv(resp, *out);
  } else {
    fmt::print("{}", format_frequency_response_csv(resp));
  }
  fmt::print("{}", format_pole_report(pole_report(config.method, r)));
  return kExitOk;
}

int cmd_lock(LockConfig config, bool once) {
  if (config.watch_dir.empty()) throw UsageError("--dir (or ZFEPOCH_WATCH_DIR) is required");
  try {
    validate_lock_config(config);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (once) {
    const DecisionRecord rec = run_once(config);
    fmt::print("decision: {}\naverage: {}\n", to_string(rec.decision), rec.score.average);
    return rec.decision == Decision::Open ? kExitOk : kExitClosed;
  }

  LockDaemon daemon(config);
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::jthread worker([&daemon](std::stop_token st) { daemon.run(st); });
  int sig = 0;
  sigwait(&set, &sig);
  spdlog::info("signal {} received, stopping", sig);
  worker.request_stop();
  return kExitOk;
}

int cmd_synth(const std::string& speaker, double duration, std::uint64_t seed, double fs_hz,
              std::optional<double> snr, const fs::path& out, std::optional<fs::path> truth,
              const std::optional<fs::path>& egg_out) {
  SynthSpec spec = speaker_spec(speaker == "A" ? Speaker::A : Speaker::B, duration, seed, fs_hz);
  spec.noise_snr_db = snr;
  SynthResult res = synth_voice(spec);
  const auto xs = res.signal.samples();
  double peak = 0.0;
  for (double v : xs) peak = std::max(peak, std::abs(v));
  std::vector<double> scaled(xs.begin(), xs.end());
  if (peak > 0.0) {
    for (double& v : scaled) v *= 0.5 / peak;
  }
  write_wav(res.signal.with_samples(std::move(scaled)), out);
  if (!truth) truth = fs::path(out).replace_extension(".gci.csv");
  write_epochs_csv(res.gci, *truth);
  if (egg_out) {
    const SampledSignal egg = synth_egg(res.gci, fs_hz, duration);
    std::vector<double> centred(egg.samples().begin(), egg.samples().end());
    for (double& v : centred) v = 0.8 * (v - 0.5);
    write_wav(egg.with_samples(std::move(centred)), *egg_out);
  }
  fmt::print("{} GCIs, {} samples at {} Hz\n", res.gci.size(), res.signal.size(), fs_hz);
  return kExitOk;
}

void init_logging() {
  static const bool done = [] {
    auto logger = spdlog::stderr_color_mt("zfepoch");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%H:%M:%S] [%l] %v");
    return true;
  }();
  (void)done;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  init_logging();
  CLI::App app{"Zero-frequency epoch extraction and delta-based speaker lock"};
  app.require_subcommand(1);

  FilterOptions fo;

  auto* extract = app.add_subcommand("extract", "extract epochs from a WAV file");
  add_filter_options(extract, fo);
  fs::path in;
  fs::path out;
  std::optional<fs::path> doc;
  extract->add_option("--in", in, "input WAV")->required();
  extract->add_option("--out", out, "output epoch CSV")->required();
  extract->add_option("--doc", doc, "also write a JSON document with settings and times");

  auto* compare = app.add_subcommand("compare", "delta12 similarity between epoch sets");
  add_filter_options(compare, fo);
  std::vector<fs::path> locks;
  fs::path test;
  double epsilon_ms = 0.5;
  std::string alignment = "index";
  std::optional<fs::path> json_out;
  compare->add_option("--lock", locks, "lock epochs (.csv) or audio (.wav); repeatable")
      ->required();
  compare->add_option("--test", test, "test epochs (.csv) or audio (.wav)")->required();
  compare->add_option("--epsilon", epsilon_ms, "match tolerance in ms")->capture_default_str();
  compare->add_option("--alignment", alignment, "index or nearest")
      ->check(CLI::IsMember({"index", "nearest"}))
      ->capture_default_str();
  compare->add_option("--json", json_out, "write the score as JSON");

  auto* verify = app.add_subcommand("verify-egg", "score extracted epochs against an EGG");
  add_filter_options(verify, fo);
  fs::path audio;
  fs::path egg;
  double tolerance_ms = 0.25;
  double prominence = kDefaultProminenceFraction;
  verify->add_option("--audio", audio, "speech WAV")->required();
  verify->add_option("--egg", egg, "electroglottograph WAV")->required();
  verify->add_option("--tolerance", tolerance_ms, "match tolerance in ms")->capture_default_str();
  verify->add_option("--prominence", prominence, "EGG peak floor, fraction of the deepest")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  auto* analyze = app.add_subcommand("analyze", "frequency response and pole report");
  add_filter_options(analyze, fo);
  std::size_t points = 512;
  std::optional<fs::path> resp_out;
  analyze->add_option("--points", points, "grid points in (0, pi)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  analyze->add_option("--out", resp_out, "response CSV (omega,magnitude,phase)");

  auto* lock = app.add_subcommand("lock", "voice-lock daemon over a watch directory");
  add_filter_options(lock, fo);
  std::optional<fs::path> dir;
  std::optional<double> threshold;
  bool once = false;
  double poll_s = 1.0;
  int lock_count = 5;
  double lock_eps_ms = 0.5;
  std::string lock_alignment = "index";
  lock->add_option("--dir", dir, "watch directory (env ZFEPOCH_WATCH_DIR)");
  lock->add_option("--threshold", threshold, "open threshold (env ZFEPOCH_THRESHOLD, default 7)");
  lock->add_flag("--once", once, "single key-and-decide cycle; exit 0 open, 3 closed");
  lock->add_option("--poll", poll_s, "poll interval in s")->capture_default_str();
  lock->add_option("--locks", lock_count, "number of lock files")->capture_default_str();
  lock->add_option("--epsilon", lock_eps_ms, "match tolerance in ms")->capture_default_str();
  lock->add_option("--alignment", lock_alignment, "index or nearest")
      ->check(CLI::IsMember({"index", "nearest"}))
      ->capture_default_str();

  auto* synth = app.add_subcommand("synth", "synthetic voice with ground-truth GCIs");
  std::string speaker = "A";
  double duration = 2.0;
  std::uint64_t seed = 0;
  double fs_hz = 16000.0;
  std::optional<double> snr;
  fs::path synth_out;
  std::optional<fs::path> truth;
  std::optional<fs::path> egg_out;
  synth->add_option("--speaker", speaker, "A or B")
      ->check(CLI::IsMember({"A", "B"}))
      ->capture_default_str();
  synth->add_option("--duration", duration, "seconds")->check(CLI::NonNegativeNumber)->capture_default_str();
  synth->add_option("--seed", seed, "jitter/noise seed")->capture_default_str();
  synth->add_option("--fs", fs_hz, "sample rate in Hz")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--snr", snr, "add white noise at this SNR in dB");
  synth->add_option("--out", synth_out, "output WAV")->required();
  synth->add_option("--truth", truth, "ground-truth CSV (default: <out>.gci.csv)");
  synth->add_option("--egg", egg_out, "also write a synthetic EGG WAV");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e);
      return kExitOk;
    }
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (extract->parsed()) return cmd_extract(fo, in, out, doc);
    if (compare->parsed()) {
      return cmd_compare(fo, locks, test, epsilon_ms, alignment, json_out);
    }
    if (verify->parsed()) return cmd_verify_egg(fo, audio, egg, tolerance_ms, prominence);
    if (analyze->parsed()) return cmd_analyze(fo, points, resp_out);
    if (lock->parsed()) {
      LockConfig cfg;
      apply_env_overrides(cfg);
      if (dir) cfg.watch_dir = *dir;
      if (threshold) cfg.threshold = *threshold;
      cfg.poll_interval_s = poll_s;
      cfg.lock_file_count = lock_count;
      cfg.method = fo.build();
      cfg.match = build_match(lock_eps_ms, lock_alignment);
      return cmd_lock(std::move(cfg), once);
    }
    if (synth->parsed()) {
      return cmd_synth(speaker, duration, seed, fs_hz, snr, synth_out, truth, egg_out);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitProcessing;
  }
  return kExitUsage;
}

}  // namespace zfepoch::cli
