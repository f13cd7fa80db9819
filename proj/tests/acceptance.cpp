// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "oracles.hpp"
#include "zfepoch/compare.hpp"
#include "zfepoch/epochs.hpp"
#include "zfepoch/filters.hpp"
#include "zfepoch/io.hpp"
#include "zfepoch/lock.hpp"
#include "zfepoch/synth.hpp"

using namespace zfepoch;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> vec(const SampledSignal& s) { return {s.samples().begin(), s.samples().end()}; }

Outcome impulse_responses() {
  const auto t0 = Clock::now();
  std::vector<double> x(101, 0.0);
  x[0] = 1.0;
  const SampledSignal imp(x, 16000.0);
  double worst_zff = 0.0;
  const auto zff = vec(cascaded_resonator(imp, 1.0, 2));
  for (std::size_t n = 0; n <= 100; ++n) {
    const double want = oracle::quad_pole_impulse(n, 1.0);
    worst_zff = std::max(worst_zff, std::abs(zff[n] - want) / want);
  }
  double worst_single = 0.0;
  for (double r : {0.5, 0.95, 0.99}) {
    const auto y = vec(cascaded_resonator(imp, r, 1));
    for (std::size_t n = 0; n <= 100; ++n) {
      const double want = oracle::double_pole_impulse(n, r);
      worst_single = std::max(worst_single, std::abs(y[n] - want) / want);
    }
  }
  const double dt = seconds_since(t0);
  return {worst_zff <= 1e-12 && worst_single <= 1e-12 && dt < 1.0,
          fmt::format("C(n+3,3) rel err {:.2e}, (n+1)r^n rel err {:.2e}, {:.3f} s", worst_zff,
                      worst_single, dt)};
}

Outcome pole_table() {
  const std::string zfr = pole_report(Method::ZFR, 0.97).summary();
  const std::string zff = pole_report(Method::ZFF, 0.97).summary();
  const std::string zp = pole_report(Method::ZPZFR, 0.97).summary();
  const bool ok = zfr == "Causal & Non-linear & Stable" && zff == "Causal & Linear & Unstable" &&
                  zp == "Non-causal & Linear (Zero Phase) & Stable";
  return {ok, fmt::format("ZFR '{}', ZFF '{}', ZP-ZFR '{}'", zfr, zff, zp)};
}

Outcome phase_claims() {
  const auto t0 = Clock::now();
  const auto grid = open_omega_grid(512);
  const auto zp = frequency_response(Method::ZPZFR, 0.97, grid);
  double zp_max = 0.0;
  for (double p : zp.phase_rad) zp_max = std::max(zp_max, std::abs(p));
  const auto zff = frequency_response(Method::ZFF, 1.0, grid);
  const double zff_res = oracle::max_line_residual(grid, zff.phase_rad);
  const auto zfr = frequency_response(Method::ZFR, 0.97, grid);
  const double zfr_res = oracle::max_line_residual(grid, zfr.phase_rad);
  const double dt = seconds_since(t0);
  return {zp_max <= 1e-12 && zff_res <= 1e-9 && zfr_res > 0.1 && dt < 1.0,
          fmt::format("ZP-ZFR max |phase| {:.1e}, ZFF fit residual {:.1e}, ZFR fit residual "
                      "{:.3f} rad, {:.3f} s",
                      zp_max, zff_res, zfr_res, dt)};
}

// Ground truth inside the span a trimmed output can cover.
EpochSequence detectable(const EpochSequence& gci, double duration_s) {
  std::vector<double> t;
  for (double v : gci.times_s()) {
    if (v >= 0.02 && v <= duration_s - 0.02) t.push_back(v);
  }
  return EpochSequence(std::move(t), gci.source_sample_rate_hz());
}

Outcome detection_accuracy() {
  const double dur = 10.0;
  SynthSpec clean = speaker_spec(Speaker::A, dur, 1);
  SynthSpec noisy = clean;
  noisy.noise_snr_db = 20.0;
  const SynthResult c = synth_voice(clean);
  const SynthResult n = synth_voice(noisy);
  const EpochSequence ref_c = detectable(c.gci, dur);
  const EpochSequence ref_n = detectable(n.gci, dur);

  bool ok = true;
  std::string detail;
  double zp_err = 0.0;
  for (Method m : {Method::ZFF, Method::ZPZFR}) {
    const FilterConfig cfg = FilterConfig::defaults_for(m);
    const auto t0 = Clock::now();
    const auto det_c = extract_epochs(c.signal, cfg);
    const double dt = seconds_since(t0);
    const auto det_n = extract_epochs(n.signal, cfg);
    const EvalReport rc = evaluate(det_c, ref_c, 0.00025);
    const EvalReport rn = evaluate(det_n, ref_n, 0.0005);
    ok = ok && rc.recall() >= 0.95 && rn.recall() >= 0.90 && dt < 5.0;
    detail += fmt::format("{} clean {:.1f}% @0.25ms, 20dB {:.1f}% @0.5ms, {:.2f} s; ",
                          to_string(m), 100 * rc.recall(), 100 * rn.recall(), dt);
  }
  // Timing contrast: score within half the shortest pitch period so the
  // phase-shifted ZFR crossings still pair with their own closures.
  const double half_period = 0.5 / 118.0;
  const EvalReport zp = evaluate(extract_epochs(c.signal, FilterConfig::defaults_for(Method::ZPZFR)),
                                 ref_c, half_period);
  const auto t0 = Clock::now();
  const auto zfr_det = extract_epochs(c.signal, FilterConfig::defaults_for(Method::ZFR));
  const double dt_zfr = seconds_since(t0);
  const EvalReport zfr = evaluate(zfr_det, ref_c, half_period);
  zp_err = zp.mean_abs_error_s;
  ok = ok && zfr.mean_abs_error_s > zp_err && zfr.matched_count > 0 && dt_zfr < 5.0;
  detail += fmt::format("mean |err| ZFR {:.3f} ms vs ZP-ZFR {:.4f} ms", 1e3 * zfr.mean_abs_error_s,
                        1e3 * zp_err);
  return {ok, detail};
}

Outcome self_comparison() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> len(0, 300);
  int bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const EpochSequence e(oracle::random_increasing_times(rng, len(rng)), 16000.0);
    const DeltaSequence d = deltas(e);
    for (Alignment al : {Alignment::Index, Alignment::Nearest}) {
      if (delta12_count(d, d, {0.0005, al}).delta12_count != d.size()) ++bad;
    }
  }
  return {bad == 0, fmt::format("100 random sequences, {} mismatches (index and nearest)", bad)};
}

Outcome speaker_contrast() {
  const double dur = 2.0;
  const FilterConfig cfg = FilterConfig::defaults_for(Method::ZPZFR);
  int passed = 0;
  double min_a = 1e300;
  double max_b = 0.0;
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    std::vector<EpochSequence> locks;
    for (std::uint64_t k = 0; k < 5; ++k) {
      locks.push_back(extract_epochs(synth_voice(speaker_spec(Speaker::A, dur, 1000 * trial + k)).signal, cfg));
    }
    const auto a = extract_epochs(synth_voice(speaker_spec(Speaker::A, dur, 1000 * trial + 500)).signal, cfg);
    const auto b = extract_epochs(synth_voice(speaker_spec(Speaker::B, dur, 1000 * trial + 501)).signal, cfg);
    const double ca = confidence(a, locks).average;
    const double cb = confidence(b, locks).average;
    min_a = std::min(min_a, ca);
    max_b = std::max(max_b, cb);
    if (ca >= 2.0 * cb && ca > 0.0) ++passed;
  }
  return {passed == 10, fmt::format("{}/10 trials; min A-test avg {:.2f}, max B-test avg {:.2f}",
                                    passed, min_a, max_b)};
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("zfepoch_accept_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Writes next to the target, then renames, so the daemon never sees a
// partly written file.
void deposit(const SampledSignal& s, const fs::path& target) {
  const fs::path tmp = target.parent_path() / (".incoming_" + target.filename().string());
  write_wav(s, tmp);
  fs::rename(tmp, target);
}

bool wait_for(const std::function<bool()>& cond, double timeout_s) {
  const auto t0 = Clock::now();
  while (!cond()) {
    if (seconds_since(t0) > timeout_s) return false;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  return true;
}

Outcome lock_protocol() {
  TempDir tmp;
  LockConfig cfg;
  cfg.watch_dir = tmp.path;
  cfg.poll_interval_s = 0.25;
  const double budget = 2.0 * cfg.poll_interval_s;

  for (int i = 1; i <= 5; ++i) {
    deposit(synth_voice(speaker_spec(Speaker::A, 1.0, static_cast<std::uint64_t>(i))).signal,
            lock_file_path(cfg, i));
  }
  const SampledSignal a_test = synth_voice(speaker_spec(Speaker::A, 1.0, 77)).signal;
  const SampledSignal b_test = synth_voice(speaker_spec(Speaker::B, 1.0, 78)).signal;

  LockDaemon daemon(cfg);
  std::jthread worker([&daemon](std::stop_token st) { daemon.run(st); });
  const bool keyed = wait_for([&] { return daemon.phase() == LockPhase::Keyed; }, 5.0);

  const auto open_path = signal_file_path(cfg, Decision::Open);
  const auto closed_path = signal_file_path(cfg, Decision::Closed);
  const auto test_path = test_file_path(cfg);

  auto t0 = Clock::now();
  deposit(a_test, test_path);
  const bool opened = wait_for([&] { return fs::exists(open_path) && !fs::exists(test_path); }, 5.0);
  const double t_open = seconds_since(t0);

  t0 = Clock::now();
  deposit(b_test, test_path);
  const bool closed = wait_for(
      [&] { return fs::exists(closed_path) && !fs::exists(open_path) && !fs::exists(test_path); }, 5.0);
  const double t_closed = seconds_since(t0);

  fs::remove(lock_file_path(cfg, 4));
  const bool reset = wait_for([&] { return daemon.phase() == LockPhase::WaitingForLocks; }, 5.0);
  worker.request_stop();
  worker.join();

  SimilarityScore zero;
  zero.average = 0.0;
  const bool zero_closed = decide(zero, 0.0) == Decision::Closed;

  const bool ok = keyed && opened && t_open <= budget && closed && t_closed <= budget && reset &&
                  zero_closed;
  return {ok, fmt::format("keyed {}, A->\"1\" in {:.3f} s, B->\"0\" in {:.3f} s (budget {:.2f} s), "
                          "reset {}, avg 0 @ threshold 0 closed {}",
                          keyed, t_open, t_closed, budget, reset, zero_closed)};
}

Outcome zero_phase_symmetry() {
  std::mt19937_64 rng(8);
  // Palindrome with an odd centre sample.
  auto half = oracle::random_signal(rng, 4000);
  std::vector<double> x(half);
  x.push_back(0.3);
  x.insert(x.end(), half.rbegin(), half.rend());

  double worst_plain = 0.0;
  double worst_diff = 0.0;
  for (bool pre : {false, true}) {
    FilterConfig cfg = FilterConfig::defaults_for(Method::ZPZFR);
    cfg.pre_emphasis = pre;
    const auto y = vec(zpzfr_pipeline(SampledSignal(x, 16000.0), cfg));
    // The first difference of a palindrome is an anti-palindrome, which the
    // zero-phase stage preserves.
    const double sign = pre ? -1.0 : 1.0;
    const double peak = oracle::max_abs(y);
    double worst = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      worst = std::max(worst, std::abs(y[i] - sign * y[y.size() - 1 - i]));
    }
    (pre ? worst_diff : worst_plain) = worst / peak;
  }
  return {worst_plain <= 1e-9 && worst_diff <= 1e-9,
          fmt::format("palindrome max asymmetry {:.1e} of peak; with first difference, "
                      "anti-symmetry residual {:.1e} of peak",
                      worst_plain, worst_diff)};
}

Outcome invariant_suites() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> level(-100.0, 100.0);
  std::uniform_int_distribution<std::size_t> len(300, 3000);
  double worst_const = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double c = level(rng);
    const auto y = vec(detrend(SampledSignal(std::vector<double>(len(rng), c), 16000.0), 0.015));
    worst_const = std::max(worst_const, oracle::max_abs(y) / std::abs(c));
  }

  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  double worst_lin = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 8000;
    const auto x = oracle::random_signal(rng, n);
    const auto y = oracle::random_signal(rng, n);
    const double a = coef(rng);
    const double b = coef(rng);
    std::vector<double> mix(n);
    for (std::size_t i = 0; i < n; ++i) mix[i] = a * x[i] + b * y[i];
    for (Method m : {Method::ZFR, Method::ZFF, Method::ZPZFR}) {
      const FilterConfig cfg = FilterConfig::defaults_for(m);
      const auto px = vec(run_pipeline(SampledSignal(x, 16000.0), cfg));
      const auto py = vec(run_pipeline(SampledSignal(y, 16000.0), cfg));
      const auto pm = vec(run_pipeline(SampledSignal(mix, 16000.0), cfg));
      double scale = 0.0;
      double err = 0.0;
      for (std::size_t i = 0; i < px.size(); ++i) {
        const double lin = a * px[i] + b * py[i];
        scale = std::max(scale, std::abs(lin));
        err = std::max(err, std::abs(pm[i] - lin));
      }
      worst_lin = std::max(worst_lin, err / scale);
    }
  }
  return {worst_const <= 1e-12 && worst_lin <= 1e-9,
          fmt::format("constant->zero worst {:.1e} (50 signals); linearity worst {:.1e} relative "
                      "(50 signals x 3 pipelines)",
                      worst_const, worst_lin)};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::off);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"closed-form impulse responses", impulse_responses},
      {"pole/stability table", pole_table},
      {"phase claims", phase_claims},
      {"oracle detection accuracy", detection_accuracy},
      {"self-comparison maximum", self_comparison},
      {"speaker-differentiation contrast", speaker_contrast},
      {"lock protocol end-to-end", lock_protocol},
      {"zero-phase symmetry", zero_phase_symmetry},
      {"detrend and linearity invariants", invariant_suites},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    failures += o.pass ? 0 : 1;
    fmt::print("{} {}. {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{}/{} criteria passed\n", criteria.size() - static_cast<std::size_t>(failures),
             criteria.size());
  return failures == 0 ? 0 : 1;
}
