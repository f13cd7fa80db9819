#include "zfepoch/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

namespace zfepoch {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}
void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, fmt::format("cannot open {}", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

SampledSignal read_wav(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  const std::string name = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::NotWav, fmt::format("{} is not a RIFF/WAVE file", name));
  }

  bool have_fmt = false;
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    const std::uint32_t len = le32(hdr + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (len < 16 || avail < 16) throw Error(ErrorCode::NotWav, "truncated fmt chunk");
      const unsigned char* f = bytes.data() + body;
      format = le16(f);
      channels = le16(f + 2);
      rate = le32(f + 4);
      bits = le16(f + 14);
      if (format == kFormatExtensible && len >= 40 && avail >= 26) {
        format = le16(f + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = std::min<std::size_t>(len, avail);
    }
    pos = body + len + (len & 1u);
  }

  if (!have_fmt || data == nullptr) {
    throw Error(ErrorCode::NotWav, fmt::format("{} lacks fmt or data chunk", name));
  }
  if (format != kFormatPcm || bits != 16) {
    throw Error(ErrorCode::UnsupportedEncoding,
                fmt::format("{}: format tag {} with {} bits; need 16-bit PCM", name, format,
                            bits));
  }
  if (channels == 0) throw Error(ErrorCode::NotWav, "zero channels");
  if (rate == 0) throw Error(ErrorCode::NonPositiveRate, "zero sample rate");
  if (channels > 1) {
    spdlog::warn("{}: {} channels, using channel 0", name, channels);
  }
  const std::size_t frame = 2u * channels;
  const std::size_t frames = data_len / frame;
  if (frames == 0) throw Error(ErrorCode::EmptyAudio, fmt::format("{} has no frames", name));

  std::vector<double> samples(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const auto code = static_cast<std::int16_t>(le16(data + i * frame));
    samples[i] = static_cast<double>(code) / 32768.0;
  }
  return SampledSignal(std::move(samples), static_cast<double>(rate));
}

void write_wav(const SampledSignal& signal, const std::filesystem::path& path) {
  const auto rate = static_cast<std::uint32_t>(std::lround(signal.sample_rate_hz()));
  const auto data_len = static_cast<std::uint32_t>(signal.size() * 2);
  std::string out;
  out.reserve(44 + data_len);
  out += "RIFF";
  put32(out, 36 + data_len);
  out += "WAVEfmt ";
  put32(out, 16);
  put16(out, kFormatPcm);
  put16(out, 1);
  put32(out, rate);
  put32(out, rate * 2);
  put16(out, 2);
  put16(out, 16);
  out += "data";
  put32(out, data_len);
  for (double v : signal.samples()) {
    const double code = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
    put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(code)));
  }
  write_text_file(path, out);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoFailure, fmt::format("cannot write {}", path.string()));
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw Error(ErrorCode::IoFailure, fmt::format("short write to {}", path.string()));
}

std::string format_epochs_csv(const EpochSequence& epochs) {
  std::string out = "time_s\n";
  for (double t : epochs.times_s()) out += fmt::format("{:.6f}\n", t);
  return out;
}

void write_epochs_csv(const EpochSequence& epochs, const std::filesystem::path& path) {
  write_text_file(path, format_epochs_csv(epochs));
}

EpochSequence read_epochs_csv(const std::filesystem::path& path, double source_sample_rate_hz) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, fmt::format("cannot open {}", path.string()));
  std::string line;
  std::vector<double> times;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line == "time_s") continue;
    }
    try {
      std::size_t used = 0;
      times.push_back(std::stod(line, &used));
      if (used != line.size()) throw std::invalid_argument(line);
    } catch (const std::exception&) {
      throw Error(ErrorCode::IoFailure,
                  fmt::format("{}: bad epoch line '{}'", path.string(), line));
    }
  }
  return EpochSequence(std::move(times), source_sample_rate_hz);
}

std::string format_epochs_document(const EpochSequence& epochs, const FilterConfig& config) {
  nlohmann::json j;
  j["method"] = to_string(config.method);
  j["r"] = config.effective_r();
  j["detrend_window_s"] = config.detrend_window_s;
  j["detrend_passes"] = config.detrend_passes;
  j["trim_s"] = config.effective_trim_s();
  j["pre_emphasis"] = config.pre_emphasis;
  j["detector"] = to_string(config.detector);
  j["sample_rate_hz"] = epochs.source_sample_rate_hz();
  j["times_s"] = std::vector<double>(epochs.times_s().begin(), epochs.times_s().end());
  return j.dump(2) + "\n";
}

void write_epochs_document(const EpochSequence& epochs, const FilterConfig& config,
                           const std::filesystem::path& path) {
  write_text_file(path, format_epochs_document(epochs, config));
}

std::string format_score(const SimilarityScore& score, std::span<const std::string> lock_ids,
                         const MatchConfig& cfg) {
  nlohmann::json j;
  j["lock_ids"] = std::vector<std::string>(lock_ids.begin(), lock_ids.end());
  j["per_lock_counts"] = score.per_lock_counts;
  j["per_lock_pairs"] = score.per_lock_pairs;
  j["average"] = score.average;
  j["epsilon_s"] = cfg.epsilon_s;
  j["alignment"] = to_string(cfg.alignment);
  return j.dump(2) + "\n";
}

std::string format_eval_report(const EvalReport& report) {
  nlohmann::json j;
  j["reference_count"] = report.reference_count;
  j["detected_count"] = report.detected_count;
  j["matched_count"] = report.matched_count;
  j["mean_abs_error_s"] = report.mean_abs_error_s;
  j["tolerance_s"] = report.tolerance_s;
  j["recall"] = report.recall();
  return j.dump(2) + "\n";
}

std::string format_frequency_response_csv(const FrequencyResponse& resp) {
  std::string out = "omega,magnitude,phase\n";
  for (std::size_t i = 0; i < resp.omega_rad.size(); ++i) {
    out += fmt::format("{:.17g},{:.17g},{:.17g}\n", resp.omega_rad[i], resp.magnitude[i],
                       resp.phase_rad[i]);
  }
  return out;
}

void write_frequency_response_csv(const FrequencyResponse& resp,
                                  const std::filesystem::path& path) {
  write_text_file(path, format_frequency_response_csv(resp));
}

std::string format_pole_report(const PoleReport& report) {
  nlohmann::json j;
  auto& poles = j["poles"] = nlohmann::json::array();
  for (const Pole& p : report.poles) {
    poles.push_back({{"re", p.location.real()},
                     {"im", p.location.imag()},
                     {"multiplicity", p.multiplicity}});
  }
  j["stable"] = report.stable;
  j["causal"] = report.causal;
  j["phase"] = to_string(report.phase_class);
  j["summary"] = report.summary();
  return j.dump(2) + "\n";
}

}  // namespace zfepoch
