#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "zfepoch/compare.hpp"
#include "zfepoch/core.hpp"
#include "zfepoch/epochs.hpp"
#include "zfepoch/filters.hpp"

namespace zfepoch {

// 16-bit PCM WAV. Samples are scaled by 1/32768, so -32768 -> -1.0 and
// 32767 -> 32767/32768. Multi-channel files yield channel 0 with a warning.
// Throws NotWav, UnsupportedEncoding, EmptyAudio, IoFailure.
SampledSignal read_wav(const std::filesystem::path& path);

// Mono 16-bit PCM; samples are rounded to the nearest code and clipped to
// [-32768, 32767]. The sample rate is rounded to an integer.
void write_wav(const SampledSignal& signal, const std::filesystem::path& path);

// "time_s" header and one time per line with 6 decimals.
void write_epochs_csv(const EpochSequence& epochs, const std::filesystem::path& path);
EpochSequence read_epochs_csv(const std::filesystem::path& path,
                              double source_sample_rate_hz = 16000.0);
std::string format_epochs_csv(const EpochSequence& epochs);

// JSON document carrying the extraction settings alongside the times.
std::string format_epochs_document(const EpochSequence& epochs, const FilterConfig& config);
void write_epochs_document(const EpochSequence& epochs, const FilterConfig& config,
                           const std::filesystem::path& path);

std::string format_score(const SimilarityScore& score, std::span<const std::string> lock_ids,
                         const MatchConfig& cfg);

std::string format_eval_report(const EvalReport& report);

// Columns omega,magnitude,phase.
std::string format_frequency_response_csv(const FrequencyResponse& resp);
void write_frequency_response_csv(const FrequencyResponse& resp,
                                  const std::filesystem::path& path);

std::string format_pole_report(const PoleReport& report);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace zfepoch
