#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "zfepoch/core.hpp"

namespace zfepoch {

struct PitchPoint {
  double time_s = 0.0;
  double f0_hz = 100.0;
};

struct Formant {
  double frequency_hz = 500.0;
  double bandwidth_hz = 100.0;
};

// Replaces the formant set from `time_s` on.
struct FormantSwitch {
  double time_s = 0.0;
  std::vector<Formant> formants;
};

struct SynthSpec {
  double sample_rate_hz = 16000.0;
  double duration_s = 1.0;
  // Piecewise linear f0(t), held constant outside the first/last point.
  std::vector<PitchPoint> pitch_contour{{0.0, 100.0}};
  // Each period is scaled by (1 + jitter_fraction * u), u ~ U[-1, 1].
  double jitter_fraction = 0.0;
  std::vector<Formant> formants;
  std::optional<FormantSwitch> formant_switch;
  std::optional<double> noise_snr_db;
  std::uint64_t seed = 0;
  // Glottal closure shows up as a negative spike in the differentiated flow.
  double excitation_amplitude = -1.0;
};

// Throws BadSpec.
void validate_spec(const SynthSpec& spec);

struct SynthResult {
  SampledSignal signal;
  EpochSequence gci;
};

/// Impulses at the samples nearest to each glottal closure instant; GCIs are
/// the times where the integrated f0 contour (plus jitter) reaches successive
/// whole periods, starting at t = 0.
SynthResult impulse_train(const SynthSpec& spec);

/// impulse_train through the formant resonator cascade, plus optional white
/// Gaussian noise at the requested SNR. Ground truth is unchanged.
SynthResult synth_voice(const SynthSpec& spec);

/// Sawtooth-like electroglottograph: a slow rise over each period and a sharp
/// fall at every GCI.
SampledSignal synth_egg(const EpochSequence& gci, double sample_rate_hz, double duration_s);

enum class Speaker { A, B };

// Two fixed proxy speakers: A around 110 Hz, B around 190 Hz, one formant
// each. The contour scales with duration so equal-length utterances align.
SynthSpec speaker_spec(Speaker speaker, double duration_s, std::uint64_t seed,
                       double sample_rate_hz = 16000.0);

}  // namespace zfepoch
