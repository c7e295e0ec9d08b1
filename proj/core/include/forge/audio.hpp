#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "forge/common.hpp"
#include "forge/rng.hpp"

namespace forge {

// Mono sample buffer. Samples are doubles in [-1, 1] after any step that
// declares normalization; intermediate processing may exceed unity.
struct AudioClip {
    std::vector<double> samples;
    int sample_rate = 0;
    std::string source_id;  // empty = unset

    double duration_s() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

// Frame-level RMS envelope. Frame k covers [k*hop_s, k*hop_s + window_s);
// frame count = ceil(duration / hop_s), zero-padded at the tail.
struct ActivityMap {
    std::vector<double> frame_values;
    double hop_s = 0.0;
    double window_s = 0.0;
};

struct ReverbSpec {
    double decay_s = 0.0;   // RT60-style decay constant
    double wet_mix = 0.0;   // [0, 1]
};

struct AugmentationSpec {
    double gain_db = 0.0;
    double fade_in_s = 0.0;
    double fade_out_s = 0.0;
    double distortion_drive = 0.0;  // 0 = bypass
    std::optional<ReverbSpec> reverb;
};

// Throws DataError when the spec violates its invariants for a clip of the
// given duration (negative fades, fades longer than the clip, wet outside
// [0,1], negative drive/decay).
void validate_augmentation(const AugmentationSpec& spec, double clip_duration_s);

// --- WAV I/O (RIFF, little-endian) ------------------------------------------

// Reads PCM 16/24-bit integer or 32-bit float WAV. Multichannel input is
// downmixed to mono by channel mean; integer samples are scaled to [-1, 1].
AudioClip load_wav(const std::filesystem::path& path);

// Loads and, when the file's rate differs, linearly resamples to target_rate.
AudioClip load_wav_resampled(const std::filesystem::path& path, int target_rate);

void save_wav_int16(const AudioClip& clip, const std::filesystem::path& path);
void save_wav_float32(const AudioClip& clip, const std::filesystem::path& path);

// In-memory 16-bit encoding, used to ship audio to remote scorers.
std::vector<std::uint8_t> encode_wav_int16(const AudioClip& clip);

AudioClip resample_linear(const AudioClip& clip, int target_rate);

// --- Signal operations -------------------------------------------------------

// Applies, in order: gain, linear fade-in/out ramps, tanh distortion
// (y = tanh(drive*x)/tanh(drive)), then reverb as convolution with an
// exponentially decaying noise impulse response drawn from rng (wet/dry
// blend). Output length grows by the reverb tail. Identity spec returns a
// bit-identical copy.
AudioClip process_audio(const AudioClip& clip, const AugmentationSpec& spec, Rng& rng);

struct Placement {
    AudioClip clip;
    double offset_s = 0.0;
    double gain_db = 0.0;
};

struct MixResult {
    AudioClip mix;
    double normalization_gain = 1.0;  // 1/peak when the raw sum clipped, else 1
};

// Sample-wise sum of gained, offset clips over a zero buffer of duration_s.
// Overhang past the scene end is truncated. If the raw peak exceeds 1.0 the
// whole mixture is rescaled by 1/peak and that factor reported.
MixResult place_and_mix(const std::vector<Placement>& placements, double duration_s);

// RMS activity map; value_k = sqrt(mean(x^2)) over frame k's window.
ActivityMap compute_rms(const AudioClip& clip, double window_s = 0.05, double hop_s = 0.01);

}  // namespace forge
