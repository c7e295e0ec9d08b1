#include "forge/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "forge/fft.hpp"

namespace forge {

namespace {

constexpr double kInt16Scale = 32768.0;
constexpr double kInt24Scale = 8388608.0;

double db_to_linear(double db) { return std::pow(10.0, db / 20.0); }

std::int64_t samples_at(double seconds, int rate) {
    return std::llround(seconds * static_cast<double>(rate));
}

// --- little-endian helpers ---

std::uint32_t read_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void push_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

void push_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
}

void push_tag(std::vector<std::uint8_t>& out, const char* tag) {
    out.insert(out.end(), tag, tag + 4);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open file for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("short write: " + path.string());
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip, bool float32) {
    if (clip.sample_rate <= 0) throw DataError("clip has no sample rate");
    const std::uint16_t format = float32 ? 3 : 1;
    const std::uint16_t bits = float32 ? 32 : 16;
    const std::uint16_t block_align = static_cast<std::uint16_t>(bits / 8);
    const std::uint32_t data_size = static_cast<std::uint32_t>(clip.samples.size() * block_align);

    std::vector<std::uint8_t> out;
    out.reserve(64 + data_size);
    push_tag(out, "RIFF");
    push_u32(out, 0);  // patched below
    push_tag(out, "WAVE");
    push_tag(out, "fmt ");
    push_u32(out, 16);
    push_u16(out, format);
    push_u16(out, 1);  // mono
    push_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
    push_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * block_align);
    push_u16(out, block_align);
    push_u16(out, bits);
    if (float32) {
        push_tag(out, "fact");
        push_u32(out, 4);
        push_u32(out, static_cast<std::uint32_t>(clip.samples.size()));
    }
    push_tag(out, "data");
    push_u32(out, data_size);
    for (double s : clip.samples) {
        const double x = std::clamp(s, -1.0, 1.0);
        if (float32) {
            const float f = static_cast<float>(x);
            std::uint32_t u;
            std::memcpy(&u, &f, 4);
            push_u32(out, u);
        } else {
            const auto v = static_cast<std::int16_t>(std::llround(x * 32767.0));
            push_u16(out, static_cast<std::uint16_t>(v));
        }
    }
    const std::uint32_t riff_size = static_cast<std::uint32_t>(out.size() - 8);
    out[4] = static_cast<std::uint8_t>(riff_size & 0xff);
    out[5] = static_cast<std::uint8_t>((riff_size >> 8) & 0xff);
    out[6] = static_cast<std::uint8_t>((riff_size >> 16) & 0xff);
    out[7] = static_cast<std::uint8_t>((riff_size >> 24) & 0xff);
    return out;
}

}  // namespace

void validate_augmentation(const AugmentationSpec& spec, double clip_duration_s) {
    if (spec.fade_in_s < 0.0 || spec.fade_out_s < 0.0) {
        throw DataError("fade durations must be non-negative");
    }
    if (spec.fade_in_s + spec.fade_out_s > clip_duration_s + 1e-9) {
        throw DataError("fade_in_s + fade_out_s exceeds clip duration");
    }
    if (spec.distortion_drive < 0.0) throw DataError("distortion_drive must be >= 0");
    if (spec.reverb) {
        if (spec.reverb->decay_s <= 0.0) throw DataError("reverb decay_s must be > 0");
        if (spec.reverb->wet_mix < 0.0 || spec.reverb->wet_mix > 1.0) {
            throw DataError("reverb wet_mix must be in [0, 1]");
        }
    }
}

AudioClip load_wav(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = read_file(path);
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw DataError("not a RIFF/WAVE file: " + path.string());
    }

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    const std::uint8_t* data = nullptr;
    std::size_t data_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const char* tag = reinterpret_cast<const char*>(bytes.data() + pos);
        const std::uint32_t chunk_size = read_u32(bytes.data() + pos + 4);
        const std::size_t body = pos + 8;
        if (body + chunk_size > bytes.size()) break;
        if (std::memcmp(tag, "fmt ", 4) == 0 && chunk_size >= 16) {
            format = read_u16(bytes.data() + body);
            channels = read_u16(bytes.data() + body + 2);
            rate = read_u32(bytes.data() + body + 4);
            bits = read_u16(bytes.data() + body + 14);
            if (format == 0xFFFE && chunk_size >= 40) {
                // WAVE_FORMAT_EXTENSIBLE: first two bytes of the SubFormat
                // GUID carry the actual format code.
                format = read_u16(bytes.data() + body + 24);
            }
        } else if (std::memcmp(tag, "data", 4) == 0) {
            data = bytes.data() + body;
            data_size = chunk_size;
        }
        pos = body + chunk_size + (chunk_size & 1);  // chunks are 2-byte aligned
    }

    if (rate == 0 || channels == 0) throw DataError("missing fmt chunk: " + path.string());
    if (data == nullptr) throw DataError("missing data chunk: " + path.string());

    const bool pcm16 = format == 1 && bits == 16;
    const bool pcm24 = format == 1 && bits == 24;
    const bool f32 = format == 3 && bits == 32;
    if (!pcm16 && !pcm24 && !f32) {
        throw DataError("unsupported WAV codec (format " + std::to_string(format) + ", " +
                        std::to_string(bits) + "-bit): " + path.string());
    }

    const std::size_t bytes_per_sample = bits / 8;
    const std::size_t frame_size = bytes_per_sample * channels;
    const std::size_t frames = frame_size > 0 ? data_size / frame_size : 0;
    if (frames == 0) throw DataError("zero-length audio: " + path.string());

    AudioClip clip;
    clip.sample_rate = static_cast<int>(rate);
    clip.samples.resize(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
            const std::uint8_t* p = data + i * frame_size + c * bytes_per_sample;
            if (pcm16) {
                const auto v = static_cast<std::int16_t>(read_u16(p));
                acc += static_cast<double>(v) / kInt16Scale;
            } else if (pcm24) {
                std::int32_t v = static_cast<std::int32_t>(p[0]) |
                                 (static_cast<std::int32_t>(p[1]) << 8) |
                                 (static_cast<std::int32_t>(p[2]) << 16);
                if (v & 0x800000) v |= ~0xFFFFFF;  // sign-extend
                acc += static_cast<double>(v) / kInt24Scale;
            } else {
                float f;
                std::memcpy(&f, p, 4);
                acc += std::clamp(static_cast<double>(f), -1.0, 1.0);
            }
        }
        clip.samples[i] = acc / static_cast<double>(channels);
    }
    return clip;
}

AudioClip load_wav_resampled(const std::filesystem::path& path, int target_rate) {
    AudioClip clip = load_wav(path);
    if (clip.sample_rate != target_rate) clip = resample_linear(clip, target_rate);
    return clip;
}

void save_wav_int16(const AudioClip& clip, const std::filesystem::path& path) {
    write_file(path, encode_wav(clip, false));
}

void save_wav_float32(const AudioClip& clip, const std::filesystem::path& path) {
    write_file(path, encode_wav(clip, true));
}

std::vector<std::uint8_t> encode_wav_int16(const AudioClip& clip) {
    return encode_wav(clip, false);
}

AudioClip resample_linear(const AudioClip& clip, int target_rate) {
    if (target_rate <= 0) throw DataError("target sample rate must be > 0");
    if (clip.sample_rate == target_rate || clip.samples.empty()) {
        AudioClip out = clip;
        out.sample_rate = target_rate;
        return out;
    }
    const double ratio = static_cast<double>(clip.sample_rate) / target_rate;
    const std::size_t n_out = static_cast<std::size_t>(std::llround(
        static_cast<double>(clip.samples.size()) * target_rate / clip.sample_rate));
    AudioClip out;
    out.sample_rate = target_rate;
    out.source_id = clip.source_id;
    out.samples.resize(n_out);
    const std::size_t last = clip.samples.size() - 1;
    for (std::size_t i = 0; i < n_out; ++i) {
        const double pos = static_cast<double>(i) * ratio;
        const std::size_t i0 = std::min(static_cast<std::size_t>(pos), last);
        const std::size_t i1 = std::min(i0 + 1, last);
        const double frac = pos - static_cast<double>(i0);
        out.samples[i] = clip.samples[i0] * (1.0 - frac) + clip.samples[i1] * frac;
    }
    return out;
}

AudioClip process_audio(const AudioClip& clip, const AugmentationSpec& spec, Rng& rng) {
    validate_augmentation(spec, clip.duration_s());
    AudioClip out = clip;

    if (spec.gain_db != 0.0) {
        const double g = db_to_linear(spec.gain_db);
        for (double& s : out.samples) s *= g;
    }

    const std::int64_t n = static_cast<std::int64_t>(out.samples.size());
    const std::int64_t n_in = std::min<std::int64_t>(samples_at(spec.fade_in_s, out.sample_rate), n);
    if (n_in > 0) {
        for (std::int64_t i = 0; i < n_in; ++i) {
            out.samples[i] *= static_cast<double>(i) / static_cast<double>(n_in);
        }
    }
    const std::int64_t n_out =
        std::min<std::int64_t>(samples_at(spec.fade_out_s, out.sample_rate), n);
    if (n_out > 0) {
        for (std::int64_t i = n - n_out; i < n; ++i) {
            out.samples[i] *= static_cast<double>(n - i) / static_cast<double>(n_out);
        }
    }

    if (spec.distortion_drive > 0.0) {
        const double norm = std::tanh(spec.distortion_drive);
        for (double& s : out.samples) s = std::tanh(spec.distortion_drive * s) / norm;
    }

    if (spec.reverb && spec.reverb->wet_mix > 0.0) {
        const std::int64_t ir_len =
            std::max<std::int64_t>(1, samples_at(3.0 * spec.reverb->decay_s, out.sample_rate));
        std::vector<double> ir(static_cast<std::size_t>(ir_len));
        double energy = 0.0;
        for (std::int64_t k = 0; k < ir_len; ++k) {
            const double t = static_cast<double>(k) / out.sample_rate;
            const double env = std::exp(-6.91 * t / spec.reverb->decay_s);
            const double noise = rng.uniform(-1.0, 1.0);
            ir[static_cast<std::size_t>(k)] = noise * env;
            energy += ir[static_cast<std::size_t>(k)] * ir[static_cast<std::size_t>(k)];
        }
        if (energy > 0.0) {
            const double inv = 1.0 / std::sqrt(energy);
            for (double& v : ir) v *= inv;
        }
        const std::vector<double> wet = convolve(out.samples, ir);
        const double w = spec.reverb->wet_mix;
        std::vector<double> mixed(wet.size(), 0.0);
        for (std::size_t i = 0; i < wet.size(); ++i) {
            const double dry = i < out.samples.size() ? out.samples[i] : 0.0;
            mixed[i] = (1.0 - w) * dry + w * wet[i];
        }
        out.samples = std::move(mixed);
    }

    return out;
}

MixResult place_and_mix(const std::vector<Placement>& placements, double duration_s) {
    if (duration_s <= 0.0) throw DataError("mix duration must be > 0");
    int rate = 0;
    for (const Placement& p : placements) {
        if (p.offset_s < 0.0) throw DataError("negative placement offset");
        if (rate == 0) {
            rate = p.clip.sample_rate;
        } else if (p.clip.sample_rate != rate) {
            throw DataError("mismatched sample rates in mix");
        }
    }
    if (rate == 0) throw DataError("nothing to mix");

    const std::size_t n = static_cast<std::size_t>(samples_at(duration_s, rate));
    AudioClip mix;
    mix.sample_rate = rate;
    mix.samples.assign(n, 0.0);

    for (const Placement& p : placements) {
        const double g = db_to_linear(p.gain_db);
        const std::size_t start = static_cast<std::size_t>(samples_at(p.offset_s, rate));
        for (std::size_t i = 0; i < p.clip.samples.size(); ++i) {
            const std::size_t idx = start + i;
            if (idx >= n) break;  // overhang truncated at scene end
            mix.samples[idx] += g * p.clip.samples[i];
        }
    }

    double peak = 0.0;
    for (double s : mix.samples) peak = std::max(peak, std::abs(s));

    MixResult result;
    result.normalization_gain = 1.0;
    if (peak > 1.0) {
        result.normalization_gain = 1.0 / peak;
        for (double& s : mix.samples) s *= result.normalization_gain;
    }
    result.mix = std::move(mix);
    return result;
}

ActivityMap compute_rms(const AudioClip& clip, double window_s, double hop_s) {
    if (clip.samples.empty()) throw DataError("cannot compute RMS of an empty clip");
    if (hop_s <= 0.0 || window_s < hop_s) {
        throw DataError("compute_rms requires window_s >= hop_s > 0");
    }
    const std::size_t hop = static_cast<std::size_t>(
        std::max<std::int64_t>(1, samples_at(hop_s, clip.sample_rate)));
    const std::size_t window = static_cast<std::size_t>(
        std::max<std::int64_t>(1, samples_at(window_s, clip.sample_rate)));
    const std::size_t n = clip.samples.size();
    const std::size_t frames = (n + hop - 1) / hop;

    ActivityMap map;
    map.hop_s = hop_s;
    map.window_s = window_s;
    map.frame_values.resize(frames);
    for (std::size_t k = 0; k < frames; ++k) {
        const std::size_t begin = k * hop;
        const std::size_t end = std::min(begin + window, n);
        double acc = 0.0;
        for (std::size_t i = begin; i < end; ++i) acc += clip.samples[i] * clip.samples[i];
        // Tail frames keep the full window in the denominator (zero padding).
        map.frame_values[k] = std::sqrt(acc / static_cast<double>(window));
    }
    return map;
}

}  // namespace forge
