#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace forge {

// SplitMix64 finalizer. Stable across platforms; used for seed derivation.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stable per-scene seed: scene_seed = derive_seed(dataset_seed, scene_index).
// Datasets stay extendable without re-rendering earlier scenes.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return mix64(base ^ mix64(index));
}

// Deterministic random stream. The engine sequence (std::mt19937_64) and all
// value mappings below are fully specified, so draws are byte-stable across
// platforms and compilers. Not safe to share across threads; derive one
// stream per unit of parallel work instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) {
        if (lo >= hi) return lo;
        return lo + (hi - lo) * uniform01();
    }

    double log_uniform(double lo, double hi) {
        if (lo >= hi) return lo;
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    // Inclusive bounds.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (lo >= hi) return lo;
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    std::size_t pick_index(std::size_t size) {
        return static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(size) - 1));
    }

    // Draw k distinct indices from [0, n) without replacement (partial
    // Fisher-Yates over an index vector).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        std::vector<std::size_t> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k && i < n; ++i) {
            const std::size_t j = i + pick_index(n - i);
            std::swap(idx[i], idx[j]);
            out.push_back(idx[i]);
        }
        return out;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace forge
