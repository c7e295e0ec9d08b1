#pragma once

#include <string>
#include <vector>

#include "forge/eval.hpp"

namespace forge {

struct HttpBackendConfig {
    std::string url;          // base, e.g. "http://127.0.0.1:8090"
    double timeout_s = 10.0;
    int retries = 2;          // additional attempts after the first
    std::size_t concurrency = 4;
};

// Remote similarity judge. POST /judge with {"pairs":[{"pred","ref"},...]}
// and expects {"scores":[...]} of equal length, each in [0, 1]. Transport or
// protocol failures raise BackendError after the configured retries; scores
// are never silently zeroed.
class HttpJudge : public SimilarityJudge {
public:
    explicit HttpJudge(HttpBackendConfig config);
    double judge(const std::string& pred, const std::string& ref) override;
    std::vector<double> judge_batch(
        const std::vector<std::pair<std::string, std::string>>& pairs) override;
    std::size_t max_concurrency() const override { return config_.concurrency; }

private:
    HttpBackendConfig config_;
};

// Remote audio-text scorer. POST /score with {"audio_wav_base64","text",
// "hop_s"} and expects {"scores":[...]} covering the clip.
class HttpScorer : public ConfidenceScorer {
public:
    explicit HttpScorer(HttpBackendConfig config);
    std::vector<double> score_curve(const AudioClip* audio, const std::string& text,
                                    double hop_s) override;
    std::size_t max_concurrency() const override { return config_.concurrency; }

private:
    HttpBackendConfig config_;
};

std::string base64_encode(const std::vector<std::uint8_t>& bytes);

}  // namespace forge
