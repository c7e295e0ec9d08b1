#include "forge/http_backends.hpp"

#include <cmath>

#include <httplib.h>
#include <json.hpp>

namespace forge {

namespace {

using nlohmann::json;

struct ParsedUrl {
    std::string host_port;  // scheme://host:port
    std::string base_path;  // optional prefix
};

ParsedUrl split_url(const std::string& url) {
    const std::size_t scheme = url.find("://");
    if (scheme == std::string::npos) {
        throw DataError("backend URL must start with http:// : " + url);
    }
    const std::size_t path_at = url.find('/', scheme + 3);
    if (path_at == std::string::npos) return {url, ""};
    std::string base = url.substr(path_at);
    if (base == "/") base.clear();
    return {url.substr(0, path_at), base};
}

json post_json(const HttpBackendConfig& config, const std::string& endpoint, const json& body) {
    const ParsedUrl url = split_url(config.url);
    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= config.retries; ++attempt) {
        httplib::Client client(url.host_port);
        client.set_connection_timeout(std::chrono::milliseconds(
            static_cast<int>(config.timeout_s * 1000)));
        client.set_read_timeout(std::chrono::milliseconds(
            static_cast<int>(config.timeout_s * 1000)));
        auto res = client.Post(url.base_path + endpoint, body.dump(), "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP status " + std::to_string(res->status);
            continue;
        }
        try {
            return json::parse(res->body);
        } catch (const json::exception& e) {
            last_error = std::string("bad JSON reply: ") + e.what();
            continue;
        }
    }
    throw BackendError("POST " + config.url + endpoint + " failed after " +
                       std::to_string(config.retries + 1) + " attempt(s): " + last_error);
}

std::vector<double> extract_scores(const json& reply, const std::string& endpoint,
                                   std::size_t expected) {
    if (!reply.contains("scores") || !reply["scores"].is_array()) {
        throw BackendError(endpoint + " reply has no 'scores' array");
    }
    std::vector<double> scores;
    scores.reserve(reply["scores"].size());
    for (const auto& v : reply["scores"]) {
        if (!v.is_number()) throw BackendError(endpoint + " score is not a number");
        const double s = v.get<double>();
        if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
            throw BackendError(endpoint + " score outside [0, 1]");
        }
        scores.push_back(s);
    }
    if (expected > 0 && scores.size() < expected) {
        throw BackendError(endpoint + " returned " + std::to_string(scores.size()) +
                           " scores, expected at least " + std::to_string(expected));
    }
    return scores;
}

}  // namespace

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    static const char table[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 2 < bytes.size()) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out += table[(v >> 18) & 63];
        out += table[(v >> 12) & 63];
        out += table[(v >> 6) & 63];
        out += table[v & 63];
        i += 3;
    }
    if (i + 1 == bytes.size()) {
        const std::uint32_t v = bytes[i] << 16;
        out += table[(v >> 18) & 63];
        out += table[(v >> 12) & 63];
        out += "==";
    } else if (i + 2 == bytes.size()) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out += table[(v >> 18) & 63];
        out += table[(v >> 12) & 63];
        out += table[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

HttpJudge::HttpJudge(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.url.empty()) throw DataError("judge URL is empty");
}

double HttpJudge::judge(const std::string& pred, const std::string& ref) {
    return judge_batch({{pred, ref}}).front();
}

std::vector<double> HttpJudge::judge_batch(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
    if (pairs.empty()) return {};
    json body;
    body["pairs"] = json::array();
    for (const auto& [pred, ref] : pairs) {
        body["pairs"].push_back({{"pred", pred}, {"ref", ref}});
    }
    const json reply = post_json(config_, "/judge", body);
    std::vector<double> scores = extract_scores(reply, "/judge", pairs.size());
    if (scores.size() != pairs.size()) {
        throw BackendError("/judge returned " + std::to_string(scores.size()) +
                           " scores for " + std::to_string(pairs.size()) + " pairs");
    }
    return scores;
}

HttpScorer::HttpScorer(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.url.empty()) throw DataError("scorer URL is empty");
}

std::vector<double> HttpScorer::score_curve(const AudioClip* audio, const std::string& text,
                                            double hop_s) {
    if (audio == nullptr || audio->samples.empty()) {
        throw DataError("HTTP scorer requires audio");
    }
    json body;
    body["audio_wav_base64"] = base64_encode(encode_wav_int16(*audio));
    body["text"] = text;
    body["hop_s"] = hop_s;
    const json reply = post_json(config_, "/score", body);
    const std::size_t expected =
        static_cast<std::size_t>(std::ceil(audio->duration_s() / hop_s - 1e-9));
    return extract_scores(reply, "/score", expected);
}

}  // namespace forge
