#include "forge/eval.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <set>

namespace forge {

namespace {

constexpr double kEps = 1e-9;

const std::set<std::string>& stopwords() {
    static const std::set<std::string> words = {
        "a",    "an",   "the",  "and",  "or",   "of",   "in",   "on",    "at",   "to",
        "from", "with", "by",   "for",  "as",   "is",   "are",  "was",   "were", "be",
        "been", "am",   "it",   "its",  "this", "that", "these", "those", "there"};
    return words;
}

std::vector<std::string> judge_tokens(const std::string& text) {
    std::string cleaned;
    cleaned.reserve(text.size());
    for (char c : text) {
        const unsigned char u = static_cast<unsigned char>(c);
        if (c == '\'') continue;  // "dog's" -> "dogs"
        if (std::ispunct(u)) {
            cleaned += ' ';
        } else {
            cleaned += static_cast<char>(std::tolower(u));
        }
    }
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < cleaned.size()) {
        while (i < cleaned.size() && std::isspace(static_cast<unsigned char>(cleaned[i]))) ++i;
        std::size_t j = i;
        while (j < cleaned.size() && !std::isspace(static_cast<unsigned char>(cleaned[j]))) ++j;
        if (j > i) {
            std::string tok = cleaned.substr(i, j - i);
            if (stopwords().count(tok) == 0) tokens.push_back(std::move(tok));
        }
        i = j;
    }
    return tokens;
}

// Merged (disjoint, sorted) support of an event's segments.
std::vector<TimeSegment> support(const GroundTruthEvent& event) {
    std::vector<TimeSegment> segs = event.segments;
    std::sort(segs.begin(), segs.end(),
              [](const TimeSegment& a, const TimeSegment& b) { return a.start_s < b.start_s; });
    std::vector<TimeSegment> merged;
    for (const TimeSegment& s : segs) {
        if (!merged.empty() && s.start_s <= merged.back().end_s + kEps) {
            merged.back().end_s = std::max(merged.back().end_s, s.end_s);
        } else {
            merged.push_back(s);
        }
    }
    return merged;
}

bool segment_covers_bin(const TimeSegment& seg, double bin_start, double bin_end) {
    return std::min(seg.end_s, bin_end) - std::max(seg.start_s, bin_start) > kEps;
}

bool event_active_in(const GroundTruthEvent& event, double lo, double hi) {
    for (const TimeSegment& seg : event.segments) {
        if (segment_covers_bin(seg, lo, hi)) return true;
    }
    return false;
}

std::size_t bin_count(double duration_s, double resolution_s) {
    return static_cast<std::size_t>(std::ceil(duration_s / resolution_s - kEps));
}

// Max and min of the curve over frames intersecting the event's segments.
// Events whose segments touch no frame report (0, 0).
std::pair<double, double> curve_extrema(const GroundTruthEvent& event,
                                        const std::vector<double>& curve, double hop_s) {
    double max_v = 0.0;
    double min_v = 1.0;
    bool any = false;
    for (std::size_t f = 0; f < curve.size(); ++f) {
        const double lo = static_cast<double>(f) * hop_s;
        const double hi = lo + hop_s;
        if (!event_active_in(event, lo, hi)) continue;
        max_v = std::max(max_v, curve[f]);
        min_v = std::min(min_v, curve[f]);
        any = true;
    }
    if (!any) return {0.0, 0.0};
    return {max_v, min_v};
}

double doc_duration(const CaptionDocument& doc) {
    double d = doc.duration_s;
    for (const GroundTruthEvent& event : doc.events) {
        for (const TimeSegment& seg : event.segments) d = std::max(d, seg.end_s);
    }
    return d;
}

}  // namespace

std::vector<double> SimilarityJudge::judge_batch(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::vector<double> scores;
    scores.reserve(pairs.size());
    for (const auto& [pred, ref] : pairs) scores.push_back(judge(pred, ref));
    return scores;
}

double BuiltinJudge::judge(const std::string& pred, const std::string& ref) {
    const std::vector<std::string> a = judge_tokens(pred);
    const std::vector<std::string> b = judge_tokens(ref);
    const std::set<std::string> sa(a.begin(), a.end());
    const std::set<std::string> sb(b.begin(), b.end());
    if (sa.empty() && sb.empty()) return 1.0;
    std::size_t inter = 0;
    for (const std::string& t : sa) inter += sb.count(t);
    const std::size_t uni = sa.size() + sb.size() - inter;
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double builtin_judge(const std::string& pred, const std::string& ref) {
    BuiltinJudge judge;
    return judge.judge(pred, ref);
}

OracleScorer::OracleScorer(CaptionDocument refs) : refs_(std::move(refs)) {
    duration_s_ = doc_duration(refs_);
}

std::vector<double> OracleScorer::score_curve(const AudioClip* audio, const std::string& text,
                                              double hop_s) {
    double duration = duration_s_;
    if (audio != nullptr) duration = std::max(duration, audio->duration_s());
    const std::size_t frames = std::max<std::size_t>(1, bin_count(duration, hop_s));
    std::vector<double> curve(frames, 0.0);
    BuiltinJudge judge;
    for (const GroundTruthEvent& event : refs_.events) {
        if (judge.judge(text, event.description) < 0.99) continue;
        for (std::size_t f = 0; f < frames; ++f) {
            const double lo = static_cast<double>(f) * hop_s;
            if (event_active_in(event, lo, lo + hop_s)) curve[f] = 1.0;
        }
    }
    return curve;
}

double temporal_iou(const GroundTruthEvent& a, const GroundTruthEvent& b) {
    const std::vector<TimeSegment> sa = support(a);
    const std::vector<TimeSegment> sb = support(b);
    double inter = 0.0;
    for (const TimeSegment& x : sa) {
        for (const TimeSegment& y : sb) {
            inter += std::max(0.0, std::min(x.end_s, y.end_s) - std::max(x.start_s, y.start_s));
        }
    }
    double len_a = 0.0, len_b = 0.0;
    for (const TimeSegment& x : sa) len_a += x.length();
    for (const TimeSegment& y : sb) len_b += y.length();
    const double uni = len_a + len_b - inter;
    return uni <= kEps ? 0.0 : inter / uni;
}

MatchResult match_events(const std::vector<GroundTruthEvent>& preds,
                         const std::vector<GroundTruthEvent>& refs, SimilarityJudge& judge,
                         MatchWeights weights, double floor) {
    if (std::abs(weights.w_sem + weights.w_t - 1.0) > 1e-6) {
        throw DataError("match weights must sum to 1");
    }
    if (floor < 0.0 || floor > 1.0) throw DataError("acceptance floor must be in [0, 1]");

    std::vector<std::pair<std::string, std::string>> queries;
    queries.reserve(preds.size() * refs.size());
    for (const GroundTruthEvent& p : preds) {
        for (const GroundTruthEvent& r : refs) queries.emplace_back(p.description, r.description);
    }
    const std::vector<double> scores = judge.judge_batch(queries);
    if (scores.size() != queries.size()) {
        throw BackendError("judge returned " + std::to_string(scores.size()) +
                           " scores for " + std::to_string(queries.size()) + " pairs");
    }

    std::vector<MatchedPair> candidates;
    for (std::size_t pi = 0; pi < preds.size(); ++pi) {
        for (std::size_t ri = 0; ri < refs.size(); ++ri) {
            const double s_sem = scores[pi * refs.size() + ri];
            if (s_sem < 0.0 || s_sem > 1.0) {
                throw BackendError("judge score outside [0, 1]");
            }
            if (s_sem < floor) continue;
            MatchedPair pair;
            pair.pred_index = static_cast<int>(pi);
            pair.ref_index = static_cast<int>(ri);
            pair.s_sem = s_sem;
            pair.t_iou = temporal_iou(preds[pi], refs[ri]);
            pair.composite = weights.w_sem * s_sem + weights.w_t * pair.t_iou;
            candidates.push_back(pair);
        }
    }

    std::sort(candidates.begin(), candidates.end(), [](const MatchedPair& a, const MatchedPair& b) {
        if (a.composite != b.composite) return a.composite > b.composite;
        if (a.t_iou != b.t_iou) return a.t_iou > b.t_iou;
        if (a.pred_index != b.pred_index) return a.pred_index < b.pred_index;
        return a.ref_index < b.ref_index;
    });

    MatchResult result;
    std::vector<bool> pred_used(preds.size(), false);
    std::vector<bool> ref_used(refs.size(), false);
    for (const MatchedPair& pair : candidates) {
        if (pred_used[pair.pred_index] || ref_used[pair.ref_index]) continue;
        pred_used[pair.pred_index] = true;
        ref_used[pair.ref_index] = true;
        result.pairs.push_back(pair);
    }
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (!pred_used[i]) result.unmatched_pred.push_back(static_cast<int>(i));
    }
    for (std::size_t i = 0; i < refs.size(); ++i) {
        if (!ref_used[i]) result.unmatched_ref.push_back(static_cast<int>(i));
    }
    return result;
}

double f1_from_counts(const F1Counts& counts, bool both_empty) {
    if (both_empty) return 1.0;
    const long long denom = 2 * counts.tp + counts.fp + counts.fn;
    if (counts.tp == 0 || denom == 0) return 0.0;
    return 2.0 * static_cast<double>(counts.tp) / static_cast<double>(denom);
}

std::pair<double, F1Counts> segment_f1(const MatchResult& match,
                                       const std::vector<GroundTruthEvent>& preds,
                                       const std::vector<GroundTruthEvent>& refs,
                                       double resolution_s, double duration_s) {
    F1Counts counts;
    const std::size_t bins = bin_count(duration_s, resolution_s);

    for (const MatchedPair& pair : match.pairs) {
        const GroundTruthEvent& p = preds[pair.pred_index];
        const GroundTruthEvent& r = refs[pair.ref_index];
        for (std::size_t b = 0; b < bins; ++b) {
            const double lo = static_cast<double>(b) * resolution_s;
            const double hi = lo + resolution_s;
            const bool pa = event_active_in(p, lo, hi);
            const bool ra = event_active_in(r, lo, hi);
            if (pa && ra) {
                ++counts.tp;
            } else if (pa) {
                ++counts.fp;
            } else if (ra) {
                ++counts.fn;
            }
        }
    }
    for (int pi : match.unmatched_pred) {
        for (std::size_t b = 0; b < bins; ++b) {
            const double lo = static_cast<double>(b) * resolution_s;
            if (event_active_in(preds[pi], lo, lo + resolution_s)) ++counts.fp;
        }
    }
    for (int ri : match.unmatched_ref) {
        for (std::size_t b = 0; b < bins; ++b) {
            const double lo = static_cast<double>(b) * resolution_s;
            if (event_active_in(refs[ri], lo, lo + resolution_s)) ++counts.fn;
        }
    }

    const bool both_empty = preds.empty() && refs.empty();
    return {f1_from_counts(counts, both_empty), counts};
}

std::pair<double, F1Counts> event_f1(const MatchResult& match,
                                     const std::vector<GroundTruthEvent>& preds,
                                     const std::vector<GroundTruthEvent>& refs, double collar_s) {
    F1Counts counts;
    long long total_pred_segments = 0;
    long long total_ref_segments = 0;
    for (const GroundTruthEvent& p : preds) {
        total_pred_segments += static_cast<long long>(p.segments.size());
    }
    for (const GroundTruthEvent& r : refs) {
        total_ref_segments += static_cast<long long>(r.segments.size());
    }

    long long tp = 0;
    for (const MatchedPair& pair : match.pairs) {
        const auto& ps = preds[pair.pred_index].segments;
        const auto& rs = refs[pair.ref_index].segments;

        struct Cand {
            double dist;
            std::size_t pi;
            std::size_t ri;
        };
        std::vector<Cand> cands;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            for (std::size_t j = 0; j < rs.size(); ++j) {
                cands.push_back({std::abs(ps[i].start_s - rs[j].start_s), i, j});
            }
        }
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.dist != b.dist) return a.dist < b.dist;
            if (a.pi != b.pi) return a.pi < b.pi;
            return a.ri < b.ri;
        });
        std::vector<bool> p_used(ps.size(), false);
        std::vector<bool> r_used(rs.size(), false);
        for (const Cand& c : cands) {
            if (c.dist > collar_s + kEps) break;  // later candidates are farther
            if (p_used[c.pi] || r_used[c.ri]) continue;
            p_used[c.pi] = true;
            r_used[c.ri] = true;
            ++tp;
        }
    }

    counts.tp = tp;
    counts.fp = total_pred_segments - tp;
    counts.fn = total_ref_segments - tp;

    const bool both_empty = preds.empty() && refs.empty();
    return {f1_from_counts(counts, both_empty), counts};
}

double hallucination_rate(const std::vector<GroundTruthEvent>& preds, const AudioClip* audio,
                          ConfidenceScorer& scorer, double tau, double hop_s) {
    if (preds.empty()) return 0.0;
    long long below = 0;
    for (const GroundTruthEvent& event : preds) {
        const std::vector<double> curve = scorer.score_curve(audio, event.description, hop_s);
        const auto [conf, spec] = curve_extrema(event, curve, hop_s);
        (void)spec;
        if (conf < tau) ++below;
    }
    return 100.0 * static_cast<double>(below) / static_cast<double>(preds.size());
}

std::pair<double, double> confidence_specificity(const std::vector<GroundTruthEvent>& preds,
                                                 const AudioClip* audio, ConfidenceScorer& scorer,
                                                 double hop_s) {
    if (preds.empty()) return {0.0, 0.0};
    double conf_sum = 0.0;
    double spec_sum = 0.0;
    for (const GroundTruthEvent& event : preds) {
        const std::vector<double> curve = scorer.score_curve(audio, event.description, hop_s);
        const auto [conf, spec] = curve_extrema(event, curve, hop_s);
        conf_sum += conf;
        spec_sum += spec;
    }
    const double n = static_cast<double>(preds.size());
    return {conf_sum / n, spec_sum / n};
}

MetricsReport evaluate(const CaptionDocument& preds, const CaptionDocument& refs,
                       SimilarityJudge& judge, ConfidenceScorer& scorer, const EvalConfig& config,
                       const AudioClip* audio, MatchResult* match_out) {
    double duration = config.duration_s;
    if (duration <= 0.0) {
        duration = std::max(doc_duration(preds), doc_duration(refs));
        if (audio != nullptr) duration = std::max(duration, audio->duration_s());
    }

    const MatchResult match =
        match_events(preds.events, refs.events, judge, config.weights, config.sem_floor);

    MetricsReport report;
    report.pred_events = static_cast<long long>(preds.events.size());
    report.ref_events = static_cast<long long>(refs.events.size());

    const auto [seg, seg_counts] =
        segment_f1(match, preds.events, refs.events, config.seg_resolution_s, duration);
    report.seg_f1 = seg;
    report.seg_counts = seg_counts;

    const auto [evt, evt_counts] = event_f1(match, preds.events, refs.events, config.collar_s);
    report.evt_f1 = evt;
    report.evt_counts = evt_counts;

    if (!preds.events.empty()) {
        long long below = 0;
        double conf_sum = 0.0;
        double spec_sum = 0.0;
        for (const GroundTruthEvent& event : preds.events) {
            const std::vector<double> curve =
                scorer.score_curve(audio, event.description, config.scorer_hop_s);
            const auto [conf, spec] = curve_extrema(event, curve, config.scorer_hop_s);
            if (conf < config.tau) ++below;
            conf_sum += conf;
            spec_sum += spec;
        }
        const double n = static_cast<double>(preds.events.size());
        report.hal_pct = 100.0 * static_cast<double>(below) / n;
        report.conf = conf_sum / n;
        report.spec = spec_sum / n;
    }

    if (match_out != nullptr) *match_out = match;
    return report;
}

}  // namespace forge
