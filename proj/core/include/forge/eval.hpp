#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "forge/audio.hpp"
#include "forge/common.hpp"
#include "forge/supervision.hpp"

namespace forge {

// Scores how well a predicted description matches a reference one, in [0, 1].
class SimilarityJudge {
public:
    virtual ~SimilarityJudge() = default;
    virtual double judge(const std::string& pred, const std::string& ref) = 0;

    // Batched scoring; remote backends override this with one round trip.
    virtual std::vector<double> judge_batch(
        const std::vector<std::pair<std::string, std::string>>& pairs);

    // Max concurrent in-flight calls the backend tolerates; 0 = unlimited.
    virtual std::size_t max_concurrency() const { return 0; }
};

// Deterministic stand-in judge: lowercase, strip punctuation, drop a fixed
// stopword list, then Jaccard similarity of the token sets. Two empty token
// sets score 1.
class BuiltinJudge : public SimilarityJudge {
public:
    double judge(const std::string& pred, const std::string& ref) override;
};

double builtin_judge(const std::string& pred, const std::string& ref);

// Reference-free audio-text scorer: per-frame scores in [0, 1] covering the
// clip at hop_s. `audio` may be null for backends that do not need it.
class ConfidenceScorer {
public:
    virtual ~ConfidenceScorer() = default;
    virtual std::vector<double> score_curve(const AudioClip* audio, const std::string& text,
                                            double hop_s) = 0;
    virtual std::size_t max_concurrency() const { return 0; }
};

// Test double for a real audio-text model: the curve for a query is 1.0 on
// frames where some reference event with a near-identical description
// (builtin judge >= 0.99) is active, 0.0 elsewhere. Audio is ignored.
class OracleScorer : public ConfidenceScorer {
public:
    explicit OracleScorer(CaptionDocument refs);
    std::vector<double> score_curve(const AudioClip* audio, const std::string& text,
                                    double hop_s) override;

private:
    CaptionDocument refs_;
    double duration_s_ = 0.0;
};

struct MatchWeights {
    double w_sem = 0.5;
    double w_t = 0.5;
};

struct MatchedPair {
    int pred_index = 0;
    int ref_index = 0;
    double s_sem = 0.0;
    double t_iou = 0.0;
    double composite = 0.0;
};

struct MatchResult {
    std::vector<MatchedPair> pairs;
    std::vector<int> unmatched_pred;
    std::vector<int> unmatched_ref;
};

// Greedy bipartite matching on composite = w_sem*s_sem + w_t*t_iou. Pairs
// with s_sem below `floor` are discarded up front; the rest are taken in
// descending composite order (ties: higher t_iou, then lower pred index,
// then lower ref index) whenever both sides are still free.
MatchResult match_events(const std::vector<GroundTruthEvent>& preds,
                         const std::vector<GroundTruthEvent>& refs, SimilarityJudge& judge,
                         MatchWeights weights = {}, double floor = 0.5);

// Temporal IoU of two events' time supports (union of segments each).
double temporal_iou(const GroundTruthEvent& a, const GroundTruthEvent& b);

struct F1Counts {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
};

// 2TP / (2TP + FP + FN); empty-vs-empty is 1, otherwise TP = 0 scores 0.
double f1_from_counts(const F1Counts& counts, bool both_empty);

// Timeline binned at resolution_s; within each matched pair a bin is TP when
// both sides are active, FP when only the prediction is, FN when only the
// reference is. Active bins of unmatched predictions count FP, of unmatched
// references FN. Micro-aggregated.
std::pair<double, F1Counts> segment_f1(const MatchResult& match,
                                       const std::vector<GroundTruthEvent>& preds,
                                       const std::vector<GroundTruthEvent>& refs,
                                       double resolution_s, double duration_s);

// Detection units are individual segments. Within each matched event pair,
// predicted segments pair greedily with reference segments by smallest onset
// distance; a predicted segment is TP iff that distance is within collar_s.
// Leftover predicted segments (and all segments of unmatched predicted
// events) are FP; leftover reference segments are FN.
std::pair<double, F1Counts> event_f1(const MatchResult& match,
                                     const std::vector<GroundTruthEvent>& preds,
                                     const std::vector<GroundTruthEvent>& refs,
                                     double collar_s = 1.0);

// Percentage of predicted events whose max scorer confidence over their own
// segments falls below tau. Empty predictions define 0%.
double hallucination_rate(const std::vector<GroundTruthEvent>& preds, const AudioClip* audio,
                          ConfidenceScorer& scorer, double tau = 0.25, double hop_s = 0.1);

// Per event: confidence = max and specificity = min of the scorer curve over
// the event's predicted range(s); reports means over events.
std::pair<double, double> confidence_specificity(const std::vector<GroundTruthEvent>& preds,
                                                 const AudioClip* audio, ConfidenceScorer& scorer,
                                                 double hop_s = 0.1);

struct EvalConfig {
    MatchWeights weights;
    double sem_floor = 0.5;
    double collar_s = 1.0;
    double seg_resolution_s = 0.1;
    double tau = 0.25;
    double scorer_hop_s = 0.1;
    double duration_s = 0.0;  // 0 = derive from the documents
};

struct MetricsReport {
    double seg_f1 = 0.0;
    double evt_f1 = 0.0;
    double hal_pct = 0.0;
    double conf = 0.0;
    double spec = 0.0;
    F1Counts seg_counts;
    F1Counts evt_counts;
    long long pred_events = 0;
    long long ref_events = 0;
};

// Composes the full suite: match -> segment F1 -> event F1 -> hallucination /
// confidence / specificity. Deterministic with the built-in backends.
MetricsReport evaluate(const CaptionDocument& preds, const CaptionDocument& refs,
                       SimilarityJudge& judge, ConfidenceScorer& scorer,
                       const EvalConfig& config = {}, const AudioClip* audio = nullptr,
                       MatchResult* match_out = nullptr);

}  // namespace forge
