#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forge/audio.hpp"
#include "forge/common.hpp"
#include "forge/rng.hpp"
#include "forge/supervision.hpp"

namespace forge {

struct CaptionSet {
    std::string keywords;
    std::string brief;
    std::string detailed;

    const std::string& for_style(CaptionStyle style) const {
        switch (style) {
            case CaptionStyle::keywords: return keywords;
            case CaptionStyle::brief: return brief;
            case CaptionStyle::detailed: return detailed;
        }
        return brief;
    }
    bool operator==(const CaptionSet&) const = default;
};

// One entry of the source library.
struct SourceClipMeta {
    std::string id;
    std::string path;
    TypeTag type = TypeTag::sfx;
    CaptionSet captions;
    double duration_s = 0.0;
    std::string transcript;  // speech only; empty = absent

    bool operator==(const SourceClipMeta&) const = default;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool operator==(const Interval&) const = default;
};

struct IntInterval {
    long long lo = 0;
    long long hi = 0;
    bool operator==(const IntInterval&) const = default;
};

enum class OffsetPolicy { uniform, front_loaded, anywhere };

std::string_view to_string(OffsetPolicy policy);
OffsetPolicy offset_policy_from_string(std::string_view name);

// Ranges the per-occurrence AugmentationSpec fields are drawn from.
struct AugmentationRanges {
    Interval fade_in_s{0.0, 0.0};
    Interval fade_out_s{0.0, 0.0};
    Interval distortion_drive{0.0, 0.0};
    Interval reverb_decay_s{0.3, 0.3};
    Interval reverb_wet{0.2, 0.2};
    bool operator==(const AugmentationRanges&) const = default;
};

struct RoleSpec {
    TypeTag role = TypeTag::sfx;
    IntInterval count_range{0, 0};
    bool continuous = false;
    bool no_self_overlap = false;
    IntInterval repeat_range{1, 1};
    Interval gain_db_range{0.0, 0.0};
    OffsetPolicy offset_policy = OffsetPolicy::uniform;
    AugmentationRanges augmentation;
    std::optional<std::vector<std::string>> allowed_tags;  // source-id filter

    bool operator==(const RoleSpec&) const = default;
};

struct SceneTemplate {
    std::string name;
    Interval duration_range_s{8.0, 20.0};
    std::map<TypeTag, RoleSpec> roles;
    long long max_concurrent = 3;
    double reverb_prob = 0.0;

    bool operator==(const SceneTemplate&) const = default;
};

// Every invariant violation, phrased with a field path
// ("roles.sfx.count_range: ..."). Empty result = valid.
std::vector<std::string> validate_template(const SceneTemplate& tmpl);

// One placement of (a window of) the source clip inside the scene.
struct Occurrence {
    double offset_s = 0.0;
    double clip_start_s = 0.0;
    double clip_len_s = 0.0;
    bool operator==(const Occurrence&) const = default;
};

struct EventPlan {
    int event_id = 0;
    SourceClipMeta source;
    TypeTag role = TypeTag::sfx;
    TypeTag type = TypeTag::sfx;
    std::vector<Occurrence> occurrences;
    AugmentationSpec augmentation;
};

struct InstantiatedScene {
    double duration_s = 0.0;
    std::vector<EventPlan> plans;
};

// Draws scene duration, per-role counts, sources (without replacement within
// the scene), repeats, offsets and augmentations from the template ranges.
// no_self_overlap and max_concurrent are enforced by bounded rejection
// resampling (64 offset retries, then the occurrence is dropped); continuous
// roles get a single occurrence spanning the whole scene. Deterministic for
// a fixed rng stream.
InstantiatedScene instantiate_events(const SceneTemplate& tmpl,
                                     const std::vector<SourceClipMeta>& library, Rng& rng);

// Distributions the per-example supervision parameters are drawn from.
// Defaults: style uniform over all three; merge ~ U(0.1, 1.0) s; activity
// log-uniform over [0.01, 0.20]; resolution uniform over {0.01, 0.10, 0.50}.
struct SamplingConfig {
    std::vector<CaptionStyle> styles = {CaptionStyle::keywords, CaptionStyle::brief,
                                        CaptionStyle::detailed};
    Interval merge_s{0.1, 1.0};
    Interval activity{0.01, 0.20};  // log-uniform
    std::vector<double> resolution_choices = {0.01, 0.10, 0.50};
};

SupervisionParams sample_supervision_params(const SamplingConfig& config, Rng& rng);

}  // namespace forge
