#pragma once

#include <optional>
#include <string>
#include <vector>

#include "forge/audio.hpp"
#include "forge/common.hpp"

namespace forge {

struct EventPlan;  // scene.hpp

// Per-example supervision strictness: caption style, segment merge gap,
// relative activity threshold and timestamp grid.
struct SupervisionParams {
    CaptionStyle style = CaptionStyle::brief;
    double merge_s = 0.25;
    double activity = 0.05;      // fraction of the event's own max RMS, (0, 1)
    double resolution_s = 0.10;

    bool operator==(const SupervisionParams&) const = default;
};

void validate_params(const SupervisionParams& params);

struct TimeSegment {
    double start_s = 0.0;
    double end_s = 0.0;

    double length() const { return end_s - start_s; }
    bool operator==(const TimeSegment&) const = default;
};

struct GroundTruthEvent {
    TypeTag type = TypeTag::sfx;
    std::string description;
    std::vector<TimeSegment> segments;  // sorted by start, non-empty
    std::string transcript;             // speech only; empty = absent
    std::string source_id;              // sidecar metadata; not on the wire

    double start_s() const { return segments.empty() ? 0.0 : segments.front().start_s; }
    bool operator==(const GroundTruthEvent&) const = default;
};

struct TypeCount {
    TypeTag type = TypeTag::sfx;
    long long count = 0;
    bool operator==(const TypeCount&) const = default;
};

// Leading summary of a caption document: "3 events total. 2 events overlap.
// 2 sound effects, 1 music."
struct CaptionHeader {
    long long total_events = 0;
    long long max_overlap = 0;  // events simultaneously active at the busiest instant
    std::vector<TypeCount> type_counts;
    bool operator==(const CaptionHeader&) const = default;
};

struct CaptionDocument {
    CaptionHeader header;
    std::vector<GroundTruthEvent> events;  // ordered by first-segment start
    std::optional<SupervisionParams> params;
    double duration_s = 0.0;  // 0 = unknown (e.g. parsed from text)

    bool operator==(const CaptionDocument&) const = default;
};

// Document event ordering: first-segment start, then tag (music, sfx,
// speech, background), then description.
bool document_event_less(const GroundTruthEvent& a, const GroundTruthEvent& b);

// Thresholds the map at activity * max(map), turns maximal active-frame runs
// into segments [k_start*hop, (k_end+1)*hop], and fuses consecutive segments
// whose gap is < merge_s. An all-zero map yields no segments.
std::vector<TimeSegment> get_nonzero_ranges(const ActivityMap& map, double merge_s,
                                            double activity);

// Snaps boundaries to the nearest multiple of resolution_s (ties round up).
// Collapsed segments are widened by one step and clamped to the scene; any
// segments that now touch or overlap are fused. Idempotent.
std::vector<TimeSegment> round_segments(std::vector<TimeSegment> segments, double resolution_s,
                                        double duration_s);

// Header derived from events: total count, max concurrency on a 10 ms grid,
// and per-type counts sorted by descending count (ties: sfx, music, speech,
// background).
CaptionHeader compute_header(const std::vector<GroundTruthEvent>& events);

// Raised by build_ground_truth when every event fell below its activity
// threshold, so callers can resample the scene.
class EmptySceneError : public DataError {
public:
    using DataError::DataError;
};

// Algorithm: per event, extract + merge + round segments from its activity
// map, pick the style caption, drop events with no surviving segments, then
// order events and compute the header.
CaptionDocument build_ground_truth(const std::vector<EventPlan>& plans,
                                   const std::vector<ActivityMap>& maps,
                                   const SupervisionParams& params, double duration_s);

}  // namespace forge
