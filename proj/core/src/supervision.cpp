#include "forge/supervision.hpp"

#include <algorithm>
#include <cmath>

#include "forge/scene.hpp"

namespace forge {

namespace {

constexpr double kEps = 1e-9;
constexpr double kOverlapGrid = 0.01;  // 10 ms concurrency grid

long long to_grid(double seconds) { return std::llround(seconds / kOverlapGrid); }

}  // namespace

void validate_params(const SupervisionParams& params) {
    if (params.merge_s <= 0.0) throw DataError("merge_s must be > 0");
    if (params.activity <= 0.0 || params.activity >= 1.0) {
        throw DataError("activity must be in (0, 1)");
    }
    if (params.resolution_s <= 0.0) throw DataError("resolution_s must be > 0");
}

bool document_event_less(const GroundTruthEvent& a, const GroundTruthEvent& b) {
    const double sa = a.start_s();
    const double sb = b.start_s();
    if (std::abs(sa - sb) > kEps) return sa < sb;
    if (a.type != b.type) return static_cast<int>(a.type) < static_cast<int>(b.type);
    return a.description < b.description;
}

std::vector<TimeSegment> get_nonzero_ranges(const ActivityMap& map, double merge_s,
                                            double activity) {
    if (map.frame_values.empty()) throw DataError("empty activity map");

    const double peak = *std::max_element(map.frame_values.begin(), map.frame_values.end());
    if (peak <= 0.0) return {};
    const double threshold = activity * peak;

    std::vector<TimeSegment> segments;
    const std::size_t n = map.frame_values.size();
    std::size_t k = 0;
    while (k < n) {
        if (map.frame_values[k] >= threshold) {
            std::size_t end = k;
            while (end + 1 < n && map.frame_values[end + 1] >= threshold) ++end;
            segments.push_back({static_cast<double>(k) * map.hop_s,
                                static_cast<double>(end + 1) * map.hop_s});
            k = end + 1;
        } else {
            ++k;
        }
    }

    // Fuse runs separated by a gap < merge_s.
    std::vector<TimeSegment> merged;
    for (const TimeSegment& seg : segments) {
        if (!merged.empty() && seg.start_s - merged.back().end_s < merge_s - kEps) {
            merged.back().end_s = seg.end_s;
        } else {
            merged.push_back(seg);
        }
    }
    return merged;
}

std::vector<TimeSegment> round_segments(std::vector<TimeSegment> segments, double resolution_s,
                                        double duration_s) {
    if (resolution_s <= 0.0) throw DataError("resolution_s must be > 0");

    std::vector<TimeSegment> rounded;
    rounded.reserve(segments.size());
    for (const TimeSegment& seg : segments) {
        double start = std::llround(seg.start_s / resolution_s) * resolution_s;
        double end = std::llround(seg.end_s / resolution_s) * resolution_s;
        if (end <= start + kEps) {
            end = start + resolution_s;  // widen a collapsed segment by one step
        }
        if (duration_s > 0.0 && end > duration_s + kEps) {
            end = duration_s;
            if (start >= end - kEps) start = std::max(0.0, end - resolution_s);
        }
        if (end <= start + kEps) continue;  // degenerate even after widening
        rounded.push_back({start, end});
    }

    std::sort(rounded.begin(), rounded.end(),
              [](const TimeSegment& a, const TimeSegment& b) { return a.start_s < b.start_s; });

    std::vector<TimeSegment> fused;
    for (const TimeSegment& seg : rounded) {
        if (!fused.empty() && seg.start_s <= fused.back().end_s + kEps) {
            fused.back().end_s = std::max(fused.back().end_s, seg.end_s);
        } else {
            fused.push_back(seg);
        }
    }
    return fused;
}

CaptionHeader compute_header(const std::vector<GroundTruthEvent>& events) {
    CaptionHeader header;
    header.total_events = static_cast<long long>(events.size());

    // Max concurrency on the 10 ms grid via a difference array over grid
    // indices (segment boundaries are grid-aligned after rounding).
    long long max_tick = 0;
    for (const GroundTruthEvent& event : events) {
        for (const TimeSegment& seg : event.segments) {
            max_tick = std::max(max_tick, to_grid(seg.end_s));
        }
    }
    std::vector<int> delta(static_cast<std::size_t>(max_tick) + 2, 0);
    for (const GroundTruthEvent& event : events) {
        for (const TimeSegment& seg : event.segments) {
            const long long lo = std::clamp<long long>(to_grid(seg.start_s), 0, max_tick);
            const long long hi = std::clamp<long long>(to_grid(seg.end_s), 0, max_tick);
            if (hi > lo) {
                delta[static_cast<std::size_t>(lo)] += 1;
                delta[static_cast<std::size_t>(hi)] -= 1;
            }
        }
    }
    long long running = 0;
    long long max_overlap = 0;
    for (int d : delta) {
        running += d;
        max_overlap = std::max(max_overlap, running);
    }
    header.max_overlap = events.empty() ? 0 : max_overlap;

    long long counts[4] = {0, 0, 0, 0};
    for (const GroundTruthEvent& event : events) counts[static_cast<int>(event.type)] += 1;
    for (TypeTag tag : kAllTypeTags) {
        if (counts[static_cast<int>(tag)] > 0) {
            header.type_counts.push_back({tag, counts[static_cast<int>(tag)]});
        }
    }
    std::sort(header.type_counts.begin(), header.type_counts.end(),
              [](const TypeCount& a, const TypeCount& b) {
                  if (a.count != b.count) return a.count > b.count;
                  return header_count_rank(a.type) < header_count_rank(b.type);
              });
    return header;
}

CaptionDocument build_ground_truth(const std::vector<EventPlan>& plans,
                                   const std::vector<ActivityMap>& maps,
                                   const SupervisionParams& params, double duration_s) {
    if (plans.size() != maps.size()) {
        throw DataError("plans and activity maps must align one-to-one");
    }
    validate_params(params);

    CaptionDocument doc;
    doc.params = params;
    doc.duration_s = duration_s;

    for (std::size_t i = 0; i < plans.size(); ++i) {
        std::vector<TimeSegment> segments =
            round_segments(get_nonzero_ranges(maps[i], params.merge_s, params.activity),
                           params.resolution_s, duration_s);
        if (segments.empty()) continue;  // silenced by the thresholds: not part of the scene

        GroundTruthEvent event;
        event.type = plans[i].type;
        event.description = plans[i].source.captions.for_style(params.style);
        event.segments = std::move(segments);
        if (plans[i].type == TypeTag::speech) event.transcript = plans[i].source.transcript;
        event.source_id = plans[i].source.id;
        doc.events.push_back(std::move(event));
    }

    if (doc.events.empty()) {
        throw EmptySceneError("every event fell below the activity threshold");
    }

    std::stable_sort(doc.events.begin(), doc.events.end(), document_event_less);
    doc.header = compute_header(doc.events);
    return doc;
}

}  // namespace forge
