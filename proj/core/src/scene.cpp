#include "forge/scene.hpp"

#include <algorithm>
#include <cmath>

namespace forge {

namespace {

constexpr int kOffsetRetries = 64;

struct PlacedInterval {
    double lo = 0.0;
    double hi = 0.0;
    TypeTag role = TypeTag::sfx;
};

bool intersects(double lo_a, double hi_a, double lo_b, double hi_b) {
    return lo_a < hi_b - 1e-9 && lo_b < hi_a - 1e-9;
}

// Max concurrency over the union of placed intervals plus the candidate,
// evaluated at interval endpoints (concurrency is piecewise constant).
bool fits_concurrency(const std::vector<PlacedInterval>& placed, double lo, double hi,
                      long long max_concurrent) {
    std::vector<double> points{lo};
    for (const PlacedInterval& p : placed) {
        if (p.lo > lo && p.lo < hi) points.push_back(p.lo);
    }
    for (double t : points) {
        long long count = 1;  // the candidate itself
        for (const PlacedInterval& p : placed) {
            if (p.lo <= t + 1e-9 && t < p.hi - 1e-9) ++count;
        }
        if (count > max_concurrent) return false;
    }
    return true;
}

double draw_offset(OffsetPolicy policy, double scene_duration, double clip_len, Rng& rng) {
    const double slack = std::max(0.0, scene_duration - clip_len);
    switch (policy) {
        case OffsetPolicy::uniform:
            return rng.uniform(0.0, slack);
        case OffsetPolicy::front_loaded: {
            const double u = rng.uniform01();
            return u * u * slack;
        }
        case OffsetPolicy::anywhere:
            return rng.uniform(0.0, scene_duration);
    }
    return 0.0;
}

void check_interval(std::vector<std::string>& out, const std::string& path, const Interval& iv,
                    bool non_negative) {
    if (iv.lo > iv.hi) out.push_back(path + ": inverted interval [" + std::to_string(iv.lo) +
                                     ", " + std::to_string(iv.hi) + "]");
    if (non_negative && iv.lo < 0.0) out.push_back(path + ": negative bound");
}

}  // namespace

std::string_view to_string(OffsetPolicy policy) {
    switch (policy) {
        case OffsetPolicy::uniform: return "uniform";
        case OffsetPolicy::front_loaded: return "front_loaded";
        case OffsetPolicy::anywhere: return "anywhere";
    }
    return "uniform";
}

OffsetPolicy offset_policy_from_string(std::string_view name) {
    if (name == "uniform") return OffsetPolicy::uniform;
    if (name == "front_loaded") return OffsetPolicy::front_loaded;
    if (name == "anywhere") return OffsetPolicy::anywhere;
    throw DataError("unknown offset policy: " + std::string(name));
}

std::vector<std::string> validate_template(const SceneTemplate& tmpl) {
    std::vector<std::string> violations;

    if (tmpl.duration_range_s.lo <= 0.0) {
        violations.push_back("duration_range_s: must be positive");
    }
    if (tmpl.duration_range_s.lo > tmpl.duration_range_s.hi) {
        violations.push_back("duration_range_s: inverted interval");
    }
    if (tmpl.max_concurrent < 1) violations.push_back("max_concurrent: must be >= 1");
    if (tmpl.reverb_prob < 0.0 || tmpl.reverb_prob > 1.0) {
        violations.push_back("reverb_prob: must be in [0, 1]");
    }

    bool any_role = false;
    for (const auto& [tag, role] : tmpl.roles) {
        const std::string base = "roles." + std::string(to_string(tag));
        if (role.role != tag) violations.push_back(base + ".role: key/role mismatch");
        if (role.count_range.lo < 0) violations.push_back(base + ".count_range: negative lo");
        if (role.count_range.lo > role.count_range.hi) {
            violations.push_back(base + ".count_range: inverted interval");
        }
        if (role.count_range.hi >= 1) any_role = true;
        if (role.repeat_range.lo < 1 || role.repeat_range.lo > role.repeat_range.hi) {
            violations.push_back(base + ".repeat_range: must satisfy 1 <= lo <= hi");
        }
        if (role.continuous && role.repeat_range.hi > 1) {
            violations.push_back(base + ".repeat_range: continuous roles cannot repeat");
        }
        check_interval(violations, base + ".gain_db_range",
                       {role.gain_db_range.lo, role.gain_db_range.hi}, false);
        check_interval(violations, base + ".augmentation.fade_in_s", role.augmentation.fade_in_s,
                       true);
        check_interval(violations, base + ".augmentation.fade_out_s", role.augmentation.fade_out_s,
                       true);
        check_interval(violations, base + ".augmentation.distortion_drive",
                       role.augmentation.distortion_drive, true);
        check_interval(violations, base + ".augmentation.reverb_decay_s",
                       role.augmentation.reverb_decay_s, true);
        check_interval(violations, base + ".augmentation.reverb_wet", role.augmentation.reverb_wet,
                       true);
        if (role.augmentation.reverb_wet.hi > 1.0) {
            violations.push_back(base + ".augmentation.reverb_wet: must be <= 1");
        }
        if (role.allowed_tags && role.allowed_tags->empty()) {
            violations.push_back(base + ".allowed_tags: empty filter matches nothing");
        }
    }
    if (!any_role) violations.push_back("roles: at least one role must allow count >= 1");

    return violations;
}

InstantiatedScene instantiate_events(const SceneTemplate& tmpl,
                                     const std::vector<SourceClipMeta>& library, Rng& rng) {
    {
        const std::vector<std::string> violations = validate_template(tmpl);
        if (!violations.empty()) {
            throw DataError("invalid template: " + violations.front());
        }
    }

    InstantiatedScene scene;
    scene.duration_s = rng.uniform(tmpl.duration_range_s.lo, tmpl.duration_range_s.hi);

    std::vector<PlacedInterval> placed;
    std::vector<bool> used(library.size(), false);  // without replacement within one scene
    int event_id = 0;

    // Fixed role order keeps the draw sequence (and thus the dataset)
    // deterministic for a seed.
    for (TypeTag tag : kAllTypeTags) {
        const auto it = tmpl.roles.find(tag);
        if (it == tmpl.roles.end()) continue;
        const RoleSpec& role = it->second;

        const long long count = rng.uniform_int(role.count_range.lo, role.count_range.hi);
        if (count <= 0) continue;

        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < library.size(); ++i) {
            if (used[i] || library[i].type != tag) continue;
            if (role.allowed_tags) {
                const auto& tags = *role.allowed_tags;
                if (std::find(tags.begin(), tags.end(), library[i].id) == tags.end()) continue;
            }
            candidates.push_back(i);
        }
        if (static_cast<std::size_t>(count) > candidates.size()) {
            throw DataError("library insufficient for role '" + std::string(to_string(tag)) +
                            "': need " + std::to_string(count) + ", have " +
                            std::to_string(candidates.size()));
        }

        const std::vector<std::size_t> chosen =
            rng.sample_without_replacement(candidates.size(), static_cast<std::size_t>(count));

        long long placed_events = 0;
        for (std::size_t pick : chosen) {
            const SourceClipMeta& source = library[candidates[pick]];
            used[candidates[pick]] = true;

            EventPlan plan;
            plan.event_id = event_id;
            plan.source = source;
            plan.role = tag;
            plan.type = source.type;

            plan.augmentation.gain_db = rng.uniform(role.gain_db_range.lo, role.gain_db_range.hi);
            plan.augmentation.fade_in_s =
                rng.uniform(role.augmentation.fade_in_s.lo, role.augmentation.fade_in_s.hi);
            plan.augmentation.fade_out_s =
                rng.uniform(role.augmentation.fade_out_s.lo, role.augmentation.fade_out_s.hi);
            plan.augmentation.distortion_drive = rng.uniform(
                role.augmentation.distortion_drive.lo, role.augmentation.distortion_drive.hi);
            if (rng.bernoulli(tmpl.reverb_prob)) {
                ReverbSpec reverb;
                reverb.decay_s = rng.uniform(role.augmentation.reverb_decay_s.lo,
                                             role.augmentation.reverb_decay_s.hi);
                reverb.wet_mix =
                    rng.uniform(role.augmentation.reverb_wet.lo, role.augmentation.reverb_wet.hi);
                if (reverb.decay_s > 0.0 && reverb.wet_mix > 0.0) {
                    plan.augmentation.reverb = reverb;
                }
            }

            if (role.continuous) {
                // Offset is forced to 0, so the only resolution for a
                // constraint clash is failure.
                bool clash = false;
                if (role.no_self_overlap) {
                    for (const PlacedInterval& p : placed) {
                        if (p.role == tag) clash = true;
                    }
                }
                if (clash || !fits_concurrency(placed, 0.0, scene.duration_s,
                                               tmpl.max_concurrent)) {
                    throw DataError("constraints unsatisfiable for continuous role '" +
                                    std::string(to_string(tag)) + "'");
                }
                plan.occurrences.push_back({0.0, 0.0, scene.duration_s});
                placed.push_back({0.0, scene.duration_s, tag});
            } else {
                const long long repeats =
                    rng.uniform_int(role.repeat_range.lo, role.repeat_range.hi);
                for (long long r = 0; r < repeats; ++r) {
                    double clip_len = std::min(source.duration_s, scene.duration_s);
                    double clip_start = 0.0;
                    if (source.duration_s > scene.duration_s) {
                        clip_start = rng.uniform(0.0, source.duration_s - scene.duration_s);
                    }
                    bool ok = false;
                    for (int attempt = 0; attempt < kOffsetRetries && !ok; ++attempt) {
                        const double offset =
                            draw_offset(role.offset_policy, scene.duration_s, clip_len, rng);
                        const double end = std::min(offset + clip_len, scene.duration_s);
                        if (end - offset < 1e-6) continue;
                        if (role.no_self_overlap) {
                            bool clash = false;
                            for (const PlacedInterval& p : placed) {
                                if (p.role == tag && intersects(p.lo, p.hi, offset, end)) {
                                    clash = true;
                                    break;
                                }
                            }
                            if (clash) continue;
                        }
                        if (!fits_concurrency(placed, offset, end, tmpl.max_concurrent)) continue;
                        plan.occurrences.push_back({offset, clip_start, end - offset});
                        placed.push_back({offset, end, tag});
                        ok = true;
                    }
                    // Not placeable within the retry budget: degrade by
                    // dropping this repeat.
                }
            }

            if (plan.occurrences.empty()) {
                used[candidates[pick]] = false;  // the event never materialized
                continue;
            }
            std::sort(plan.occurrences.begin(), plan.occurrences.end(),
                      [](const Occurrence& a, const Occurrence& b) {
                          return a.offset_s < b.offset_s;
                      });
            scene.plans.push_back(std::move(plan));
            ++event_id;
            ++placed_events;
        }

        if (placed_events < role.count_range.lo) {
            throw DataError("constraints unsatisfiable for role '" + std::string(to_string(tag)) +
                            "' after bounded retries");
        }
    }

    return scene;
}

SupervisionParams sample_supervision_params(const SamplingConfig& config, Rng& rng) {
    if (config.styles.empty()) throw DataError("sampling config: empty style set");
    if (config.resolution_choices.empty()) {
        throw DataError("sampling config: empty resolution set");
    }
    if (config.merge_s.lo > config.merge_s.hi || config.merge_s.lo <= 0.0) {
        throw DataError("sampling config: bad merge range");
    }
    if (config.activity.lo > config.activity.hi || config.activity.lo <= 0.0 ||
        config.activity.hi >= 1.0) {
        throw DataError("sampling config: bad activity range");
    }

    SupervisionParams params;
    params.style = config.styles[rng.pick_index(config.styles.size())];
    params.merge_s = rng.uniform(config.merge_s.lo, config.merge_s.hi);
    params.activity = rng.log_uniform(config.activity.lo, config.activity.hi);
    params.resolution_s = config.resolution_choices[rng.pick_index(config.resolution_choices.size())];
    return params;
}

}  // namespace forge
