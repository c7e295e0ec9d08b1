#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "forge/common.hpp"
#include "forge/supervision.hpp"

namespace forge {

enum class TimestampStyle { tokenized, plain };

// Controls the caption wire format. Tokenized timestamps render as atomic
// "<|d.dd|>s" tokens and fix two decimals; plain style renders "d.ds"
// literals with a configurable decimal count.
struct WireOptions {
    TimestampStyle timestamp_style = TimestampStyle::tokenized;
    int decimals = 2;  // [0, 3]; must be 2 when tokenized
    bool include_chat_wrapper = false;
    bool include_header = true;

    bool operator==(const WireOptions&) const = default;
};

void validate_options(const WireOptions& options);

// Decimal count that matches a timestamp grid: ceil(-log10(resolution)),
// clamped to [0, 3]. 0.5 s -> 1 decimal, 0.01 s -> 2.
int decimals_for_resolution(double resolution_s);

// Half-open character range into a serialized caption. Timestamp spans cover
// exactly one "<|d.dd|>" token (tokenized) or one decimal literal (plain),
// excluding the trailing "s".
struct CharSpan {
    enum class Kind { timestamp, other };
    std::size_t start = 0;
    std::size_t end = 0;
    Kind kind = Kind::timestamp;

    bool operator==(const CharSpan&) const = default;
};

// "Describe all events in the audio. Give start and end times.
//  [style=brief, merge=0.25s, activity=0.05, resolution=0.10s]"
std::string format_prompt(const SupervisionParams& params, bool include_chat_wrapper = false);
SupervisionParams parse_prompt(const std::string& text);

std::string format_caption(const CaptionDocument& doc, const WireOptions& options = {});

// Inverse of format_caption. Grammar:
//   Document  := [Header] EventLine*        (at least one of the two)
//   EventLine := "[" tag "]" description "from" RangeList "." [SpeechSpan]
//   RangeList := Range ("," Range)*
//   Range     := Time "to" Time
//   Time      := "<|d.dd|>s" | decimal "s"
// The description/range split is the last " from " whose suffix is a valid
// terminal RangeList. Unknown tags, unordered or inverted ranges, and times
// beyond 10,000 s are rejected with positions. Whitespace between sentences
// is free-form; the trailing period may be omitted; a chat wrapper is
// stripped when present.
CaptionDocument parse_caption(const std::string& text, const WireOptions& options = {});

// One span per timestamp occurrence, in order, non-overlapping. For
// tokenized text this is a lexical scan; for plain text the spans are
// grammar-derived (unparseable text without tokens yields none).
std::vector<CharSpan> timestamp_spans(const std::string& text);

// Attaches transcripts by event index. Every index must refer to a
// speech-tagged event.
CaptionDocument expand_speech(const CaptionDocument& doc,
                              const std::map<std::size_t, std::string>& transcripts);

}  // namespace forge
