#include "forge/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string_view>

namespace forge {

namespace {

constexpr std::string_view kPromptSentence =
    "Describe all events in the audio. Give start and end times. ";
constexpr std::string_view kUserOpen = "<|im_start|>user ";
constexpr std::string_view kUserClose = " <|im_end|>";
constexpr std::string_view kAssistantOpen = "<|im_start|>assistant ";
constexpr std::string_view kAssistantClose = "<|im_end|>";
constexpr std::string_view kSpeechOpen = "<speech>";
constexpr std::string_view kSpeechClose = "</speech>";
constexpr double kMaxTime = 10000.0;

std::string fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

std::string format_time(double value, const WireOptions& options) {
    if (options.timestamp_style == TimestampStyle::tokenized) {
        return "<|" + fixed(value, 2) + "|>s";
    }
    return fixed(value, options.decimals) + "s";
}

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

struct LineCol {
    std::size_t line = 1;
    std::size_t column = 1;
};

LineCol line_col(std::string_view text, std::size_t offset) {
    LineCol lc;
    std::size_t line_start = 0;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++lc.line;
            line_start = i + 1;
        }
    }
    lc.column = offset - line_start + 1;
    return lc;
}

[[noreturn]] void fail(std::string_view text, std::size_t offset, const std::string& what,
                       int event_index = -1) {
    const LineCol lc = line_col(text, offset);
    throw CaptionParseError(what, offset, lc.line, lc.column, event_index);
}

// Cursor over the full document; all offsets stay absolute so errors point
// at the right character.
struct Scanner {
    std::string_view text;
    std::size_t pos = 0;

    bool done() const { return pos >= text.size(); }
    char peek() const { return pos < text.size() ? text[pos] : '\0'; }

    void skip_ws() {
        while (pos < text.size() && is_ws(text[pos])) ++pos;
    }

    bool consume(std::string_view token) {
        if (text.substr(pos, token.size()) == token) {
            pos += token.size();
            return true;
        }
        return false;
    }

    bool consume_word(std::string_view word) {
        // A word match must end at a non-letter boundary.
        if (text.substr(pos, word.size()) != word) return false;
        const std::size_t after = pos + word.size();
        if (after < text.size() && std::isalpha(static_cast<unsigned char>(text[after]))) {
            return false;
        }
        pos = after;
        return true;
    }

    bool parse_integer(long long* out) {
        std::size_t p = pos;
        if (p >= text.size() || !is_digit(text[p])) return false;
        long long value = 0;
        while (p < text.size() && is_digit(text[p])) {
            value = value * 10 + (text[p] - '0');
            ++p;
        }
        *out = value;
        pos = p;
        return true;
    }
};

// Parses a full time literal at `pos`; returns false without moving on
// mismatch. On success advances past the trailing "s" and reports the value
// and the span of the numeric token.
bool parse_time(std::string_view text, std::size_t* pos, double* value, CharSpan* span) {
    std::size_t p = *pos;
    const bool tokenized = text.substr(p, 2) == "<|";
    const std::size_t token_start = p;
    if (tokenized) p += 2;

    const std::size_t digits_start = p;
    while (p < text.size() && is_digit(text[p])) ++p;
    if (p == digits_start) return false;
    std::size_t frac_digits = 0;
    if (p < text.size() && text[p] == '.') {
        ++p;
        const std::size_t frac_start = p;
        while (p < text.size() && is_digit(text[p])) ++p;
        frac_digits = p - frac_start;
        if (frac_digits == 0) return false;
    }
    const std::size_t digits_end = p;

    if (tokenized) {
        if (frac_digits != 2) return false;  // tokens are exactly "<|d.dd|>"
        if (text.substr(p, 2) != "|>") return false;
        p += 2;
    }
    if (p >= text.size() || text[p] != 's') return false;
    ++p;

    *value = std::stod(std::string(text.substr(digits_start, digits_end - digits_start)));
    if (span) {
        span->start = tokenized ? token_start : digits_start;
        span->end = tokenized ? digits_end + 2 : digits_end;
        span->kind = CharSpan::Kind::timestamp;
    }
    *pos = p;
    return true;
}

// Attempts to parse text[begin, end) as a complete RangeList. Returns false
// without reporting when the region is not one; semantic checks (order,
// bounds) are deferred to the caller so they fire only on the chosen split.
bool try_parse_range_list(std::string_view text, std::size_t begin, std::size_t end,
                          std::vector<TimeSegment>* segments, std::vector<CharSpan>* spans,
                          std::vector<std::size_t>* range_offsets) {
    segments->clear();
    if (spans) spans->clear();
    if (range_offsets) range_offsets->clear();
    std::size_t p = begin;
    while (true) {
        while (p < end && is_ws(text[p])) ++p;
        const std::size_t range_at = p;
        double start = 0.0, stop = 0.0;
        CharSpan span_a, span_b;
        if (!parse_time(text, &p, &start, &span_a)) return false;
        while (p < end && is_ws(text[p])) ++p;
        if (text.substr(p, 2) != "to") return false;
        p += 2;
        if (p >= end || !is_ws(text[p])) return false;
        while (p < end && is_ws(text[p])) ++p;
        if (!parse_time(text, &p, &stop, &span_b)) return false;
        if (p > end) return false;
        segments->push_back({start, stop});
        if (spans) {
            spans->push_back(span_a);
            spans->push_back(span_b);
        }
        if (range_offsets) range_offsets->push_back(range_at);
        while (p < end && is_ws(text[p])) ++p;
        if (p == end) return true;
        if (text[p] != ',') return false;
        ++p;
    }
}

std::size_t rtrim(std::string_view text, std::size_t begin, std::size_t end) {
    while (end > begin && is_ws(text[end - 1])) --end;
    return end;
}

std::size_t ltrim(std::string_view text, std::size_t begin, std::size_t end) {
    while (begin < end && is_ws(text[begin])) ++begin;
    return begin;
}

// Next event boundary: a "[tag]" occurrence outside <speech>...</speech>.
std::size_t find_event_start(std::string_view text, std::size_t from) {
    std::size_t p = from;
    while (p < text.size()) {
        if (text.substr(p, kSpeechOpen.size()) == kSpeechOpen) {
            const std::size_t close = text.find(kSpeechClose, p);
            p = close == std::string_view::npos ? text.size() : close + kSpeechClose.size();
            continue;
        }
        if (text[p] == '[') {
            const std::size_t close = text.find(']', p);
            if (close != std::string_view::npos) {
                TypeTag tag;
                if (try_type_tag_from_string(text.substr(p + 1, close - p - 1), &tag)) return p;
            }
        }
        ++p;
    }
    return text.size();
}

struct ParsedHeader {
    bool present = false;
    long long total = 0;
    bool overlap_present = false;
    long long overlap = 0;
    bool counts_present = false;
    std::vector<TypeCount> counts;
};

ParsedHeader parse_header(Scanner& s) {
    ParsedHeader header;
    s.skip_ws();
    Scanner saved = s;

    long long total = 0;
    if (!s.parse_integer(&total)) return header;
    s.skip_ws();
    if (!s.consume_word("events") && !s.consume_word("event")) {
        s = saved;
        return header;
    }
    s.skip_ws();
    if (!s.consume_word("total")) {
        s = saved;
        return header;
    }
    s.skip_ws();
    if (!s.consume(".")) {
        s = saved;
        return header;
    }
    header.present = true;
    header.total = total;

    // Optional "N events overlap."
    saved = s;
    s.skip_ws();
    long long overlap = 0;
    if (s.parse_integer(&overlap)) {
        s.skip_ws();
        bool ok = s.consume_word("events") || s.consume_word("event");
        if (ok) {
            s.skip_ws();
            ok = s.consume_word("overlap") || s.consume_word("overlaps");
        }
        if (ok) {
            s.skip_ws();
            ok = s.consume(".");
        }
        if (ok) {
            header.overlap_present = true;
            header.overlap = overlap;
        } else {
            s = saved;
        }
    } else {
        s = saved;
    }

    // Optional "2 sound effects, 1 music."
    saved = s;
    s.skip_ws();
    long long count = 0;
    if (!s.parse_integer(&count)) {
        s = saved;
        return header;
    }
    std::vector<TypeCount> counts;
    while (true) {
        s.skip_ws();
        TypeTag tag;
        bool matched = false;
        // Longest noun first so "sound effects" wins over "sound effect".
        for (std::string_view noun : {"sound effects", "sound effect", "sfx", "backgrounds",
                                      "background", "music", "speech"}) {
            Scanner probe = s;
            if (probe.consume_word(noun) && try_type_tag_from_noun(noun, &tag)) {
                s = probe;
                matched = true;
                break;
            }
        }
        if (!matched) {
            s = saved;
            return header;
        }
        counts.push_back({tag, count});
        s.skip_ws();
        if (s.consume(".")) break;
        if (!s.consume(",")) {
            s = saved;
            return header;
        }
        s.skip_ws();
        if (!s.parse_integer(&count)) {
            s = saved;
            return header;
        }
    }
    header.counts_present = true;
    header.counts = std::move(counts);
    return header;
}

std::string strip_wrapper(const std::string& text, std::string_view open,
                          std::string_view close_token) {
    std::size_t begin = ltrim(text, 0, text.size());
    std::size_t end = rtrim(text, begin, text.size());
    std::string_view view(text);
    if (view.substr(begin, open.size()) == open) begin += open.size();
    std::string_view tail = view.substr(begin, end - begin);
    if (tail.size() >= close_token.size() &&
        tail.substr(tail.size() - close_token.size()) == close_token) {
        end -= close_token.size();
        end = rtrim(text, begin, end);
    }
    return std::string(view.substr(begin, end - begin));
}

CaptionDocument parse_caption_impl(const std::string& raw, std::vector<CharSpan>* spans_out) {
    // Tolerate a chat wrapper whether or not the caller expected one.
    std::string text = strip_wrapper(raw, kAssistantOpen, kAssistantClose);
    if (spans_out) {
        // Span offsets must index the original string.
        text = raw;
    }

    std::string_view view(text);
    Scanner scanner{view, 0};
    if (spans_out) {
        // Skip the wrapper token lexically so it is not mistaken for text.
        scanner.skip_ws();
        scanner.consume(kAssistantOpen);
    }

    const ParsedHeader header = parse_header(scanner);

    CaptionDocument doc;
    std::vector<CharSpan> spans;

    int event_index = 0;
    scanner.skip_ws();
    while (!scanner.done()) {
        if (spans_out && scanner.consume(kAssistantClose)) {
            scanner.skip_ws();
            continue;
        }
        const std::size_t event_at = scanner.pos;
        if (scanner.peek() != '[') {
            fail(view, event_at, "expected '[' starting an event line");
        }
        const std::size_t tag_close = view.find(']', scanner.pos);
        if (tag_close == std::string_view::npos) {
            fail(view, event_at, "unterminated type tag");
        }
        TypeTag tag;
        const std::string_view tag_name = view.substr(event_at + 1, tag_close - event_at - 1);
        if (!try_type_tag_from_string(tag_name, &tag)) {
            fail(view, event_at + 1, "unknown type tag '" + std::string(tag_name) + "'",
                 event_index);
        }

        std::size_t chunk_end = find_event_start(view, tag_close + 1);
        if (spans_out) {
            const std::size_t close_at = view.find(kAssistantClose, tag_close + 1);
            if (close_at != std::string_view::npos) chunk_end = std::min(chunk_end, close_at);
        }

        std::size_t body_end = rtrim(view, tag_close + 1, chunk_end);

        // Optional speech span at the very end of the line.
        std::string transcript;
        if (body_end >= kSpeechClose.size() &&
            view.substr(body_end - kSpeechClose.size(), kSpeechClose.size()) == kSpeechClose) {
            const std::size_t open_at = view.rfind(kSpeechOpen, body_end - kSpeechClose.size());
            if (open_at == std::string_view::npos || open_at < tag_close) {
                fail(view, body_end - kSpeechClose.size(), "speech span without opening tag",
                     event_index);
            }
            transcript = std::string(view.substr(open_at + kSpeechOpen.size(),
                                                 body_end - kSpeechClose.size() - open_at -
                                                     kSpeechOpen.size()));
            body_end = rtrim(view, tag_close + 1, open_at);
        }

        // Canonical lines end with '.'; its absence is tolerated.
        if (body_end > tag_close + 1 && view[body_end - 1] == '.') {
            --body_end;
        }

        // Split at the last " from " whose suffix is a valid RangeList.
        std::vector<TimeSegment> segments;
        std::vector<CharSpan> time_spans;
        std::vector<std::size_t> range_offsets;
        std::size_t desc_end = std::string_view::npos;
        std::size_t search_end = body_end;
        while (true) {
            const std::size_t from_at =
                view.substr(0, search_end).rfind(" from ", search_end);
            if (from_at == std::string_view::npos || from_at < tag_close) break;
            if (try_parse_range_list(view, from_at + 6, body_end, &segments, &time_spans,
                                     &range_offsets)) {
                desc_end = from_at;
                break;
            }
            search_end = from_at;
        }
        if (desc_end == std::string_view::npos) {
            fail(view, event_at, "event line has no valid time range list", event_index);
        }

        const std::size_t desc_begin = ltrim(view, tag_close + 1, desc_end);
        const std::size_t desc_stop = rtrim(view, desc_begin, desc_end);
        if (desc_stop <= desc_begin) {
            fail(view, tag_close + 1, "empty event description", event_index);
        }

        for (std::size_t i = 0; i < segments.size(); ++i) {
            const TimeSegment& seg = segments[i];
            if (seg.start_s > kMaxTime || seg.end_s > kMaxTime) {
                fail(view, range_offsets[i], "timestamp beyond 10000 s", event_index);
            }
            if (seg.end_s <= seg.start_s) {
                fail(view, range_offsets[i], "range end must be after start", event_index);
            }
            if (i > 0 && seg.start_s < segments[i - 1].start_s) {
                fail(view, range_offsets[i], "ranges not ordered by start time", event_index);
            }
        }

        GroundTruthEvent event;
        event.type = tag;
        event.description = std::string(view.substr(desc_begin, desc_stop - desc_begin));
        event.segments = std::move(segments);
        event.transcript = std::move(transcript);
        doc.events.push_back(std::move(event));
        spans.insert(spans.end(), time_spans.begin(), time_spans.end());

        ++event_index;
        scanner.pos = chunk_end;
        scanner.skip_ws();
    }

    if (!header.present && doc.events.empty()) {
        fail(view, 0, "empty caption: expected a header or at least one event line");
    }

    std::stable_sort(doc.events.begin(), doc.events.end(), document_event_less);

    const CaptionHeader recomputed = compute_header(doc.events);
    if (header.present) {
        doc.header.total_events = header.total;
        doc.header.max_overlap = header.overlap_present ? header.overlap : recomputed.max_overlap;
        doc.header.type_counts = header.counts_present ? header.counts : recomputed.type_counts;
    } else {
        doc.header = recomputed;
    }

    if (spans_out) *spans_out = std::move(spans);
    return doc;
}

}  // namespace

void validate_options(const WireOptions& options) {
    if (options.decimals < 0 || options.decimals > 3) {
        throw DataError("wire options: decimals must be in [0, 3]");
    }
    if (options.timestamp_style == TimestampStyle::tokenized && options.decimals != 2) {
        throw DataError("wire options: tokenized timestamps fix 2 decimals");
    }
}

int decimals_for_resolution(double resolution_s) {
    if (resolution_s <= 0.0) return 2;
    const int d = static_cast<int>(std::ceil(-std::log10(resolution_s) - 1e-9));
    return std::clamp(d, 0, 3);
}

std::string format_prompt(const SupervisionParams& params, bool include_chat_wrapper) {
    validate_params(params);
    std::string out;
    if (include_chat_wrapper) out += kUserOpen;
    out += kPromptSentence;
    out += "[style=";
    out += to_string(params.style);
    out += ", merge=" + fixed(params.merge_s, 2) + "s";
    out += ", activity=" + fixed(params.activity, 2);
    out += ", resolution=" + fixed(params.resolution_s, 2) + "s]";
    if (include_chat_wrapper) out += kUserClose;
    return out;
}

SupervisionParams parse_prompt(const std::string& raw) {
    const std::string text = strip_wrapper(raw, kUserOpen, "<|im_end|>");
    std::string_view view(text);
    const std::size_t open = view.rfind("[style=");
    if (open == std::string_view::npos) {
        fail(view, 0, "prompt has no [style=...] parameter block");
    }
    Scanner s{view, open + 1};

    SupervisionParams params;
    auto read_value = [&](std::string_view key, bool unit_s) {
        s.skip_ws();
        if (!s.consume(key) || !s.consume("=")) {
            fail(view, s.pos, "expected '" + std::string(key) + "=' in parameter block");
        }
        const std::size_t at = s.pos;
        std::size_t p = s.pos;
        while (p < view.size() && (is_digit(view[p]) || view[p] == '.')) ++p;
        if (p == at) fail(view, at, "expected a number in parameter block");
        const double value = std::stod(std::string(view.substr(at, p - at)));
        s.pos = p;
        if (unit_s && !s.consume("s")) fail(view, s.pos, "expected 's' unit");
        return value;
    };

    s.skip_ws();
    if (!s.consume("style") || !s.consume("=")) fail(view, s.pos, "expected 'style='");
    const std::size_t style_at = s.pos;
    std::size_t p = s.pos;
    while (p < view.size() && std::isalpha(static_cast<unsigned char>(view[p]))) ++p;
    try {
        params.style = caption_style_from_string(view.substr(style_at, p - style_at));
    } catch (const DataError&) {
        fail(view, style_at, "unknown caption style in prompt");
    }
    s.pos = p;
    s.skip_ws();
    if (!s.consume(",")) fail(view, s.pos, "expected ',' after style");
    params.merge_s = read_value("merge", true);
    s.skip_ws();
    if (!s.consume(",")) fail(view, s.pos, "expected ',' after merge");
    params.activity = read_value("activity", false);
    s.skip_ws();
    if (!s.consume(",")) fail(view, s.pos, "expected ',' after activity");
    params.resolution_s = read_value("resolution", true);
    s.skip_ws();
    if (!s.consume("]")) fail(view, s.pos, "expected ']' closing the parameter block");
    validate_params(params);
    return params;
}

std::string format_caption(const CaptionDocument& doc, const WireOptions& options) {
    validate_options(options);

    std::string out;
    if (options.include_chat_wrapper) out += kAssistantOpen;

    bool first = true;
    auto append_sentence = [&](const std::string& sentence) {
        if (!first) out += ' ';
        out += sentence;
        first = false;
    };

    if (options.include_header) {
        const CaptionHeader& header = doc.header;
        append_sentence(std::to_string(header.total_events) +
                        (header.total_events == 1 ? " event total." : " events total."));
        if (header.max_overlap >= 2) {
            append_sentence(std::to_string(header.max_overlap) + " events overlap.");
        }
        if (!header.type_counts.empty()) {
            std::string sentence;
            for (std::size_t i = 0; i < header.type_counts.size(); ++i) {
                if (i > 0) sentence += ", ";
                sentence += std::to_string(header.type_counts[i].count) + " " +
                            header_noun(header.type_counts[i].type, header.type_counts[i].count);
            }
            append_sentence(sentence + ".");
        }
    }

    for (const GroundTruthEvent& event : doc.events) {
        std::string line = "[" + std::string(to_string(event.type)) + "] " + event.description +
                           " from ";
        for (std::size_t i = 0; i < event.segments.size(); ++i) {
            if (i > 0) line += ", ";
            line += format_time(event.segments[i].start_s, options) + " to " +
                    format_time(event.segments[i].end_s, options);
        }
        line += ".";
        if (!event.transcript.empty()) {
            line += " ";
            line += kSpeechOpen;
            line += event.transcript;
            line += kSpeechClose;
        }
        append_sentence(line);
    }

    if (options.include_chat_wrapper) out += kAssistantClose;
    return out;
}

CaptionDocument parse_caption(const std::string& text, const WireOptions& options) {
    validate_options(options);
    return parse_caption_impl(text, nullptr);
}

std::vector<CharSpan> timestamp_spans(const std::string& text) {
    std::vector<CharSpan> spans;
    std::string_view view(text);
    std::size_t p = 0;
    while ((p = view.find("<|", p)) != std::string_view::npos) {
        const std::size_t close = view.find("|>", p + 2);
        if (close == std::string_view::npos) break;
        const std::string_view inner = view.substr(p + 2, close - p - 2);
        bool valid = !inner.empty();
        std::size_t dot = std::string_view::npos;
        for (std::size_t i = 0; i < inner.size() && valid; ++i) {
            if (inner[i] == '.') {
                if (dot != std::string_view::npos) valid = false;
                dot = i;
            } else if (!is_digit(inner[i])) {
                valid = false;
            }
        }
        if (valid && (dot == std::string_view::npos || dot == 0 || dot == inner.size() - 1)) {
            valid = false;  // need digits on both sides of the dot
        }
        if (valid && inner.size() - dot - 1 != 2) valid = false;  // exactly 2 decimals
        if (valid) spans.push_back({p, close + 2, CharSpan::Kind::timestamp});
        p = close + 2;
    }
    if (!spans.empty()) return spans;

    // Plain style: derive spans from the grammar.
    try {
        parse_caption_impl(text, &spans);
    } catch (const CaptionParseError&) {
        return {};
    }
    return spans;
}

CaptionDocument expand_speech(const CaptionDocument& doc,
                              const std::map<std::size_t, std::string>& transcripts) {
    CaptionDocument out = doc;
    for (const auto& [index, transcript] : transcripts) {
        if (index >= out.events.size()) {
            throw DataError("expand_speech: event index " + std::to_string(index) +
                            " out of range");
        }
        if (out.events[index].type != TypeTag::speech) {
            throw DataError("expand_speech: event " + std::to_string(index) +
                            " is not speech-tagged");
        }
        out.events[index].transcript = transcript;
    }
    return out;
}

}  // namespace forge
