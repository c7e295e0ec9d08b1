#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace forge {

// Error taxonomy. The CLI maps these onto exit codes: DataError -> 2,
// BackendError -> 3, anything CLI11 rejects -> 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input data: malformed files, schema violations, unsatisfiable
// templates, caption syntax errors.
class DataError : public Error {
public:
    using Error::Error;
};

// A remote judge/scorer failed (network, bad status, malformed reply).
class BackendError : public Error {
public:
    using Error::Error;
};

// Caption/prompt text that does not follow the grammar. Carries the
// position of the offending character (0-based offset plus 1-based
// line/column) and, for semantic errors, the event index.
class CaptionParseError : public DataError {
public:
    CaptionParseError(const std::string& what, std::size_t offset, std::size_t line,
                      std::size_t column, int event_index = -1)
        : DataError(what + " (line " + std::to_string(line) + ", column " +
                    std::to_string(column) +
                    (event_index >= 0 ? ", event " + std::to_string(event_index) : "") + ")"),
          offset(offset),
          line(line),
          column(column),
          event_index(event_index) {}

    std::size_t offset = 0;
    std::size_t line = 1;
    std::size_t column = 1;
    int event_index = -1;  // -1 when the error is not tied to one event
};

// The four source categories. Enum order doubles as the tie-break order
// when sorting caption events with equal start times.
enum class TypeTag { music, sfx, speech, background };

inline constexpr TypeTag kAllTypeTags[] = {TypeTag::music, TypeTag::sfx, TypeTag::speech,
                                           TypeTag::background};

std::string_view to_string(TypeTag tag);
TypeTag type_tag_from_string(std::string_view name);
bool try_type_tag_from_string(std::string_view name, TypeTag* out);

// Noun used by the caption header ("2 sound effects, 1 music").
std::string header_noun(TypeTag tag, long long count);
// Inverse of header_noun, tolerant of singular/plural variants.
bool try_type_tag_from_noun(std::string_view noun, TypeTag* out);

// Tie-break rank used when sorting header type counts (differs from the
// event-ordering rank, which is the enum order).
int header_count_rank(TypeTag tag);

enum class CaptionStyle { keywords, brief, detailed };

std::string_view to_string(CaptionStyle style);
CaptionStyle caption_style_from_string(std::string_view name);

}  // namespace forge
