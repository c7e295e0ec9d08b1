#include "forge/common.hpp"

namespace forge {

std::string_view to_string(TypeTag tag) {
    switch (tag) {
        case TypeTag::music: return "music";
        case TypeTag::sfx: return "sfx";
        case TypeTag::speech: return "speech";
        case TypeTag::background: return "background";
    }
    return "music";
}

bool try_type_tag_from_string(std::string_view name, TypeTag* out) {
    for (TypeTag tag : kAllTypeTags) {
        if (name == to_string(tag)) {
            *out = tag;
            return true;
        }
    }
    return false;
}

TypeTag type_tag_from_string(std::string_view name) {
    TypeTag tag;
    if (!try_type_tag_from_string(name, &tag)) {
        throw DataError("unknown type tag: " + std::string(name));
    }
    return tag;
}

std::string header_noun(TypeTag tag, long long count) {
    switch (tag) {
        case TypeTag::music: return "music";
        case TypeTag::sfx: return count == 1 ? "sound effect" : "sound effects";
        case TypeTag::speech: return "speech";
        case TypeTag::background: return "background";
    }
    return "music";
}

bool try_type_tag_from_noun(std::string_view noun, TypeTag* out) {
    if (noun == "sound effect" || noun == "sound effects" || noun == "sfx") {
        *out = TypeTag::sfx;
        return true;
    }
    if (noun == "music") {
        *out = TypeTag::music;
        return true;
    }
    if (noun == "speech") {
        *out = TypeTag::speech;
        return true;
    }
    if (noun == "background" || noun == "backgrounds") {
        *out = TypeTag::background;
        return true;
    }
    return false;
}

int header_count_rank(TypeTag tag) {
    switch (tag) {
        case TypeTag::sfx: return 0;
        case TypeTag::music: return 1;
        case TypeTag::speech: return 2;
        case TypeTag::background: return 3;
    }
    return 3;
}

std::string_view to_string(CaptionStyle style) {
    switch (style) {
        case CaptionStyle::keywords: return "keywords";
        case CaptionStyle::brief: return "brief";
        case CaptionStyle::detailed: return "detailed";
    }
    return "brief";
}

CaptionStyle caption_style_from_string(std::string_view name) {
    if (name == "keywords" || name == "kw") return CaptionStyle::keywords;
    if (name == "brief") return CaptionStyle::brief;
    if (name == "detailed") return CaptionStyle::detailed;
    throw DataError("unknown caption style: " + std::string(name));
}

}  // namespace forge
