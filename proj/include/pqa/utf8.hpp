#pragma once

// UTF-8 decoding/encoding and the small amount of Unicode character
// classification the toolkit needs. All text offsets exposed by the library
// are Unicode scalar-value indices, so everything that slices text goes
// through decode()/encode().

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace pqa::utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

/// Decodes UTF-8. Malformed sequences become U+FFFD, one per offending byte.
inline std::u32string decode(std::string_view in) {
    std::u32string out;
    out.reserve(in.size());
    const auto* s = reinterpret_cast<const unsigned char*>(in.data());
    const std::size_t n = in.size();
    std::size_t i = 0;
    while (i < n) {
        const unsigned char c = s[i];
        if (c < 0x80) {
            out.push_back(c);
            ++i;
            continue;
        }
        int len = 0;
        char32_t cp = 0;
        char32_t min = 0;
        if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
            min = 0x80;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
            min = 0x800;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
            min = 0x10000;
        } else {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        if (i + len > n) {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        bool ok = true;
        for (int k = 1; k < len; ++k) {
            const unsigned char cc = s[i + k];
            if ((cc & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (!ok || cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline void append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string encode(std::u32string_view in) {
    std::string out;
    out.reserve(in.size());
    for (char32_t cp : in) append(out, cp);
    return out;
}

/// Number of scalar values in a UTF-8 string.
inline std::size_t length(std::string_view s) { return decode(s).size(); }

/// Scalar-value slice [start, end) of a UTF-8 string, clamped to its length.
inline std::string slice(std::string_view s, std::size_t start, std::size_t end) {
    const std::u32string cps = decode(s);
    end = std::min(end, cps.size());
    start = std::min(start, end);
    return encode(std::u32string_view(cps).substr(start, end - start));
}

// Simple (1:1) lowercase mapping for Latin, Greek and Cyrillic. No locale
// rules, no multi-character expansions.
constexpr char32_t to_lower(char32_t c) {
    if (c < 0x80) return (c >= 'A' && c <= 'Z') ? c + 32 : c;
    if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
    if (c == 0x130) return U'i';
    if (c == 0x178) return 0xFF;
    if (c >= 0x100 && c <= 0x137) return (c % 2 == 0) ? c + 1 : c;
    if (c >= 0x139 && c <= 0x148) return (c % 2 == 1) ? c + 1 : c;
    if (c >= 0x14A && c <= 0x177) return (c % 2 == 0) ? c + 1 : c;
    if (c >= 0x179 && c <= 0x17E) return (c % 2 == 1) ? c + 1 : c;
    if (c == 0x386) return 0x3AC;
    if (c >= 0x388 && c <= 0x38A) return c + 37;
    if (c == 0x38C) return 0x3CC;
    if (c == 0x38E || c == 0x38F) return c + 63;
    if (c >= 0x391 && c <= 0x3AB && c != 0x3A2) return c + 32;
    if (c >= 0x400 && c <= 0x40F) return c + 80;
    if (c >= 0x410 && c <= 0x42F) return c + 32;
    return c;
}

constexpr bool is_upper(char32_t c) { return to_lower(c) != c; }

constexpr bool is_digit(char32_t c) { return c >= '0' && c <= '9'; }

constexpr bool is_space(char32_t c) {
    switch (c) {
        case U' ': case U'\t': case U'\n': case U'\v': case U'\f': case U'\r':
        case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return c >= 0x2000 && c <= 0x200A;
    }
}

/// Letters and digits, approximated without a Unicode database: every
/// non-ASCII scalar outside the known punctuation, symbol and space blocks
/// counts as a word character.
constexpr bool is_word(char32_t c) {
    if (c < 0x80) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || is_digit(c);
    }
    if (is_space(c)) return false;
    if (c <= 0xBF) {
        // Latin-1 controls and punctuation; ª ² ³ µ ¹ º ¼ ½ ¾ are letter-like.
        switch (c) {
            case 0xAA: case 0xB2: case 0xB3: case 0xB5: case 0xB9: case 0xBA:
            case 0xBC: case 0xBD: case 0xBE:
                return true;
            default:
                return false;
        }
    }
    if (c == 0xD7 || c == 0xF7) return false;
    if (c >= 0x2000 && c <= 0x206F) return false;  // general punctuation
    if (c >= 0x20A0 && c <= 0x20CF) return false;  // currency
    if (c >= 0x2190 && c <= 0x23FF) return false;  // arrows, math, technical
    if (c >= 0x2500 && c <= 0x27BF) return false;  // box drawing, dingbats
    if (c >= 0x2E00 && c <= 0x2E7F) return false;  // supplemental punctuation
    if (c >= 0x3000 && c <= 0x303F) return false;  // CJK punctuation
    if (c >= 0xFE30 && c <= 0xFE4F) return false;
    if (c >= 0xFF00 && c <= 0xFF0F) return false;  // fullwidth punctuation
    if (c >= 0xFF1A && c <= 0xFF20) return false;
    if (c >= 0xFF3B && c <= 0xFF40) return false;
    if (c >= 0xFF5B && c <= 0xFF65) return false;
    if (c >= 0xFFF0 && c <= 0xFFFF) return false;
    if (c >= 0x1F000 && c <= 0x1FAFF) return false;  // emoji, pictographs
    return true;
}

constexpr bool is_apostrophe(char32_t c) { return c == U'\'' || c == 0x2019; }

inline std::u32string lower(std::u32string_view s) {
    std::u32string out(s);
    for (auto& c : out) c = to_lower(c);
    return out;
}

inline std::string lower(std::string_view s) { return encode(lower(decode(s))); }

}  // namespace pqa::utf8
