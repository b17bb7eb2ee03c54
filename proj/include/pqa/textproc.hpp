#pragma once

// Tokenization, sentence segmentation and answer normalization. Every other
// module builds on these, so they are pure and deterministic: the same input
// always produces bitwise-identical output.

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "pqa/detail/abbreviations.hpp"
#include "pqa/utf8.hpp"

namespace pqa {

enum class SourceKind { news, wiki, other };

inline std::string_view to_string(SourceKind k) {
    switch (k) {
        case SourceKind::news: return "news";
        case SourceKind::wiki: return "wiki";
        case SourceKind::other: return "other";
    }
    return "other";
}

inline bool parse_source_kind(std::string_view s, SourceKind& out) {
    if (s == "news") out = SourceKind::news;
    else if (s == "wiki") out = SourceKind::wiki;
    else if (s == "other") out = SourceKind::other;
    else return false;
    return true;
}

struct RawDocument {
    std::string id;
    SourceKind source = SourceKind::other;
    std::string title;
    std::string text;

    friend bool operator==(const RawDocument&, const RawDocument&) = default;
};

/// A token and its position in the source, in Unicode scalar values.
/// `term` is the case-folded surface used by every comparison.
struct Token {
    std::string surface;
    std::size_t char_start = 0;
    std::size_t char_end = 0;
    std::string term;

    friend bool operator==(const Token&, const Token&) = default;
};

struct TokenizedText {
    std::string source;
    std::vector<Token> tokens;

    std::size_t size() const { return tokens.size(); }
    bool empty() const { return tokens.empty(); }

    std::vector<std::string> terms() const {
        std::vector<std::string> out;
        out.reserve(tokens.size());
        for (const auto& t : tokens) out.push_back(t.term);
        return out;
    }

    friend bool operator==(const TokenizedText&, const TokenizedText&) = default;
};

/// Half-open scalar-value range of one sentence; `index` is its 0-based
/// position in the passage.
struct SentenceSpan {
    std::size_t char_start = 0;
    std::size_t char_end = 0;
    std::size_t index = 0;

    friend bool operator==(const SentenceSpan&, const SentenceSpan&) = default;
};

namespace detail {

inline std::vector<Token> tokenize_codepoints(std::u32string_view cps) {
    std::vector<Token> tokens;
    const std::size_t n = cps.size();
    std::size_t i = 0;
    while (i < n) {
        if (!utf8::is_word(cps[i])) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < n) {
            if (utf8::is_word(cps[i])) {
                ++i;
            } else if (utf8::is_apostrophe(cps[i]) && i + 1 < n && utf8::is_word(cps[i + 1])) {
                i += 2;
            } else {
                break;
            }
        }
        const auto piece = cps.substr(start, i - start);
        tokens.push_back(Token{utf8::encode(piece), start, i, utf8::encode(utf8::lower(piece))});
    }
    return tokens;
}

constexpr bool is_terminator(char32_t c) { return c == U'.' || c == U'?' || c == U'!'; }

constexpr bool is_closer(char32_t c) {
    return c == U'"' || c == U'\'' || c == U')' || c == U']' || c == 0x201D || c == 0x2019 ||
           c == 0xBB;
}

constexpr bool is_opener(char32_t c) {
    return c == U'"' || c == U'\'' || c == U'(' || c == U'[' || c == 0x201C || c == 0x2018 ||
           c == 0xAB;
}

inline bool is_abbreviation(std::u32string_view word) {
    if (word.empty()) return false;
    // Initials: "J." and dotted runs of single letters like "U.S".
    bool initials = true;
    for (std::size_t k = 0; k < word.size(); ++k) {
        const bool letter_slot = (k % 2 == 0);
        if (letter_slot ? !utf8::is_word(word[k]) : word[k] != U'.') {
            initials = false;
            break;
        }
    }
    if (initials && utf8::is_upper(word.front())) return true;
    const std::string folded = utf8::encode(utf8::lower(word));
    return std::find(std::begin(kAbbreviations), std::end(kAbbreviations), folded) !=
           std::end(kAbbreviations);
}

// Word (letters, digits, inner periods) ending right before position `dot`.
inline std::u32string_view word_before(std::u32string_view cps, std::size_t dot) {
    std::size_t b = dot;
    while (b > 0 && (utf8::is_word(cps[b - 1]) || cps[b - 1] == U'.')) --b;
    while (b < dot && cps[b] == U'.') ++b;
    return cps.substr(b, dot - b);
}

inline std::vector<SentenceSpan> split_codepoints(std::u32string_view cps) {
    std::vector<SentenceSpan> out;
    const std::size_t n = cps.size();
    std::size_t start = 0;
    while (start < n && utf8::is_space(cps[start])) ++start;
    if (start == n) return out;

    for (std::size_t i = start; i < n; ++i) {
        const char32_t c = cps[i];
        if (!is_terminator(c)) continue;
        std::size_t end = i + 1;
        while (end < n && is_closer(cps[end])) ++end;
        if (end >= n || !utf8::is_space(cps[end])) continue;
        std::size_t next = end;
        while (next < n && utf8::is_space(cps[next])) ++next;
        if (next >= n) break;
        std::size_t look = next;
        while (look < n && is_opener(cps[look])) ++look;
        if (look >= n || !(utf8::is_upper(cps[look]) || utf8::is_digit(cps[look]))) continue;
        if (c == U'.' && is_abbreviation(word_before(cps, i))) continue;
        out.push_back(SentenceSpan{start, end, out.size()});
        start = next;
        i = next - 1;
    }
    std::size_t last = n;
    while (last > start && utf8::is_space(cps[last - 1])) --last;
    out.push_back(SentenceSpan{start, last, out.size()});
    return out;
}

constexpr bool is_ascii_punct(char32_t c) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
}

}  // namespace detail

/// Maximal runs of letters/digits; an apostrophe between two word characters
/// stays inside the token ("Martin's"). Hyphens and all other punctuation
/// separate tokens.
inline TokenizedText tokenize(std::string_view text) {
    TokenizedText out;
    out.source = std::string(text);
    out.tokens = detail::tokenize_codepoints(utf8::decode(text));
    return out;
}

/// Rule-based splitter: a sentence ends at '.', '?' or '!' (plus any closing
/// quotes/brackets) when followed by whitespace and then an uppercase letter
/// or digit. A period after a stop-listed abbreviation or an initial does not
/// end a sentence. Spans exclude surrounding whitespace.
inline std::vector<SentenceSpan> split_sentences(std::string_view text) {
    return detail::split_codepoints(utf8::decode(text));
}

inline std::string sentence_text(std::string_view text, const SentenceSpan& s) {
    return utf8::slice(text, s.char_start, s.char_end);
}

/// SQuAD-style answer normalization: lowercase, drop ASCII punctuation, drop
/// the articles a/an/the, collapse whitespace.
inline std::string normalize_answer(std::string_view text) {
    std::u32string cps = utf8::lower(utf8::decode(text));
    std::erase_if(cps, [](char32_t c) { return detail::is_ascii_punct(c); });

    std::string out;
    std::size_t i = 0;
    const std::size_t n = cps.size();
    while (i < n) {
        while (i < n && utf8::is_space(cps[i])) ++i;
        const std::size_t b = i;
        while (i < n && !utf8::is_space(cps[i])) ++i;
        if (b == i) break;
        const auto word = std::u32string_view(cps).substr(b, i - b);
        if (word == U"a" || word == U"an" || word == U"the") continue;
        if (!out.empty()) out.push_back(' ');
        out += utf8::encode(word);
    }
    return out;
}

/// Whitespace-delimited word count (used for passage length limits).
inline std::size_t word_count(std::string_view text) {
    const std::u32string cps = utf8::decode(text);
    std::size_t count = 0;
    bool in_word = false;
    for (char32_t c : cps) {
        const bool space = utf8::is_space(c);
        if (!space && !in_word) ++count;
        in_word = !space;
    }
    return count;
}

}  // namespace pqa
