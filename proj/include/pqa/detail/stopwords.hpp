#pragma once

// Terms excluded from topic-model vocabularies. Versioned like the
// abbreviation list: edits change every trained model.

#include <string_view>

namespace pqa::detail {

inline constexpr std::string_view kStopwordListVersion = "stop-1";

inline constexpr std::string_view kStopwords[] = {
    "a",     "about",  "after", "again", "against", "all",   "also",  "am",    "an",
    "and",   "any",    "are",   "as",    "at",      "be",    "been",  "before", "being",
    "but",   "by",     "can",   "could", "did",     "do",    "does",  "during", "each",
    "for",   "from",   "had",   "has",   "have",    "he",    "her",   "here",  "hers",
    "him",   "his",    "how",   "i",     "if",      "in",    "into",  "is",    "it",
    "its",   "may",    "me",    "more",  "most",    "my",    "no",    "nor",   "not",
    "of",    "off",    "on",    "once",  "only",    "or",    "other", "our",   "out",
    "over",  "said",   "same",  "she",   "should",  "so",    "some",  "such",  "than",
    "that",  "the",    "their", "them",  "then",    "there", "these", "they",  "this",
    "those", "through", "to",   "too",   "under",   "until", "up",    "very",  "was",
    "we",    "were",   "what",  "when",  "where",   "which", "while", "who",   "whom",
    "why",   "will",   "with",  "would", "you",     "your",
};

}  // namespace pqa::detail
