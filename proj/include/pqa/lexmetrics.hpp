#pragma once

// Lexical similarity scorers used for sentence retrieval: Jaccard, tf-idf
// cosine and Okapi BM25, plus the collection statistics they depend on.
//
// All sums run over std::map in lexicographic term order so that scores are
// bit-reproducible regardless of how the inputs were assembled.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "pqa/error.hpp"
#include "pqa/textproc.hpp"

namespace pqa {

enum class Metric { jaccard, tfidf, bm25 };

inline std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::jaccard: return "jaccard";
        case Metric::tfidf: return "tfidf";
        case Metric::bm25: return "bm25";
    }
    return "jaccard";
}

inline bool parse_metric(std::string_view s, Metric& out) {
    if (s == "jaccard") out = Metric::jaccard;
    else if (s == "tfidf") out = Metric::tfidf;
    else if (s == "bm25") out = Metric::bm25;
    else return false;
    return true;
}

struct CorpusStats {
    std::size_t num_docs = 0;
    std::map<std::string, std::size_t> doc_freq;
    double avg_doc_len = 0.0;
    std::size_t total_docs_len = 0;

    std::size_t df(const std::string& term) const {
        auto it = doc_freq.find(term);
        return it == doc_freq.end() ? 0 : it->second;
    }
};

using SparseVector = std::map<std::string, double>;

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

inline std::map<std::string, std::size_t> term_counts(const TokenizedText& doc) {
    std::map<std::string, std::size_t> tf;
    for (const auto& t : doc.tokens) ++tf[t.term];
    return tf;
}

/// Document frequencies over case-folded terms. An all-empty collection has
/// avg_doc_len == 0; bm25() scores everything 0 against it.
inline CorpusStats build_corpus_stats(std::span<const TokenizedText> docs) {
    if (docs.empty()) throw InputError("empty corpus");
    CorpusStats stats;
    stats.num_docs = docs.size();
    for (const auto& doc : docs) {
        stats.total_docs_len += doc.size();
        std::set<std::string_view> seen;
        for (const auto& t : doc.tokens) {
            if (seen.insert(t.term).second) ++stats.doc_freq[t.term];
        }
    }
    stats.avg_doc_len =
        static_cast<double>(stats.total_docs_len) / static_cast<double>(stats.num_docs);
    return stats;
}

/// |A ∩ B| / |A ∪ B| over case-folded token sets; 0 when both are empty.
inline double jaccard(const TokenizedText& a, const TokenizedText& b) {
    std::set<std::string> sa;
    std::set<std::string> sb;
    for (const auto& t : a.tokens) sa.insert(t.term);
    for (const auto& t : b.tokens) sb.insert(t.term);
    if (sa.empty() && sb.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& t : sa) inter += sb.count(t);
    const std::size_t uni = sa.size() + sb.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Smoothed idf ln((N + 1) / (df + 1)); terms absent from the collection get df = 0.
inline double tfidf_idf(const CorpusStats& stats, const std::string& term) {
    return std::log(static_cast<double>(stats.num_docs + 1) /
                    static_cast<double>(stats.df(term) + 1));
}

/// Raw tf times smoothed idf. Zero weights (terms in every document) are dropped.
inline SparseVector tfidf_vector(const TokenizedText& doc, const CorpusStats& stats) {
    SparseVector v;
    for (const auto& [term, tf] : term_counts(doc)) {
        const double w = static_cast<double>(tf) * tfidf_idf(stats, term);
        if (w != 0.0) v.emplace(term, w);
    }
    return v;
}

inline double norm(const SparseVector& v) {
    double sq = 0.0;
    for (const auto& [_, w] : v) sq += w * w;
    return std::sqrt(sq);
}

/// Cosine similarity; 0 when either vector has zero norm.
inline double cosine(const SparseVector& a, const SparseVector& b) {
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    double dot = 0.0;
    for (const auto& [term, w] : a) {
        auto it = b.find(term);
        if (it != b.end()) dot += w * it->second;
    }
    const double c = dot / (na * nb);
    return std::clamp(c, 0.0, 1.0);
}

/// Okapi idf in the ln(1 + ...) form, which is never negative.
inline double bm25_idf(const CorpusStats& stats, const std::string& term) {
    const auto n = static_cast<double>(stats.num_docs);
    const auto df = static_cast<double>(stats.df(term));
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

/// BM25 of `doc` for `query`. Repeated query terms contribute once per
/// occurrence in the query.
inline double bm25(const TokenizedText& query, const TokenizedText& doc, const CorpusStats& stats,
                   Bm25Params params = {}) {
    if (stats.avg_doc_len <= 0.0) return 0.0;
    const auto doc_tf = term_counts(doc);
    const double len_norm = 1.0 - params.b +
                            params.b * static_cast<double>(doc.size()) / stats.avg_doc_len;
    double score = 0.0;
    for (const auto& [term, qtf] : term_counts(query)) {
        auto it = doc_tf.find(term);
        if (it == doc_tf.end()) continue;
        const auto tf = static_cast<double>(it->second);
        score += static_cast<double>(qtf) * bm25_idf(stats, term) * tf * (params.k1 + 1.0) /
                 (tf + params.k1 * len_norm);
    }
    return score;
}

/// Similarity of `query` to `doc` under `metric`. `stats` describes the
/// collection `doc` belongs to (ignored for Jaccard).
inline double score(Metric metric, const TokenizedText& query, const TokenizedText& doc,
                    const CorpusStats& stats, Bm25Params params = {}) {
    switch (metric) {
        case Metric::jaccard: return jaccard(query, doc);
        case Metric::tfidf: return cosine(tfidf_vector(query, stats), tfidf_vector(doc, stats));
        case Metric::bm25: return bm25(query, doc, stats, params);
    }
    return 0.0;
}

}  // namespace pqa
