#pragma once

// Sentence-retrieval diagnostic: for each question, find the passage
// sentence most lexically similar to it and check whether that sentence
// holds a gold answer. The aggregate hit rate measures how far plain lexical
// matching gets on a dataset.

#include <algorithm>
#include <cstdio>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "pqa/dataset.hpp"
#include "pqa/error.hpp"
#include "pqa/lexmetrics.hpp"
#include "pqa/textproc.hpp"

namespace pqa {

/// The passage(s) of one item as a single text. Two passages are joined with
/// a newline; each is segmented on its own so no sentence straddles the join.
struct PassageView {
    std::string text;
    std::vector<SentenceSpan> sentences;
    std::vector<std::size_t> passage_offsets;  // start of each passage in `text`
};

struct AnswerRef {
    std::string text;
    std::optional<std::size_t> char_start;  // in PassageView coordinates
};

inline PassageView make_passage_view(std::span<const std::string> passages) {
    PassageView view;
    std::size_t offset = 0;
    for (std::size_t i = 0; i < passages.size(); ++i) {
        if (i > 0) {
            view.text.push_back('\n');
            ++offset;
        }
        view.passage_offsets.push_back(offset);
        for (auto s : split_sentences(passages[i])) {
            s.char_start += offset;
            s.char_end += offset;
            s.index = view.sentences.size();
            view.sentences.push_back(s);
        }
        view.text += passages[i];
        offset += utf8::length(passages[i]);
    }
    return view;
}

inline std::vector<AnswerRef> answer_refs(const QAExample& ex, const PassageView& view) {
    std::vector<AnswerRef> out;
    for (const auto& a : ex.answers) {
        AnswerRef r{a.text, std::nullopt};
        if (a.char_start && a.passage_index >= 0 &&
            static_cast<std::size_t>(a.passage_index) < view.passage_offsets.size()) {
            r.char_start = *a.char_start + view.passage_offsets[a.passage_index];
        }
        out.push_back(std::move(r));
    }
    return out;
}

struct TopSentence {
    std::size_t index = 0;
    double score = 0.0;
};

/// Scores closer than this are ties (guards against summation-order noise).
inline constexpr double kScoreTieEpsilon = 1e-12;

/// Highest-scoring sentence; ties go to the lowest index. `stats` must
/// describe `sentences` (the per-item collection).
inline TopSentence top_sentence(const TokenizedText& question,
                                std::span<const TokenizedText> sentences, Metric metric,
                                const CorpusStats& stats, Bm25Params params = {}) {
    if (sentences.empty()) throw InputError("empty passage");
    TopSentence best{0, score(metric, question, sentences[0], stats, params)};
    for (std::size_t i = 1; i < sentences.size(); ++i) {
        const double s = score(metric, question, sentences[i], stats, params);
        if (s > best.score + kScoreTieEpsilon) best = {i, s};
    }
    return best;
}

inline std::vector<TokenizedText> tokenize_sentences(std::string_view text,
                                                     std::span<const SentenceSpan> spans) {
    const std::u32string cps = utf8::decode(text);
    std::vector<TokenizedText> out;
    out.reserve(spans.size());
    for (const auto& s : spans) {
        out.push_back(tokenize(
            utf8::encode(std::u32string_view(cps).substr(s.char_start, s.char_end - s.char_start))));
    }
    return out;
}

/// Convenience form: segments `passage`, builds the per-passage statistics
/// and ranks.
inline TopSentence top_sentence(std::string_view question, std::string_view passage, Metric metric,
                                Bm25Params params = {}) {
    const auto spans = split_sentences(passage);
    if (spans.empty()) throw InputError("empty passage");
    const auto sentences = tokenize_sentences(passage, spans);
    return top_sentence(tokenize(question), sentences, metric, build_corpus_stats(sentences),
                        params);
}

/// With a known gold offset: does [start, start + len) overlap the sentence?
/// Without one: is the normalized answer a substring of the normalized
/// sentence?
inline bool contains_answer(const SentenceSpan& sentence, std::string_view passage_text,
                            const AnswerRef& answer) {
    if (answer.char_start) {
        const std::size_t start = *answer.char_start;
        const std::size_t end = start + utf8::length(answer.text);
        return start < sentence.char_end && sentence.char_start < end;
    }
    const std::string needle = normalize_answer(answer.text);
    if (needle.empty()) return false;
    return normalize_answer(sentence_text(passage_text, sentence)).find(needle) != std::string::npos;
}

struct RetrievalItem {
    std::string qa_id;
    std::size_t top_sentence_index = 0;
    double score = 0.0;
    bool hit = false;
};

struct RetrievalReport {
    Metric metric = Metric::jaccard;
    Bm25Params params;
    std::size_t total = 0;
    std::size_t hits = 0;
    double rate = 0.0;
    std::vector<RetrievalItem> per_item;  // sorted by qa_id
};

inline RetrievalItem diagnose_item(const QAExample& ex, Metric metric, Bm25Params params = {}) {
    const PassageView view = make_passage_view(ex.passages);
    if (view.sentences.empty()) throw InputError(ex.id + ": empty passage");
    const auto sentences = tokenize_sentences(view.text, view.sentences);
    const CorpusStats stats = build_corpus_stats(sentences);
    const TopSentence top = top_sentence(tokenize(ex.question), sentences, metric, stats, params);
    RetrievalItem item{ex.id, top.index, top.score, false};
    for (const auto& a : answer_refs(ex, view)) {
        if (contains_answer(view.sentences[top.index], view.text, a)) {
            item.hit = true;
            break;
        }
    }
    return item;
}

/// Top-sentence answer-containment rate over a dataset. An item is a hit if
/// its top sentence contains any gold answer; items without answers count as
/// misses.
inline RetrievalReport retrieval_rate(const QASet& set, Metric metric, Bm25Params params = {}) {
    RetrievalReport r;
    r.metric = metric;
    r.params = params;
    r.per_item.reserve(set.items.size());
    for (const auto& ex : set.items) r.per_item.push_back(diagnose_item(ex, metric, params));
    std::sort(r.per_item.begin(), r.per_item.end(),
              [](const auto& a, const auto& b) { return a.qa_id < b.qa_id; });
    r.total = r.per_item.size();
    for (const auto& it : r.per_item) r.hits += it.hit ? 1 : 0;
    r.rate = r.total == 0 ? 0.0 : static_cast<double>(r.hits) / static_cast<double>(r.total);
    return r;
}

inline nlohmann::json to_json(const RetrievalReport& r) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& it : r.per_item) {
        items.push_back({{"qa_id", it.qa_id},
                         {"top_sentence_index", it.top_sentence_index},
                         {"score", it.score},
                         {"hit", it.hit}});
    }
    nlohmann::json j = {{"metric", to_string(r.metric)},
                        {"total", r.total},
                        {"hits", r.hits},
                        {"rate", r.rate},
                        {"per_item", std::move(items)}};
    if (r.metric == Metric::bm25) j["params"] = {{"k1", r.params.k1}, {"b", r.params.b}};
    return j;
}

inline std::string_view metric_label(Metric m) {
    switch (m) {
        case Metric::jaccard: return "Jaccard";
        case Metric::tfidf: return "TF-IDF";
        case Metric::bm25: return "BM25";
    }
    return "";
}

/// One line per metric: name, rate as a percentage, hits/total.
inline std::string format_retrieval_table(std::span<const RetrievalReport> reports,
                                          std::string_view dataset_label) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-8s | %s\n", "Metric", std::string(dataset_label).c_str());
    out << line;
    for (const auto& r : reports) {
        std::snprintf(line, sizeof line, "%-8s | %6.2f%% (%zu/%zu)\n",
                      std::string(metric_label(r.metric)).c_str(), 100.0 * r.rate, r.hits, r.total);
        out << line;
    }
    return out.str();
}

}  // namespace pqa
