#pragma once

// SQuAD-convention scoring (exact match and token F1, both maximized over
// gold answers) and automatic error categorization.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "pqa/dataset.hpp"
#include "pqa/diagnostics.hpp"
#include "pqa/error.hpp"
#include "pqa/lexmetrics.hpp"
#include "pqa/textproc.hpp"

namespace pqa {

using PredictionSet = std::map<std::string, std::string>;

enum class ErrorCategory { correct, high_overlap_wrong_sentence, boundary_error, other_wrong };

inline constexpr ErrorCategory kErrorCategories[] = {
    ErrorCategory::correct, ErrorCategory::high_overlap_wrong_sentence,
    ErrorCategory::boundary_error, ErrorCategory::other_wrong};

inline std::string_view to_string(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::correct: return "correct";
        case ErrorCategory::high_overlap_wrong_sentence: return "high_overlap_wrong_sentence";
        case ErrorCategory::boundary_error: return "boundary_error";
        case ErrorCategory::other_wrong: return "other_wrong";
    }
    return "other_wrong";
}

inline constexpr std::string_view kCategoryNote =
    "missing logical inference and entity type confusion are not detected automatically; "
    "such errors are reported as other_wrong";

/// 1 iff the normalized prediction equals some normalized gold answer.
inline int exact_match(std::string_view pred, const std::vector<std::string>& golds) {
    if (golds.empty()) throw InputError("no gold answers");
    const std::string p = normalize_answer(pred);
    for (const auto& g : golds) {
        if (p == normalize_answer(g)) return 1;
    }
    return 0;
}

namespace detail {

inline std::vector<std::string> split_words(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

inline double token_f1(const std::string& pred, const std::string& gold) {
    const auto p = split_words(normalize_answer(pred));
    const auto g = split_words(normalize_answer(gold));
    if (p.empty() || g.empty()) return (p.empty() && g.empty()) ? 1.0 : 0.0;
    std::map<std::string, int> counts;
    for (const auto& w : g) ++counts[w];
    std::size_t common = 0;
    for (const auto& w : p) {
        auto it = counts.find(w);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    }
    if (common == 0) return 0.0;
    const double precision = static_cast<double>(common) / static_cast<double>(p.size());
    const double recall = static_cast<double>(common) / static_cast<double>(g.size());
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace detail

/// Token-level F1 between normalized bags of words, max over golds.
inline double f1_score(std::string_view pred, const std::vector<std::string>& golds) {
    if (golds.empty()) throw InputError("no gold answers");
    double best = 0.0;
    for (const auto& g : golds) best = std::max(best, detail::token_f1(std::string(pred), g));
    return best;
}

struct EvalItem {
    std::string qa_id;
    int em = 0;
    double f1 = 0.0;
    std::optional<ErrorCategory> category;
};

struct EvalReport {
    std::size_t total = 0;
    double em = 0.0;  // percent
    double f1 = 0.0;  // percent
    std::vector<EvalItem> per_item;  // sorted by qa_id
    std::vector<std::string> missing_ids;
    std::optional<Metric> category_metric;
};

inline std::vector<std::string> gold_texts(const QAExample& ex) {
    std::vector<std::string> out;
    for (const auto& a : ex.answers) out.push_back(a.text);
    return out;
}

inline PredictionSet predictions_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("$: predictions must be an object of id -> answer");
    PredictionSet preds;
    for (const auto& [id, v] : j.items()) {
        if (!v.is_string()) throw ParseError("$." + id + ": expected string");
        preds.emplace(id, v.get<std::string>());
    }
    return preds;
}

inline PredictionSet load_predictions(const std::filesystem::path& path) {
    try {
        return predictions_from_json(parse_json_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

/// EM/F1 over every item. Missing predictions score 0 and are listed.
inline EvalReport evaluate(const QASet& set, const PredictionSet& preds) {
    EvalReport r;
    double em_sum = 0.0;
    double f1_sum = 0.0;
    for (const auto& ex : set.items) {
        EvalItem item{ex.id, 0, 0.0, std::nullopt};
        const auto golds = gold_texts(ex);
        auto it = preds.find(ex.id);
        if (it == preds.end()) {
            r.missing_ids.push_back(ex.id);
        } else if (!golds.empty()) {
            item.em = exact_match(it->second, golds);
            item.f1 = f1_score(it->second, golds);
        }
        em_sum += item.em;
        f1_sum += item.f1;
        r.per_item.push_back(std::move(item));
    }
    r.total = set.items.size();
    if (r.total > 0) {
        r.em = 100.0 * em_sum / static_cast<double>(r.total);
        r.f1 = 100.0 * f1_sum / static_cast<double>(r.total);
    }
    std::sort(r.per_item.begin(), r.per_item.end(),
              [](const auto& a, const auto& b) { return a.qa_id < b.qa_id; });
    std::sort(r.missing_ids.begin(), r.missing_ids.end());
    return r;
}

/// First case-insensitive occurrence of `needle` in `haystack`, in scalar values.
inline std::optional<std::size_t> find_case_insensitive(std::string_view haystack,
                                                        std::string_view needle) {
    const auto h = utf8::lower(utf8::decode(haystack));
    const auto n = utf8::lower(utf8::decode(needle));
    if (n.empty()) return std::nullopt;
    const auto pos = h.find(n);
    if (pos == std::u32string::npos) return std::nullopt;
    return pos;
}

/// Category of one prediction:
///   correct                      EM = 1
///   boundary_error               EM = 0, F1 > 0
///   high_overlap_wrong_sentence  F1 = 0, the prediction sits in the metric's
///                                top sentence and that sentence holds no gold
///   other_wrong                  everything else, including predictions that
///                                cannot be located in the passages
inline ErrorCategory categorize(const QAExample& ex, std::string_view pred, Metric metric,
                                Bm25Params params = {}) {
    const auto golds = gold_texts(ex);
    if (golds.empty()) return ErrorCategory::other_wrong;
    if (exact_match(pred, golds) == 1) return ErrorCategory::correct;
    if (f1_score(pred, golds) > 0.0) return ErrorCategory::boundary_error;

    const PassageView view = make_passage_view(ex.passages);
    if (view.sentences.empty()) return ErrorCategory::other_wrong;
    const auto located = find_case_insensitive(view.text, pred);
    if (!located) return ErrorCategory::other_wrong;
    std::optional<std::size_t> pred_sentence;
    for (const auto& s : view.sentences) {
        if (*located >= s.char_start && *located < s.char_end) pred_sentence = s.index;
    }
    if (!pred_sentence) return ErrorCategory::other_wrong;

    const auto sentences = tokenize_sentences(view.text, view.sentences);
    const TopSentence top = top_sentence(tokenize(ex.question), sentences, metric,
                                         build_corpus_stats(sentences), params);
    if (top.index != *pred_sentence) return ErrorCategory::other_wrong;
    for (const auto& a : answer_refs(ex, view)) {
        if (contains_answer(view.sentences[top.index], view.text, a)) {
            return ErrorCategory::other_wrong;
        }
    }
    return ErrorCategory::high_overlap_wrong_sentence;
}

/// Per-item categories in dataset order. Missing predictions are other_wrong.
inline std::vector<std::pair<std::string, ErrorCategory>> categorize_errors(
    const QASet& set, const PredictionSet& preds, Metric metric = Metric::jaccard,
    Bm25Params params = {}) {
    std::vector<std::pair<std::string, ErrorCategory>> out;
    for (const auto& ex : set.items) {
        auto it = preds.find(ex.id);
        out.emplace_back(ex.id, it == preds.end() ? ErrorCategory::other_wrong
                                                  : categorize(ex, it->second, metric, params));
    }
    return out;
}

/// evaluate() plus categories attached to every item.
inline EvalReport evaluate_with_categories(const QASet& set, const PredictionSet& preds,
                                           Metric metric = Metric::jaccard,
                                           Bm25Params params = {}) {
    EvalReport r = evaluate(set, preds);
    std::map<std::string, ErrorCategory> cats;
    for (auto& [id, c] : categorize_errors(set, preds, metric, params)) cats.emplace(id, c);
    for (auto& item : r.per_item) item.category = cats.at(item.qa_id);
    r.category_metric = metric;
    return r;
}

inline nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json items = nlohmann::json::array();
    std::map<std::string, std::size_t> counts;
    for (const auto& it : r.per_item) {
        nlohmann::json j = {{"qa_id", it.qa_id}, {"em", it.em}, {"f1", it.f1}};
        if (it.category) {
            j["category"] = to_string(*it.category);
            ++counts[std::string(to_string(*it.category))];
        }
        items.push_back(std::move(j));
    }
    nlohmann::json out = {{"total", r.total},
                          {"em", r.em},
                          {"f1", r.f1},
                          {"missing_ids", r.missing_ids},
                          {"per_item", std::move(items)}};
    if (r.category_metric) {
        nlohmann::json c = nlohmann::json::object();
        for (auto cat : kErrorCategories) c[std::string(to_string(cat))] = counts[std::string(to_string(cat))];
        out["category_metric"] = to_string(*r.category_metric);
        out["category_counts"] = std::move(c);
        out["category_note"] = kCategoryNote;
    }
    return out;
}

inline std::string format_eval_table(const EvalReport& r, std::string_view label) {
    std::ostringstream out;
    char line[200];
    std::snprintf(line, sizeof line, "%-12s | %6s | %6s | %s\n", "Dataset", "EM", "F1", "N");
    out << line;
    std::snprintf(line, sizeof line, "%-12s | %6.2f | %6.2f | %zu\n", std::string(label).c_str(),
                  r.em, r.f1, r.total);
    out << line;
    if (r.category_metric) {
        std::map<ErrorCategory, std::size_t> counts;
        for (const auto& it : r.per_item) {
            if (it.category) ++counts[*it.category];
        }
        for (auto cat : kErrorCategories) {
            std::snprintf(line, sizeof line, "  %-28s %zu\n", std::string(to_string(cat)).c_str(),
                          counts[cat]);
            out << line;
        }
    }
    return out.str();
}

}  // namespace pqa
