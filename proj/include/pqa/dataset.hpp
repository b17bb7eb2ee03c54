#pragma once

// Dataset model and file formats.
//
//  * ParallelQA ("pqa-1"): the read/write format for parallel-passage data.
//  * SQuAD v1.1: read-only input.
//
// Both are lowered to a QASet, the flat question/passages/answers view used
// by diagnostics and evaluation. All character offsets are Unicode
// scalar-value indices into the stored passage string.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "pqa/corpus_io.hpp"
#include "pqa/error.hpp"
#include "pqa/textproc.hpp"
#include "pqa/utf8.hpp"

namespace pqa {

inline constexpr std::string_view kPqaFormatVersion = "pqa-1";

enum class InferenceType { referential, figurative, part_whole, numeric, lexical, denotation, spatial, temporal };

inline constexpr InferenceType kInferenceTypes[] = {
    InferenceType::referential, InferenceType::figurative, InferenceType::part_whole,
    InferenceType::numeric,     InferenceType::lexical,    InferenceType::denotation,
    InferenceType::spatial,     InferenceType::temporal,
};

inline std::string_view to_string(InferenceType t) {
    switch (t) {
        case InferenceType::referential: return "referential";
        case InferenceType::figurative: return "figurative";
        case InferenceType::part_whole: return "part_whole";
        case InferenceType::numeric: return "numeric";
        case InferenceType::lexical: return "lexical";
        case InferenceType::denotation: return "denotation";
        case InferenceType::spatial: return "spatial";
        case InferenceType::temporal: return "temporal";
    }
    return "referential";
}

inline bool parse_inference_type(std::string_view s, InferenceType& out) {
    for (auto t : kInferenceTypes) {
        if (to_string(t) == s) {
            out = t;
            return true;
        }
    }
    return false;
}

struct Passage {
    SourceKind source_kind = SourceKind::other;
    std::string origin_id;
    std::string text;

    friend bool operator==(const Passage&, const Passage&) = default;
};

struct Answer {
    std::string text;
    int passage_index = 0;
    std::size_t char_start = 0;

    friend bool operator==(const Answer&, const Answer&) = default;
};

struct QAItem {
    std::string id;
    std::string question;
    std::vector<Answer> answers;
    InferenceType inference_type = InferenceType::referential;
    std::string annotator_id;

    friend bool operator==(const QAItem&, const QAItem&) = default;
};

struct PassagePair {
    std::string id;
    Passage passage_a;
    Passage passage_b;
    std::vector<QAItem> qas;

    const Passage& passage(int index) const { return index == 0 ? passage_a : passage_b; }

    friend bool operator==(const PassagePair&, const PassagePair&) = default;
};

struct ParallelQADataset {
    std::string version{kPqaFormatVersion};
    std::vector<PassagePair> pairs;

    std::size_t num_qas() const {
        std::size_t n = 0;
        for (const auto& p : pairs) n += p.qas.size();
        return n;
    }

    const PassagePair* find_pair(std::string_view id) const {
        for (const auto& p : pairs) {
            if (p.id == id) return &p;
        }
        return nullptr;
    }

    friend bool operator==(const ParallelQADataset&, const ParallelQADataset&) = default;
};

// ---------------------------------------------------------------------------
// Validation

struct Violation {
    std::string field;
    std::string message;

    friend bool operator==(const Violation&, const Violation&) = default;
};

inline constexpr std::size_t kMaxAnswerTokens = 50;

/// Structural checks on one annotation against its pair. Never throws.
inline std::vector<Violation> validate_annotation(const PassagePair& pair, const QAItem& qa) {
    std::vector<Violation> out;
    if (qa.id.empty()) out.push_back({"id", "empty id"});

    const auto q = utf8::decode(qa.question);
    std::size_t last = q.size();
    while (last > 0 && utf8::is_space(q[last - 1])) --last;
    if (last == 0) {
        out.push_back({"question", "empty question"});
    } else if (q[last - 1] != U'?') {
        out.push_back({"question", "question must end with ?"});
    }

    if (qa.answers.empty()) out.push_back({"answers", "no answers"});
    for (std::size_t i = 0; i < qa.answers.size(); ++i) {
        const auto& a = qa.answers[i];
        const std::string field = "answers[" + std::to_string(i) + "]";
        if (a.text.empty()) {
            out.push_back({field + ".text", "empty answer"});
            continue;
        }
        if (a.passage_index != 0 && a.passage_index != 1) {
            out.push_back({field + ".passage_index", "passage_index must be 0 or 1"});
            continue;
        }
        const auto passage = utf8::decode(pair.passage(a.passage_index).text);
        const auto text = utf8::decode(a.text);
        if (a.char_start + text.size() > passage.size() ||
            std::u32string_view(passage).substr(a.char_start, text.size()) != text) {
            out.push_back({field + ".char_start", "span mismatch"});
        }
        if (tokenize(a.text).size() > kMaxAnswerTokens) {
            out.push_back({field + ".text", "answer longer than 50 tokens"});
        }
    }
    return out;
}

inline std::vector<Violation> validate_pair(const PassagePair& pair) {
    std::vector<Violation> out;
    if (pair.id.empty()) out.push_back({"id", "empty pair id"});
    if (pair.passage_a.text.empty()) out.push_back({"passage_a.text", "empty passage"});
    if (pair.passage_b.text.empty()) out.push_back({"passage_b.text", "empty passage"});
    if (pair.passage_a.origin_id == pair.passage_b.origin_id) {
        out.push_back({"passage_b.origin_id", "passages must come from different origins"});
    }
    return out;
}

/// Every violation in the dataset, prefixed with the pair/qa location.
inline std::vector<Violation> validate_dataset(const ParallelQADataset& ds) {
    std::vector<Violation> out;
    std::set<std::string> pair_ids;
    std::set<std::string> qa_ids;
    for (std::size_t p = 0; p < ds.pairs.size(); ++p) {
        const auto& pair = ds.pairs[p];
        const std::string where = "pairs[" + std::to_string(p) + "]";
        if (!pair_ids.insert(pair.id).second) out.push_back({where + ".id", "duplicate id"});
        for (auto v : validate_pair(pair)) out.push_back({where + "." + v.field, v.message});
        for (std::size_t q = 0; q < pair.qas.size(); ++q) {
            const std::string qwhere = where + ".qas[" + std::to_string(q) + "]";
            if (!qa_ids.insert(pair.qas[q].id).second) {
                out.push_back({qwhere + ".id", "duplicate id"});
            }
            for (auto v : validate_annotation(pair, pair.qas[q])) {
                out.push_back({qwhere + "." + v.field, v.message});
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// ParallelQA JSON

inline nlohmann::json to_json(const Passage& p) {
    return {{"source_kind", to_string(p.source_kind)}, {"origin_id", p.origin_id}, {"text", p.text}};
}

inline nlohmann::json to_json(const Answer& a) {
    return {{"text", a.text}, {"passage_index", a.passage_index}, {"char_start", a.char_start}};
}

inline nlohmann::json to_json(const QAItem& qa) {
    nlohmann::json answers = nlohmann::json::array();
    for (const auto& a : qa.answers) answers.push_back(to_json(a));
    return {{"id", qa.id},
            {"question", qa.question},
            {"answers", std::move(answers)},
            {"inference_type", to_string(qa.inference_type)},
            {"annotator_id", qa.annotator_id}};
}

inline nlohmann::json to_json(const PassagePair& p) {
    nlohmann::json qas = nlohmann::json::array();
    for (const auto& qa : p.qas) qas.push_back(to_json(qa));
    return {{"id", p.id},
            {"passage_a", to_json(p.passage_a)},
            {"passage_b", to_json(p.passage_b)},
            {"qas", std::move(qas)}};
}

inline nlohmann::json to_json(const ParallelQADataset& ds) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : ds.pairs) pairs.push_back(to_json(p));
    return {{"version", ds.version}, {"pairs", std::move(pairs)}};
}

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* key,
                                     const std::string& where) {
    if (!j.is_object()) throw ParseError(where + ": expected object");
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(where + ": missing field " + key);
    return *it;
}

inline std::string require_string(const nlohmann::json& j, const char* key,
                                  const std::string& where) {
    const auto& v = require(j, key, where);
    if (!v.is_string()) throw ParseError(where + "." + key + ": expected string");
    return v.get<std::string>();
}

inline long long require_int(const nlohmann::json& j, const char* key, const std::string& where) {
    const auto& v = require(j, key, where);
    if (!v.is_number_integer()) throw ParseError(where + "." + key + ": expected integer");
    return v.get<long long>();
}

inline const nlohmann::json& require_array(const nlohmann::json& j, const char* key,
                                           const std::string& where) {
    const auto& v = require(j, key, where);
    if (!v.is_array()) throw ParseError(where + "." + key + ": expected array");
    return v;
}

}  // namespace detail

inline Passage passage_from_json(const nlohmann::json& j, const std::string& where) {
    Passage p;
    const auto kind = detail::require_string(j, "source_kind", where);
    if (!parse_source_kind(kind, p.source_kind)) {
        throw ParseError(where + ".source_kind: unknown value \"" + kind + "\"");
    }
    p.origin_id = detail::require_string(j, "origin_id", where);
    p.text = detail::require_string(j, "text", where);
    return p;
}

inline Answer answer_from_json(const nlohmann::json& j, const std::string& where) {
    Answer a;
    a.text = detail::require_string(j, "text", where);
    a.passage_index = static_cast<int>(detail::require_int(j, "passage_index", where));
    const auto start = detail::require_int(j, "char_start", where);
    if (start < 0) throw ParseError(where + ".char_start: must be >= 0");
    a.char_start = static_cast<std::size_t>(start);
    return a;
}

inline QAItem qa_from_json(const nlohmann::json& j, const std::string& where) {
    QAItem qa;
    qa.id = detail::require_string(j, "id", where);
    qa.question = detail::require_string(j, "question", where);
    const auto& answers = detail::require_array(j, "answers", where);
    for (std::size_t i = 0; i < answers.size(); ++i) {
        qa.answers.push_back(
            answer_from_json(answers[i], where + ".answers[" + std::to_string(i) + "]"));
    }
    const auto type = detail::require_string(j, "inference_type", where);
    if (!parse_inference_type(type, qa.inference_type)) {
        throw ParseError(where + ".inference_type: unknown value \"" + type + "\"");
    }
    qa.annotator_id = detail::require_string(j, "annotator_id", where);
    return qa;
}

inline PassagePair pair_from_json(const nlohmann::json& j, const std::string& where) {
    PassagePair p;
    p.id = detail::require_string(j, "id", where);
    p.passage_a = passage_from_json(detail::require(j, "passage_a", where), where + ".passage_a");
    p.passage_b = passage_from_json(detail::require(j, "passage_b", where), where + ".passage_b");
    const auto& qas = detail::require_array(j, "qas", where);
    for (std::size_t i = 0; i < qas.size(); ++i) {
        p.qas.push_back(qa_from_json(qas[i], where + ".qas[" + std::to_string(i) + "]"));
    }
    return p;
}

inline ParallelQADataset dataset_from_json(const nlohmann::json& j) {
    ParallelQADataset ds;
    ds.version = detail::require_string(j, "version", "$");
    if (ds.version != kPqaFormatVersion) {
        throw ParseError("$.version: unsupported version \"" + ds.version + "\"");
    }
    const auto& pairs = detail::require_array(j, "pairs", "$");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        ds.pairs.push_back(pair_from_json(pairs[i], "$.pairs[" + std::to_string(i) + "]"));
    }
    return ds;
}

inline nlohmann::json parse_json_file(const std::filesystem::path& path) {
    try {
        return nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

/// Reads and fully validates a ParallelQA file.
inline ParallelQADataset load_pqa(const std::filesystem::path& path) {
    ParallelQADataset ds = dataset_from_json(parse_json_file(path));
    const auto violations = validate_dataset(ds);
    if (!violations.empty()) {
        throw ParseError(path.string() + ": " + violations.front().field + ": " +
                         violations.front().message);
    }
    return ds;
}

inline void save_pqa(const ParallelQADataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json(ds).dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Flat QA view

struct GoldAnswer {
    std::string text;
    int passage_index = 0;
    std::optional<std::size_t> char_start;  // absent when unknown or unrepairable
};

struct QAExample {
    std::string id;
    std::string group_id;  // pair id or SQuAD paragraph id
    std::string question;
    std::vector<std::string> passages;  // one (SQuAD) or two (ParallelQA)
    std::vector<GoldAnswer> answers;
    bool valid = true;
};

struct QASet {
    std::string format;  // "pqa" or "squad"
    std::vector<QAExample> items;
    std::vector<std::string> warnings;
    std::size_t num_groups = 0;
};

inline QASet to_qaset(const ParallelQADataset& ds) {
    QASet set;
    set.format = "pqa";
    set.num_groups = ds.pairs.size();
    for (const auto& pair : ds.pairs) {
        for (const auto& qa : pair.qas) {
            QAExample ex;
            ex.id = qa.id;
            ex.group_id = pair.id;
            ex.question = qa.question;
            ex.passages = {pair.passage_a.text, pair.passage_b.text};
            for (const auto& a : qa.answers) {
                ex.answers.push_back({a.text, a.passage_index, a.char_start});
            }
            set.items.push_back(std::move(ex));
        }
    }
    return set;
}

inline constexpr std::size_t kOffsetRepairWindow = 5;

/// Finds the verbatim occurrence of `answer` nearest to `start` within
/// +/- kOffsetRepairWindow scalar values; earlier offsets win ties.
inline std::optional<std::size_t> repair_offset(std::u32string_view context,
                                                std::u32string_view answer, std::size_t start) {
    auto matches = [&](long long s) {
        return s >= 0 && static_cast<std::size_t>(s) + answer.size() <= context.size() &&
               context.substr(static_cast<std::size_t>(s), answer.size()) == answer;
    };
    const auto base = static_cast<long long>(start);
    for (long long d = 0; d <= static_cast<long long>(kOffsetRepairWindow); ++d) {
        if (matches(base - d)) return static_cast<std::size_t>(base - d);
        if (d != 0 && matches(base + d)) return static_cast<std::size_t>(base + d);
    }
    return std::nullopt;
}

/// Reads SQuAD v1.1 JSON into the single-passage view. Answer offsets that do
/// not point at the answer text are repaired within a small window (with a
/// warning) or dropped, flagging the item invalid.
inline QASet squad_from_json(const nlohmann::json& j) {
    QASet set;
    set.format = "squad";
    const auto& data = detail::require_array(j, "data", "$");
    std::set<std::string> ids;
    for (std::size_t a = 0; a < data.size(); ++a) {
        const std::string aw = "$.data[" + std::to_string(a) + "]";
        const auto& paragraphs = detail::require_array(data[a], "paragraphs", aw);
        for (std::size_t p = 0; p < paragraphs.size(); ++p) {
            const std::string pw = aw + ".paragraphs[" + std::to_string(p) + "]";
            const std::string context = detail::require_string(paragraphs[p], "context", pw);
            const std::u32string ctx = utf8::decode(context);
            const auto& qas = detail::require_array(paragraphs[p], "qas", pw);
            ++set.num_groups;
            for (std::size_t q = 0; q < qas.size(); ++q) {
                const std::string qw = pw + ".qas[" + std::to_string(q) + "]";
                QAExample ex;
                ex.id = detail::require_string(qas[q], "id", qw);
                ex.group_id = std::to_string(a) + "/" + std::to_string(p);
                ex.question = detail::require_string(qas[q], "question", qw);
                ex.passages = {context};
                if (!ids.insert(ex.id).second) throw ParseError(qw + ".id: duplicate id " + ex.id);
                const auto& answers = detail::require_array(qas[q], "answers", qw);
                for (std::size_t k = 0; k < answers.size(); ++k) {
                    const std::string kw = qw + ".answers[" + std::to_string(k) + "]";
                    GoldAnswer g;
                    g.text = detail::require_string(answers[k], "text", kw);
                    const auto start = detail::require_int(answers[k], "answer_start", kw);
                    const auto fixed = repair_offset(ctx, utf8::decode(g.text),
                                                     static_cast<std::size_t>(std::max(0LL, start)));
                    if (!fixed) {
                        ex.valid = false;
                        set.warnings.push_back(ex.id + ": answer \"" + g.text +
                                               "\" not found near offset " + std::to_string(start));
                    } else {
                        if (static_cast<long long>(*fixed) != start) {
                            set.warnings.push_back(ex.id + ": answer offset repaired " +
                                                   std::to_string(start) + " -> " +
                                                   std::to_string(*fixed));
                        }
                        g.char_start = fixed;
                    }
                    ex.answers.push_back(std::move(g));
                }
                if (ex.answers.empty()) {
                    ex.valid = false;
                    set.warnings.push_back(ex.id + ": no answers");
                }
                set.items.push_back(std::move(ex));
            }
        }
    }
    return set;
}

inline QASet load_squad(const std::filesystem::path& path) {
    return squad_from_json(parse_json_file(path));
}

enum class DatasetFormat { automatic, squad, pqa };

/// Loads either format; `automatic` looks for the "data" (SQuAD) or
/// "pairs" (ParallelQA) key.
inline QASet load_qaset(const std::filesystem::path& path, DatasetFormat format) {
    const nlohmann::json j = parse_json_file(path);
    if (format == DatasetFormat::automatic) {
        if (j.is_object() && j.contains("pairs")) format = DatasetFormat::pqa;
        else if (j.is_object() && j.contains("data")) format = DatasetFormat::squad;
        else throw ParseError(path.string() + ": neither a ParallelQA nor a SQuAD file");
    }
    if (format == DatasetFormat::squad) return squad_from_json(j);
    ParallelQADataset ds = dataset_from_json(j);
    const auto violations = validate_dataset(ds);
    if (!violations.empty()) {
        throw ParseError(path.string() + ": " + violations.front().field + ": " +
                         violations.front().message);
    }
    return to_qaset(ds);
}

// ---------------------------------------------------------------------------
// Statistics

struct DatasetStats {
    std::size_t num_pairs = 0;
    std::size_t num_qas = 0;
    std::size_t num_answers = 0;
    double mean_answer_len_tokens = 0.0;
    double named_entity_answer_rate = 0.0;  // capitalization heuristic, approximate
    std::vector<std::size_t> answers_per_passage_index{0, 0};
};

/// An answer counts as a named entity when at least half of its tokens, as
/// they appear in the passage, are capitalized or numeric.
inline bool looks_like_named_entity(std::string_view answer_in_passage) {
    const auto tok = tokenize(answer_in_passage);
    if (tok.empty()) return false;
    std::size_t hits = 0;
    for (const auto& t : tok.tokens) {
        const auto cps = utf8::decode(t.surface);
        const bool numeric = std::all_of(cps.begin(), cps.end(), utf8::is_digit);
        if (numeric || utf8::is_upper(cps.front())) ++hits;
    }
    return 2 * hits >= tok.size();
}

inline DatasetStats compute_stats(const QASet& set) {
    if (set.items.empty()) throw InputError("empty dataset");
    DatasetStats s;
    s.num_pairs = set.num_groups;
    s.num_qas = set.items.size();
    std::size_t total_tokens = 0;
    std::size_t entities = 0;
    for (const auto& ex : set.items) {
        for (const auto& a : ex.answers) {
            ++s.num_answers;
            total_tokens += tokenize(a.text).size();
            std::string surface = a.text;
            if (a.char_start && a.passage_index >= 0 &&
                static_cast<std::size_t>(a.passage_index) < ex.passages.size()) {
                surface = utf8::slice(ex.passages[a.passage_index], *a.char_start,
                                      *a.char_start + utf8::length(a.text));
            }
            if (looks_like_named_entity(surface)) ++entities;
            if (a.passage_index >= 0 && a.passage_index < 2) ++s.answers_per_passage_index[a.passage_index];
        }
    }
    if (s.num_answers > 0) {
        s.mean_answer_len_tokens =
            static_cast<double>(total_tokens) / static_cast<double>(s.num_answers);
        s.named_entity_answer_rate =
            static_cast<double>(entities) / static_cast<double>(s.num_answers);
    }
    return s;
}

inline DatasetStats compute_stats(const ParallelQADataset& ds) {
    DatasetStats s = compute_stats(to_qaset(ds));
    s.num_pairs = ds.pairs.size();
    return s;
}

inline nlohmann::json to_json(const DatasetStats& s) {
    return {{"num_pairs", s.num_pairs},
            {"num_qas", s.num_qas},
            {"num_answers", s.num_answers},
            {"mean_answer_len_tokens", s.mean_answer_len_tokens},
            {"named_entity_answer_rate", s.named_entity_answer_rate},
            {"named_entity_rate_method", "approximate: capitalization heuristic"},
            {"answers_per_passage_index", s.answers_per_passage_index}};
}

}  // namespace pqa
