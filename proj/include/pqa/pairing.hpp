#pragma once

// News/wiki passage pairing: frequent-entity extraction from news articles,
// sentence-aligned fragmentation of wiki documents, and nearest-neighbour
// pairing by a convex combination of tf-idf cosine and topic-vector cosine.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "pqa/corpus_io.hpp"
#include "pqa/error.hpp"
#include "pqa/lexmetrics.hpp"
#include "pqa/textproc.hpp"
#include "pqa/topicmodel.hpp"

namespace pqa {

struct EntityCount {
    std::string entity;
    std::size_t count = 0;

    friend bool operator==(const EntityCount&, const EntityCount&) = default;
};

/// Per-document entity lists that replace the capitalization heuristic.
using EntityOverrides = std::map<std::string, std::vector<std::string>>;

struct PassageFragment {
    std::string parent_id;
    std::size_t fragment_index = 0;
    std::string text;
    std::size_t word_count = 0;
    bool oversized = false;  // a single sentence longer than max_words

    std::string id() const { return parent_id + "#" + std::to_string(fragment_index); }

    friend bool operator==(const PassageFragment&, const PassageFragment&) = default;
};

struct PairingConfig {
    std::size_t entities_per_article = 3;
    std::size_t k_neighbors = 5;
    double lambda = 0.5;  // weight of the tf-idf score
    std::size_t max_words = 500;
    double min_score = 0.05;
    int infer_iterations = 100;
    std::uint64_t seed = 7;

    void validate() const {
        if (k_neighbors < 1) throw InputError("k_neighbors must be >= 1");
        if (!(lambda >= 0.0 && lambda <= 1.0)) throw InputError("lambda must be in [0, 1]");
        if (max_words < 1) throw InputError("max_words must be >= 1");
        if (entities_per_article < 1) throw InputError("entities_per_article must be >= 1");
    }
};

struct PassagePairCandidate {
    std::string news_id;
    PassageFragment wiki_fragment;
    double score = 0.0;
    double tfidf_score = 0.0;
    double topic_score = 0.0;

    friend bool operator==(const PassagePairCandidate&, const PassagePairCandidate&) = default;
};

struct SkippedNews {
    std::string news_id;
    double best_score = 0.0;
    std::string reason;
};

struct PairingResult {
    std::vector<PassagePairCandidate> pairs;  // at most one per news doc
    std::map<std::string, std::vector<PassagePairCandidate>> neighbors;  // top-k per news doc
    std::vector<SkippedNews> skipped;
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view key) {
    std::uint64_t z = seed ^ fnv1a(key);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::string strip_possessive(std::string s) {
    for (std::string_view suffix : {std::string_view("'s"), std::string_view("\xE2\x80\x99s")}) {
        if (s.size() > suffix.size() && s.ends_with(suffix)) {
            s.resize(s.size() - suffix.size());
            break;
        }
    }
    return s;
}

inline bool is_capitalized(const Token& t) {
    const auto cps = utf8::decode(t.surface);
    return !cps.empty() && utf8::is_upper(cps.front());
}

inline bool better(const PassagePairCandidate& a, const PassagePairCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.wiki_fragment.parent_id != b.wiki_fragment.parent_id) {
        return a.wiki_fragment.parent_id < b.wiki_fragment.parent_id;
    }
    return a.wiki_fragment.fragment_index < b.wiki_fragment.fragment_index;
}

}  // namespace detail

/// Most frequent entity mentions, by a capitalization heuristic: maximal runs
/// of capitalized tokens separated only by whitespace. A run that starts a
/// sentence counts only if the same string also appears mid-sentence;
/// otherwise its first word is dropped and the remainder (if any) counts.
/// Ranked by count, ties broken lexicographically.
inline std::vector<EntityCount> extract_entities(const RawDocument& doc, std::size_t top_n,
                                                 const EntityOverrides* overrides = nullptr) {
    if (top_n < 1) throw InputError("top_n must be >= 1");
    std::map<std::string, std::size_t> counts;

    if (overrides != nullptr) {
        if (auto it = overrides->find(doc.id); it != overrides->end()) {
            for (const auto& e : it->second) {
                std::size_t n = 0;
                for (auto pos = doc.text.find(e); !e.empty() && pos != std::string::npos;
                     pos = doc.text.find(e, pos + e.size())) {
                    ++n;
                }
                counts[e] = n;
            }
            std::vector<EntityCount> out;
            for (const auto& e : it->second) out.push_back({e, counts[e]});
            std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
                return a.count != b.count ? a.count > b.count : a.entity < b.entity;
            });
            if (out.size() > top_n) out.resize(top_n);
            return out;
        }
    }

    const std::u32string cps = utf8::decode(doc.text);
    const auto tokens = detail::tokenize_codepoints(cps);
    const auto sentences = detail::split_codepoints(cps);

    struct Run {
        std::vector<std::string> words;
        bool initial = false;
    };
    std::vector<Run> runs;
    std::size_t ti = 0;
    for (const auto& s : sentences) {
        while (ti < tokens.size() && tokens[ti].char_start < s.char_start) ++ti;
        bool first_in_sentence = true;
        while (ti < tokens.size() && tokens[ti].char_end <= s.char_end) {
            if (!detail::is_capitalized(tokens[ti])) {
                first_in_sentence = false;
                ++ti;
                continue;
            }
            Run run;
            run.initial = first_in_sentence;
            run.words.push_back(tokens[ti].surface);
            std::size_t j = ti + 1;
            while (j < tokens.size() && tokens[j].char_end <= s.char_end &&
                   detail::is_capitalized(tokens[j])) {
                bool gap_is_space = true;
                for (std::size_t c = tokens[j - 1].char_end; c < tokens[j].char_start; ++c) {
                    if (!utf8::is_space(cps[c])) {
                        gap_is_space = false;
                        break;
                    }
                }
                if (!gap_is_space) break;
                run.words.push_back(tokens[j].surface);
                ++j;
            }
            run.words.back() = detail::strip_possessive(run.words.back());
            runs.push_back(std::move(run));
            first_in_sentence = false;
            ti = j;
        }
    }

    auto join = [](auto first, auto last) {
        std::string out;
        for (auto it = first; it != last; ++it) {
            if (!out.empty()) out.push_back(' ');
            out += *it;
        }
        return out;
    };

    std::set<std::string> mid_sentence;
    for (const auto& r : runs) {
        if (!r.initial) mid_sentence.insert(join(r.words.begin(), r.words.end()));
    }
    for (const auto& r : runs) {
        const std::string whole = join(r.words.begin(), r.words.end());
        if (!r.initial || mid_sentence.contains(whole)) {
            ++counts[whole];
        } else if (r.words.size() > 1) {
            ++counts[join(r.words.begin() + 1, r.words.end())];
        }
    }

    std::vector<EntityCount> out;
    for (const auto& [e, n] : counts) out.push_back({e, n});
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.count > b.count; });
    if (out.size() > top_n) out.resize(top_n);
    return out;
}

/// Greedy packing of whole sentences into fragments of at most max_words
/// whitespace-delimited words. A sentence longer than max_words becomes its
/// own fragment, flagged oversized.
inline std::vector<PassageFragment> fragment(const RawDocument& doc, std::size_t max_words = 500) {
    if (max_words < 1) throw InputError("max_words must be >= 1");
    const std::u32string cps = utf8::decode(doc.text);
    const auto sentences = detail::split_codepoints(cps);
    std::vector<PassageFragment> out;

    std::size_t group_start = 0;
    std::size_t group_end = 0;
    std::size_t group_words = 0;
    bool open = false;
    auto flush = [&](bool oversized) {
        if (!open) return;
        out.push_back(PassageFragment{
            doc.id, out.size(),
            utf8::encode(std::u32string_view(cps).substr(group_start, group_end - group_start)),
            group_words, oversized});
        open = false;
        group_words = 0;
    };

    for (const auto& s : sentences) {
        const std::size_t wc = word_count(
            utf8::encode(std::u32string_view(cps).substr(s.char_start, s.char_end - s.char_start)));
        if (wc > max_words) {
            flush(false);
            group_start = s.char_start;
            group_end = s.char_end;
            group_words = wc;
            open = true;
            flush(true);
            continue;
        }
        if (open && group_words + wc > max_words) flush(false);
        if (!open) {
            group_start = s.char_start;
            open = true;
        }
        group_end = s.char_end;
        group_words += wc;
    }
    flush(false);
    return out;
}

/// For each news document, scores every pool fragment by
///   lambda * cos(tfidf) + (1 - lambda) * cos(topic vectors)
/// with tf-idf statistics pooled over news documents and fragments. Keeps the
/// top k_neighbors candidates scoring >= min_score and emits the best one as
/// the pair. Fragments may be shared between pairs; news documents never are.
/// Ties go to the lower parent_id, then the lower fragment_index.
inline PairingResult pair_passages(const std::vector<RawDocument>& news,
                                   const std::vector<PassageFragment>& wiki_pool,
                                   const TopicModel& model, const PairingConfig& config) {
    config.validate();
    if (wiki_pool.empty()) throw InputError("empty wiki pool");

    std::vector<TokenizedText> news_tok;
    std::vector<TokenizedText> wiki_tok;
    std::vector<TokenizedText> all;
    for (const auto& d : news) news_tok.push_back(tokenize(d.text));
    for (const auto& f : wiki_pool) wiki_tok.push_back(tokenize(f.text));
    all.insert(all.end(), news_tok.begin(), news_tok.end());
    all.insert(all.end(), wiki_tok.begin(), wiki_tok.end());
    const CorpusStats stats = build_corpus_stats(all);

    std::vector<SparseVector> wiki_vec;
    std::vector<TopicVector> wiki_topics;
    for (std::size_t i = 0; i < wiki_pool.size(); ++i) {
        wiki_vec.push_back(tfidf_vector(wiki_tok[i], stats));
        wiki_topics.push_back(infer_topics(model, wiki_tok[i], config.infer_iterations,
                                           detail::mix_seed(config.seed, wiki_pool[i].id())));
    }

    PairingResult result;
    for (std::size_t n = 0; n < news.size(); ++n) {
        const SparseVector nv = tfidf_vector(news_tok[n], stats);
        const TopicVector nt = infer_topics(model, news_tok[n], config.infer_iterations,
                                            detail::mix_seed(config.seed, news[n].id));
        std::vector<PassagePairCandidate> cands;
        cands.reserve(wiki_pool.size());
        for (std::size_t i = 0; i < wiki_pool.size(); ++i) {
            PassagePairCandidate c;
            c.news_id = news[n].id;
            c.wiki_fragment = wiki_pool[i];
            c.tfidf_score = cosine(nv, wiki_vec[i]);
            c.topic_score = cosine(nt, wiki_topics[i]);
            c.score = config.lambda * c.tfidf_score + (1.0 - config.lambda) * c.topic_score;
            cands.push_back(std::move(c));
        }
        std::sort(cands.begin(), cands.end(), detail::better);
        const double best = cands.front().score;
        std::erase_if(cands, [&](const auto& c) { return c.score < config.min_score; });
        if (cands.size() > config.k_neighbors) cands.resize(config.k_neighbors);
        if (cands.empty()) {
            result.skipped.push_back({news[n].id, best, "no candidate reached min_score"});
            continue;
        }
        result.pairs.push_back(cands.front());
        result.neighbors.emplace(news[n].id, std::move(cands));
    }
    return result;
}

inline nlohmann::json to_json(const PassageFragment& f) {
    return {{"parent_id", f.parent_id},     {"fragment_index", f.fragment_index},
            {"text", f.text},               {"word_count", f.word_count},
            {"oversized", f.oversized}};
}

inline nlohmann::json to_json(const PassagePairCandidate& c) {
    return {{"news_id", c.news_id},         {"wiki_fragment", to_json(c.wiki_fragment)},
            {"score", c.score},             {"tfidf_score", c.tfidf_score},
            {"topic_score", c.topic_score}};
}

inline nlohmann::json to_json(const SkippedNews& s) {
    return {{"news_id", s.news_id}, {"best_score", s.best_score}, {"reason", s.reason}};
}

/// Everything `pqa pair` does, from raw corpora to pairs.
struct PipelineOptions {
    PairingConfig pairing;
    LdaConfig lda;
    std::optional<std::map<std::string, std::filesystem::path>> manifest;
    EntityOverrides entity_overrides;
};

struct PipelineResult {
    PairingResult pairing;
    std::vector<PassageFragment> pool;
    std::map<std::string, std::vector<EntityCount>> entities;
    std::vector<std::string> missing_entities;  // selected but absent from the manifest
};

/// Selects wiki documents through the entity manifest (or uses every wiki
/// document when there is none), fragments them, trains LDA on news documents
/// plus fragments, and pairs.
inline PipelineResult run_pairing_pipeline(const std::vector<RawDocument>& news,
                                           const std::vector<RawDocument>& wiki,
                                           const PipelineOptions& opts) {
    opts.pairing.validate();
    if (news.empty()) throw InputError("empty news corpus");
    PipelineResult out;

    std::vector<RawDocument> selected;
    if (opts.manifest) {
        std::map<std::string, const RawDocument*> by_id;
        for (const auto& w : wiki) by_id.emplace(w.id, &w);
        std::set<std::string> chosen;
        for (const auto& d : news) {
            auto ents = extract_entities(d, opts.pairing.entities_per_article,
                                         &opts.entity_overrides);
            for (const auto& e : ents) {
                auto it = opts.manifest->find(e.entity);
                if (it == opts.manifest->end()) {
                    out.missing_entities.push_back(d.id + ": " + e.entity);
                    continue;
                }
                const std::string stem = it->second.stem().string();
                if (by_id.contains(stem)) chosen.insert(stem);
                else out.missing_entities.push_back(d.id + ": " + e.entity + " (file not loaded)");
            }
            out.entities.emplace(d.id, std::move(ents));
        }
        for (const auto& id : chosen) selected.push_back(*by_id.at(id));
    } else {
        selected = wiki;
    }

    for (const auto& w : selected) {
        auto frags = fragment(w, opts.pairing.max_words);
        out.pool.insert(out.pool.end(), frags.begin(), frags.end());
    }
    if (out.pool.empty()) throw InputError("empty wiki pool");

    std::vector<TokenizedText> training;
    for (const auto& d : news) training.push_back(tokenize(d.text));
    for (const auto& f : out.pool) training.push_back(tokenize(f.text));
    const TopicModel model = train_lda(training, opts.lda);

    out.pairing = pair_passages(news, out.pool, model, opts.pairing);
    return out;
}

}  // namespace pqa
