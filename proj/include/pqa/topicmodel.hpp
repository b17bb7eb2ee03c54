#pragma once

// Latent Dirichlet Allocation trained by collapsed Gibbs sampling.
//
// The sampler draws z for each in-vocabulary token from
//
//   p(z = k | rest) ∝ (n_dk + alpha) (n_kw + beta) / (n_k + V beta)
//
// where n_dk counts tokens of document d assigned to k, n_kw counts word w
// assigned to k over the corpus and n_k = sum_w n_kw. Randomness comes from
// std::mt19937_64 (fully specified by the standard) with a hand-rolled
// uniform draw, so a seed yields the same model on every platform.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "pqa/detail/stopwords.hpp"
#include "pqa/error.hpp"
#include "pqa/textproc.hpp"

namespace pqa {

/// Deterministic uniform draws in [0, 1) from a standard-specified engine.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::size_t below(std::size_t n) {
        return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
    }

private:
    std::mt19937_64 engine_;
};

struct LdaConfig {
    int num_topics = 50;
    std::optional<double> alpha;  // defaults to 50 / num_topics
    double beta = 0.01;
    int iterations = 1000;
    std::uint64_t seed = 1;
    std::size_t min_term_count = 2;
    bool use_stopwords = true;

    double resolved_alpha() const {
        return alpha.value_or(50.0 / static_cast<double>(std::max(num_topics, 1)));
    }
};

using TopicVector = std::vector<double>;

class TopicModel {
public:
    TopicModel() = default;

    TopicModel(int num_topics, double alpha, double beta, std::vector<std::string> vocab,
               std::vector<std::int64_t> topic_word_counts)
        : num_topics_(num_topics),
          alpha_(alpha),
          beta_(beta),
          vocab_(std::move(vocab)),
          topic_word_(std::move(topic_word_counts)) {
        if (num_topics_ < 1) throw InputError("num_topics must be >= 1");
        if (!(alpha_ > 0.0) || !(beta_ > 0.0)) throw InputError("alpha and beta must be > 0");
        if (topic_word_.size() != static_cast<std::size_t>(num_topics_) * vocab_.size()) {
            throw InputError("topic-word matrix has wrong size");
        }
        for (std::size_t w = 0; w < vocab_.size(); ++w) {
            if (!index_.emplace(vocab_[w], w).second) {
                throw InputError("duplicate vocabulary term: " + vocab_[w]);
            }
        }
        topic_totals_.assign(num_topics_, 0);
        for (int k = 0; k < num_topics_; ++k) {
            for (std::size_t w = 0; w < vocab_.size(); ++w) {
                const auto c = topic_word_[k * vocab_.size() + w];
                if (c < 0) throw InputError("negative topic-word count");
                topic_totals_[k] += c;
            }
        }
    }

    int num_topics() const { return num_topics_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    const std::vector<std::string>& vocab() const { return vocab_; }
    std::size_t vocab_size() const { return vocab_.size(); }
    std::span<const std::int64_t> topic_word_counts() const { return topic_word_; }
    std::span<const std::int64_t> topic_totals() const { return topic_totals_; }

    std::int64_t count(int topic, std::size_t word) const {
        return topic_word_[topic * vocab_.size() + word];
    }

    std::optional<std::size_t> word_id(const std::string& term) const {
        auto it = index_.find(term);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    friend bool operator==(const TopicModel& a, const TopicModel& b) {
        return a.num_topics_ == b.num_topics_ && a.alpha_ == b.alpha_ && a.beta_ == b.beta_ &&
               a.vocab_ == b.vocab_ && a.topic_word_ == b.topic_word_;
    }

private:
    int num_topics_ = 1;
    double alpha_ = 1.0;
    double beta_ = 0.01;
    std::vector<std::string> vocab_;
    std::vector<std::int64_t> topic_word_;  // K x V, row-major
    std::vector<std::int64_t> topic_totals_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Case-folded terms with corpus frequency >= min_count, minus stopwords,
/// sorted lexicographically.
inline std::vector<std::string> build_vocabulary(std::span<const TokenizedText> corpus,
                                                 std::size_t min_count = 2,
                                                 bool use_stopwords = true) {
    std::map<std::string, std::size_t> freq;
    for (const auto& doc : corpus) {
        for (const auto& t : doc.tokens) ++freq[t.term];
    }
    std::vector<std::string> vocab;
    for (const auto& [term, n] : freq) {
        if (n < min_count) continue;
        if (use_stopwords &&
            std::find(std::begin(detail::kStopwords), std::end(detail::kStopwords), term) !=
                std::end(detail::kStopwords)) {
            continue;
        }
        vocab.push_back(term);
    }
    return vocab;
}

/// State visible to a per-sweep observer. Counts are views into the sampler
/// and are only valid during the callback.
struct SweepSnapshot {
    int sweep = 0;  // 1-based
    int num_topics = 0;
    std::size_t vocab_size = 0;
    std::size_t num_tokens = 0;  // in-vocabulary tokens in the corpus
    std::span<const std::int64_t> topic_word;
    std::span<const std::int64_t> topic_totals;
    std::span<const std::vector<std::int64_t>> doc_topic;
    std::span<const std::vector<std::size_t>> doc_words;
};

using SweepObserver = std::function<void(const SweepSnapshot&)>;

struct LdaFit {
    TopicModel model;
    std::vector<std::vector<std::int64_t>> doc_topic_counts;  // D x K, final sweep
};

namespace detail {

inline std::size_t sample_discrete(std::span<double> weights, Rng& rng) {
    double total = 0.0;
    for (double& w : weights) {
        total += w;
        w = total;
    }
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(weights.begin(), weights.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - weights.begin()),
                                 weights.size() - 1);
}

}  // namespace detail

/// Trains LDA and also returns the final per-document topic counts.
inline LdaFit fit_lda(std::span<const TokenizedText> corpus, const LdaConfig& config,
                      const SweepObserver& observer = {}) {
    if (corpus.empty()) throw InputError("empty corpus");
    if (config.num_topics < 1) throw InputError("num_topics must be >= 1");
    if (config.iterations < 1) throw InputError("iterations must be >= 1");
    const double alpha = config.resolved_alpha();
    const double beta = config.beta;
    if (!(alpha > 0.0) || !(beta > 0.0)) throw InputError("alpha and beta must be > 0");

    const auto K = static_cast<std::size_t>(config.num_topics);
    std::vector<std::string> vocab =
        build_vocabulary(corpus, config.min_term_count, config.use_stopwords);
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t w = 0; w < vocab.size(); ++w) index.emplace(vocab[w], w);
    const std::size_t V = vocab.size();

    std::vector<std::vector<std::size_t>> words(corpus.size());
    std::size_t num_tokens = 0;
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        for (const auto& t : corpus[d].tokens) {
            auto it = index.find(t.term);
            if (it != index.end()) words[d].push_back(it->second);
        }
        num_tokens += words[d].size();
    }
    if (num_tokens < K) throw InputError("corpus has fewer in-vocabulary tokens than topics");

    Rng rng(config.seed);
    std::vector<std::int64_t> topic_word(K * V, 0);
    std::vector<std::int64_t> topic_totals(K, 0);
    std::vector<std::vector<std::int64_t>> doc_topic(corpus.size(), std::vector<std::int64_t>(K, 0));
    std::vector<std::vector<std::size_t>> z(corpus.size());

    for (std::size_t d = 0; d < corpus.size(); ++d) {
        z[d].resize(words[d].size());
        for (std::size_t i = 0; i < words[d].size(); ++i) {
            const std::size_t k = rng.below(K);
            z[d][i] = k;
            ++topic_word[k * V + words[d][i]];
            ++topic_totals[k];
            ++doc_topic[d][k];
        }
    }

    const double vbeta = static_cast<double>(V) * beta;
    std::vector<double> p(K);
    for (int sweep = 1; sweep <= config.iterations; ++sweep) {
        for (std::size_t d = 0; d < corpus.size(); ++d) {
            for (std::size_t i = 0; i < words[d].size(); ++i) {
                const std::size_t w = words[d][i];
                std::size_t k = z[d][i];
                --topic_word[k * V + w];
                --topic_totals[k];
                --doc_topic[d][k];
                for (std::size_t t = 0; t < K; ++t) {
                    p[t] = (static_cast<double>(doc_topic[d][t]) + alpha) *
                           (static_cast<double>(topic_word[t * V + w]) + beta) /
                           (static_cast<double>(topic_totals[t]) + vbeta);
                }
                k = detail::sample_discrete(p, rng);
                z[d][i] = k;
                ++topic_word[k * V + w];
                ++topic_totals[k];
                ++doc_topic[d][k];
            }
        }
        if (observer) {
            observer(SweepSnapshot{sweep, config.num_topics, V, num_tokens, topic_word,
                                   topic_totals, doc_topic, words});
        }
    }

    return LdaFit{TopicModel(config.num_topics, alpha, beta, std::move(vocab), std::move(topic_word)),
                  std::move(doc_topic)};
}

inline TopicModel train_lda(std::span<const TokenizedText> corpus, const LdaConfig& config,
                            const SweepObserver& observer = {}) {
    return fit_lda(corpus, config, observer).model;
}

/// Folds an unseen document into a trained model: Gibbs sampling over the
/// document's own assignments with the topic-word counts held fixed.
/// Returns (n_dk + alpha) / (|doc| + K alpha) from the final sweep, where
/// |doc| counts in-vocabulary tokens only.
inline TopicVector infer_topics(const TopicModel& model, const TokenizedText& doc, int iterations,
                                std::uint64_t seed) {
    const auto K = static_cast<std::size_t>(model.num_topics());
    std::vector<std::size_t> words;
    for (const auto& t : doc.tokens) {
        if (auto w = model.word_id(t.term)) words.push_back(*w);
    }
    if (words.empty()) return TopicVector(K, 1.0 / static_cast<double>(K));

    const double alpha = model.alpha();
    const double beta = model.beta();
    const double vbeta = static_cast<double>(model.vocab_size()) * beta;
    const auto totals = model.topic_totals();

    Rng rng(seed);
    std::vector<std::int64_t> doc_topic(K, 0);
    std::vector<std::size_t> z(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
        z[i] = rng.below(K);
        ++doc_topic[z[i]];
    }
    std::vector<double> p(K);
    for (int it = 0; it < std::max(iterations, 0); ++it) {
        for (std::size_t i = 0; i < words.size(); ++i) {
            --doc_topic[z[i]];
            for (std::size_t t = 0; t < K; ++t) {
                p[t] = (static_cast<double>(doc_topic[t]) + alpha) *
                       (static_cast<double>(model.count(static_cast<int>(t), words[i])) + beta) /
                       (static_cast<double>(totals[t]) + vbeta);
            }
            z[i] = detail::sample_discrete(p, rng);
            ++doc_topic[z[i]];
        }
    }

    TopicVector theta(K);
    const double denom = static_cast<double>(words.size()) + static_cast<double>(K) * alpha;
    for (std::size_t k = 0; k < K; ++k) {
        theta[k] = (static_cast<double>(doc_topic[k]) + alpha) / denom;
    }
    return theta;
}

inline double cosine(const TopicVector& a, const TopicVector& b) {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

// Model files: {"format": "pqa-lda", "version": 1, "num_topics", "alpha",
// "beta", "vocab": [...], "topic_word_counts": [K*V ints, row-major]}.

inline constexpr std::string_view kModelFormat = "pqa-lda";
inline constexpr int kModelVersion = 1;

inline nlohmann::json to_json(const TopicModel& m) {
    return nlohmann::json{
        {"format", kModelFormat},
        {"version", kModelVersion},
        {"num_topics", m.num_topics()},
        {"alpha", m.alpha()},
        {"beta", m.beta()},
        {"vocab", m.vocab()},
        {"topic_word_counts",
         std::vector<std::int64_t>(m.topic_word_counts().begin(), m.topic_word_counts().end())},
    };
}

inline TopicModel topic_model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != kModelFormat) {
            throw ParseError("format: expected \"pqa-lda\"");
        }
        if (j.at("version").get<int>() != kModelVersion) {
            throw ParseError("version: unsupported model version");
        }
        return TopicModel(j.at("num_topics").get<int>(), j.at("alpha").get<double>(),
                          j.at("beta").get<double>(), j.at("vocab").get<std::vector<std::string>>(),
                          j.at("topic_word_counts").get<std::vector<std::int64_t>>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("topic model: ") + e.what());
    } catch (const ParseError&) {
        throw;
    } catch (const InputError& e) {
        throw ParseError(std::string("topic model: ") + e.what());
    }
}

inline void save_topic_model(const TopicModel& m, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json(m).dump() << '\n';
}

inline TopicModel load_topic_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return topic_model_from_json(j);
}

}  // namespace pqa
