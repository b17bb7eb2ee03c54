#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>

#include "pqa/topicmodel.hpp"
#include "synthetic.hpp"

namespace {

using pqa::LdaConfig;
using pqa::testing::two_group_corpus;

LdaConfig small_config(int k, int iterations = 200) {
    LdaConfig c;
    c.num_topics = k;
    c.alpha = 0.1;
    c.iterations = iterations;
    c.seed = 42;
    return c;
}

std::size_t argmax(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

TEST(Vocabulary, FrequencyThresholdAndStopwords) {
    const std::vector<pqa::TokenizedText> corpus{pqa::tokenize("the river the Senate"),
                                                 pqa::tokenize("River bank senate once")};
    EXPECT_EQ(pqa::build_vocabulary(corpus), (std::vector<std::string>{"river", "senate"}));
    EXPECT_EQ(pqa::build_vocabulary(corpus, 2, false),
              (std::vector<std::string>{"river", "senate", "the"}));
}

TEST(Lda, DefaultsResolve) {
    LdaConfig c;
    EXPECT_EQ(c.num_topics, 50);
    EXPECT_DOUBLE_EQ(c.resolved_alpha(), 1.0);
    EXPECT_DOUBLE_EQ(c.beta, 0.01);
    EXPECT_EQ(c.iterations, 1000);
}

TEST(Lda, RejectsBadInput) {
    const auto corpus = two_group_corpus(2, 10, 1);
    std::vector<pqa::TokenizedText> none;
    EXPECT_THROW(pqa::train_lda(none, small_config(2)), pqa::InputError);
    EXPECT_THROW(pqa::train_lda(corpus, small_config(0)), pqa::InputError);
    EXPECT_THROW(pqa::train_lda(corpus, small_config(2, 0)), pqa::InputError);
    EXPECT_THROW(pqa::train_lda(corpus, small_config(1000)), pqa::InputError);
}

TEST(Lda, SingleTopicIsDegenerate) {
    const auto corpus = two_group_corpus(5, 20, 2);
    const auto model = pqa::train_lda(corpus, small_config(1, 20));
    for (const auto& doc : corpus) {
        EXPECT_EQ(pqa::infer_topics(model, doc, 20, 3), (pqa::TopicVector{1.0}));
    }
    EXPECT_EQ(pqa::infer_topics(model, pqa::tokenize("unseen words only"), 20, 3),
              (pqa::TopicVector{1.0}));
}

TEST(Lda, OutOfVocabularyDocumentIsUniform) {
    const auto model = pqa::train_lda(two_group_corpus(5, 20, 3), small_config(4, 10));
    EXPECT_EQ(pqa::infer_topics(model, pqa::tokenize("nothing here"), 10, 1),
              pqa::TopicVector(4, 0.25));
}

TEST(Lda, CountsConservedAfterEverySweep) {
    const auto corpus = two_group_corpus(10, 30, 4);
    int sweeps = 0;
    pqa::train_lda(corpus, small_config(3, 25), [&](const pqa::SweepSnapshot& s) {
        ++sweeps;
        const auto total = std::accumulate(s.topic_totals.begin(), s.topic_totals.end(), std::int64_t{0});
        EXPECT_EQ(total, static_cast<std::int64_t>(s.num_tokens));
        for (int k = 0; k < s.num_topics; ++k) {
            std::int64_t row = 0;
            for (std::size_t w = 0; w < s.vocab_size; ++w) row += s.topic_word[k * s.vocab_size + w];
            EXPECT_EQ(row, s.topic_totals[k]);
        }
        for (std::size_t d = 0; d < s.doc_topic.size(); ++d) {
            const auto n = std::accumulate(s.doc_topic[d].begin(), s.doc_topic[d].end(), std::int64_t{0});
            EXPECT_EQ(n, static_cast<std::int64_t>(s.doc_words[d].size()));
        }
    });
    EXPECT_EQ(sweeps, 25);
}

TEST(Lda, DeterministicForSeed) {
    const auto corpus = two_group_corpus(10, 30, 5);
    EXPECT_EQ(pqa::train_lda(corpus, small_config(3, 30)), pqa::train_lda(corpus, small_config(3, 30)));
    auto other = small_config(3, 30);
    other.seed = 43;
    EXPECT_FALSE(pqa::train_lda(corpus, small_config(3, 30)) == pqa::train_lda(corpus, other));
    const auto m = pqa::train_lda(corpus, small_config(3, 30));
    EXPECT_EQ(pqa::infer_topics(m, corpus[0], 50, 9), pqa::infer_topics(m, corpus[0], 50, 9));
}

TEST(Lda, TwoVocabularySeparation) {
    const auto corpus = two_group_corpus(20, 50, 6);
    const auto model = pqa::train_lda(corpus, small_config(2, 200));
    std::vector<pqa::TopicVector> theta;
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        theta.push_back(pqa::infer_topics(model, corpus[d], 100, 1000 + d));
    }
    double min_within = 1.0;
    double max_across = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        for (std::size_t j = i + 1; j < theta.size(); ++j) {
            const double c = pqa::cosine(theta[i], theta[j]);
            if (i % 2 == j % 2) min_within = std::min(min_within, c);
            else max_across = std::max(max_across, c);
        }
    }
    EXPECT_GE(min_within, 0.9);
    EXPECT_LE(max_across, 0.3);
}

TEST(Lda, ReinferenceMatchesTrainingAssignments) {
    const auto corpus = two_group_corpus(20, 50, 7);
    const auto fit = pqa::fit_lda(corpus, small_config(2, 200));
    std::size_t agree = 0;
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        const auto theta = pqa::infer_topics(fit.model, corpus[d], 100, 77 + d);
        const auto& counts = fit.doc_topic_counts[d];
        const auto trained = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
        if (argmax(theta) == trained) ++agree;
    }
    EXPECT_GE(10 * agree, 9 * corpus.size());
}

TEST(LdaProperties, TopicVectorsAreDistributions) {
    const auto corpus = two_group_corpus(8, 25, 8);
    for (int k : {1, 2, 3, 7}) {
        const auto model = pqa::train_lda(corpus, small_config(k, 20));
        std::mt19937 rng(k);
        for (int i = 0; i < 30; ++i) {
            const auto doc = pqa::tokenize(pqa::testing::group_document(i % 2, 1 + i, rng) + " zzz");
            const auto theta = pqa::infer_topics(model, doc, 15, i);
            ASSERT_EQ(theta.size(), static_cast<std::size_t>(k));
            EXPECT_NEAR(std::accumulate(theta.begin(), theta.end(), 0.0), 1.0, 1e-9);
            for (double x : theta) EXPECT_GE(x, 0.0);
        }
    }
}

TEST(TopicModelIo, JsonRoundTrip) {
    const auto model = pqa::train_lda(two_group_corpus(5, 20, 9), small_config(3, 10));
    EXPECT_EQ(pqa::topic_model_from_json(pqa::to_json(model)), model);
    const auto path = std::filesystem::temp_directory_path() / "pqa_topic_model_test.json";
    pqa::save_topic_model(model, path);
    EXPECT_EQ(pqa::load_topic_model(path), model);
    std::filesystem::remove(path);
}

TEST(TopicModelIo, RejectsMalformedModel) {
    auto j = pqa::to_json(pqa::train_lda(two_group_corpus(5, 20, 10), small_config(2, 5)));
    j["topic_word_counts"].erase(0);
    EXPECT_THROW(pqa::topic_model_from_json(j), pqa::InputError);
    j = nlohmann::json{{"format", "other"}};
    EXPECT_THROW(pqa::topic_model_from_json(j), pqa::InputError);
}

}  // namespace
