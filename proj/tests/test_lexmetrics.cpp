#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "pqa/lexmetrics.hpp"

namespace {

using pqa::tokenize;

pqa::CorpusStats stats_of(const std::vector<std::string>& docs) {
    std::vector<pqa::TokenizedText> t;
    for (const auto& d : docs) t.push_back(tokenize(d));
    return pqa::build_corpus_stats(t);
}

TEST(CorpusStats, Examples) {
    auto s = stats_of({"a b", "b c"});
    EXPECT_EQ(s.num_docs, 2u);
    EXPECT_EQ(s.df("a"), 1u);
    EXPECT_EQ(s.df("b"), 2u);
    EXPECT_EQ(s.df("c"), 1u);
    EXPECT_DOUBLE_EQ(s.avg_doc_len, 2.0);

    s = stats_of({"a"});
    EXPECT_EQ(s.num_docs, 1u);
    EXPECT_DOUBLE_EQ(s.avg_doc_len, 1.0);

    s = stats_of({"a a a"});
    EXPECT_EQ(s.df("a"), 1u);
}

TEST(CorpusStats, EmptyCorpusRejected) {
    std::vector<pqa::TokenizedText> none;
    EXPECT_THROW(pqa::build_corpus_stats(none), pqa::InputError);
}

TEST(Jaccard, Examples) {
    EXPECT_DOUBLE_EQ(pqa::jaccard(tokenize("who won"), tokenize("won who")), 1.0);
    EXPECT_DOUBLE_EQ(pqa::jaccard(tokenize("who won"), tokenize("match point")), 0.0);
    EXPECT_DOUBLE_EQ(pqa::jaccard(tokenize("who won"), tokenize("won match")), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(pqa::jaccard(tokenize(""), tokenize("")), 0.0);
    EXPECT_DOUBLE_EQ(pqa::jaccard(tokenize("Who"), tokenize("who")), 1.0);
}

TEST(Tfidf, Examples) {
    const auto one = stats_of({"a"});
    EXPECT_TRUE(pqa::tfidf_vector(tokenize(""), one).empty());
    // df = N gives weight 0; sparse vectors leave zero entries out.
    EXPECT_TRUE(pqa::tfidf_vector(tokenize("a"), one).empty());

    const auto three = stats_of({"a a", "b", "c"});
    EXPECT_NEAR(pqa::tfidf_vector(tokenize("a a"), three).at("a"), 2.0 * std::log(2.0), 1e-12);
}

TEST(Cosine, Examples) {
    const pqa::SparseVector v{{"a", 1.0}, {"b", 2.0}};
    EXPECT_NEAR(pqa::cosine(v, v), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(pqa::cosine({{"a", 1.0}}, {{"b", 1.0}}), 0.0);
    EXPECT_NEAR(pqa::cosine({{"a", 1.0}, {"b", 1.0}}, {{"a", 1.0}}), 1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_DOUBLE_EQ(pqa::cosine({}, v), 0.0);
}

TEST(Bm25, NoSharedTermScoresZero) {
    const auto s = stats_of({"a b", "c d"});
    EXPECT_DOUBLE_EQ(pqa::bm25(tokenize("x"), tokenize("a b"), s), 0.0);
}

TEST(Bm25, HandComputedExample) {
    // N = 2, df(a) = 1, tf = 1, |doc| = avg_doc_len.
    const auto s = stats_of({"a", "b"});
    EXPECT_NEAR(pqa::bm25_idf(s, "a"), std::log(2.0), 1e-12);
    EXPECT_NEAR(pqa::bm25(tokenize("a"), tokenize("a"), s), std::log(2.0), 1e-12);
}

TEST(Bm25, DuplicateQueryTermsCountPerOccurrence) {
    const auto s = stats_of({"a", "b"});
    EXPECT_NEAR(pqa::bm25(tokenize("a a"), tokenize("a"), s), 2.0 * std::log(2.0), 1e-12);
}

TEST(Metric, NamesRoundTrip) {
    for (auto m : {pqa::Metric::jaccard, pqa::Metric::tfidf, pqa::Metric::bm25}) {
        pqa::Metric parsed;
        ASSERT_TRUE(pqa::parse_metric(pqa::to_string(m), parsed));
        EXPECT_EQ(parsed, m);
    }
    pqa::Metric ignored;
    EXPECT_FALSE(pqa::parse_metric("cosine", ignored));
}

std::string random_doc(std::mt19937& rng, std::size_t max_len) {
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    std::uniform_int_distribution<int> word(0, 11);
    std::string s;
    for (std::size_t i = len(rng); i > 0; --i) s += "w" + std::to_string(word(rng)) + " ";
    return s;
}

TEST(LexProperties, JaccardSymmetricAndBounded) {
    std::mt19937 rng(21);
    for (int i = 0; i < 300; ++i) {
        const auto a = tokenize(random_doc(rng, 8));
        const auto b = tokenize(random_doc(rng, 8));
        const double ab = pqa::jaccard(a, b);
        EXPECT_EQ(ab, pqa::jaccard(b, a));
        EXPECT_GE(ab, 0.0);
        EXPECT_LE(ab, 1.0);
    }
}

TEST(LexProperties, CosineSymmetricAndScaleInvariant) {
    std::mt19937 rng(22);
    std::uniform_real_distribution<double> w(0.0, 3.0);
    std::uniform_real_distribution<double> c(0.1, 50.0);
    for (int i = 0; i < 300; ++i) {
        pqa::SparseVector a;
        pqa::SparseVector b;
        for (int t = 0; t < 6; ++t) {
            if (w(rng) > 1.0) a["t" + std::to_string(t)] = w(rng);
            if (w(rng) > 1.0) b["t" + std::to_string(t)] = w(rng);
        }
        pqa::SparseVector scaled = a;
        const double k = c(rng);
        for (auto& [_, v] : scaled) v *= k;
        EXPECT_NEAR(pqa::cosine(a, b), pqa::cosine(b, a), 1e-12);
        EXPECT_NEAR(pqa::cosine(scaled, b), pqa::cosine(a, b), 1e-12);
        EXPECT_GE(pqa::cosine(a, b), 0.0);
        EXPECT_LE(pqa::cosine(a, b), 1.0);
    }
}

// Length held fixed: swapping a non-query token for a query term never lowers
// the score. (Appending a token is not monotone, since the document grows.)
TEST(LexProperties, Bm25MonotoneInTermFrequency) {
    std::mt19937 rng(23);
    for (int i = 0; i < 300; ++i) {
        const std::string base = random_doc(rng, 8);
        const auto query = tokenize("w1 w2 " + random_doc(rng, 3));
        const auto doc = tokenize(base + " zz");
        const auto more = tokenize(base + " w1");
        const auto stats = pqa::build_corpus_stats(std::vector<pqa::TokenizedText>{doc, tokenize(random_doc(rng, 8))});
        EXPECT_GE(pqa::bm25(query, more, stats) + 1e-12, pqa::bm25(query, doc, stats));
    }
}

TEST(LexProperties, BitReproducible) {
    std::mt19937 rng(24);
    for (int i = 0; i < 100; ++i) {
        const auto q = tokenize(random_doc(rng, 5));
        const auto d = tokenize(random_doc(rng, 10));
        const auto stats = pqa::build_corpus_stats(std::vector<pqa::TokenizedText>{d});
        for (auto m : {pqa::Metric::jaccard, pqa::Metric::tfidf, pqa::Metric::bm25}) {
            EXPECT_EQ(pqa::score(m, q, d, stats), pqa::score(m, q, d, stats));
        }
    }
}

}  // namespace
