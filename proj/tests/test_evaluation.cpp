#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "pqa/evaluation.hpp"

namespace {

using pqa::ErrorCategory;
using pqa::Metric;

const std::string kFixture = PQA_SOURCE_DIR "/fixtures/parallelqa_pilot.json";

pqa::QAExample example(std::string id, std::string question, std::string passage,
                       std::vector<pqa::GoldAnswer> answers) {
    return pqa::QAExample{std::move(id), "g", std::move(question), {std::move(passage)}, std::move(answers), true};
}

pqa::PredictionSet gold_predictions(const pqa::QASet& set) {
    pqa::PredictionSet p;
    for (const auto& ex : set.items) p[ex.id] = ex.answers.front().text;
    return p;
}

TEST(ExactMatch, Examples) {
    EXPECT_EQ(pqa::exact_match("UDF", {"UDF"}), 1);
    EXPECT_EQ(pqa::exact_match("the UDF", {"UDF"}), 1);
    EXPECT_EQ(pqa::exact_match("MCP", {"UDF"}), 0);
    EXPECT_EQ(pqa::exact_match("MCP", {"UDF", "mcp."}), 1);
    EXPECT_THROW(pqa::exact_match("x", {}), pqa::InputError);
}

TEST(F1, Examples) {
    EXPECT_DOUBLE_EQ(pqa::f1_score("Todd Martin", {"Todd Martin"}), 1.0);
    EXPECT_NEAR(pqa::f1_score("Bakili Muluzi of the United Democratic Front", {"United Democratic Front (UDF)"}),
                0.6, 1e-9);
    EXPECT_DOUBLE_EQ(pqa::f1_score("MCP", {"UDF"}), 0.0);
    EXPECT_DOUBLE_EQ(pqa::f1_score("", {"UDF"}), 0.0);
    EXPECT_DOUBLE_EQ(pqa::f1_score("the", {"a"}), 1.0);
}

TEST(Evaluate, GoldPredictionsScorePerfect) {
    const auto set = pqa::load_qaset(kFixture, pqa::DatasetFormat::pqa);
    const auto r = pqa::evaluate(set, gold_predictions(set));
    EXPECT_DOUBLE_EQ(r.em, 100.0);
    EXPECT_DOUBLE_EQ(r.f1, 100.0);
    EXPECT_TRUE(r.missing_ids.empty());
}

TEST(Evaluate, OneBoundaryErrorAmongNine) {
    const auto set = pqa::load_qaset(kFixture, pqa::DatasetFormat::pqa);
    auto preds = gold_predictions(set);
    preds["malawi-q1"] = "United Democratic Front";
    const auto r = pqa::evaluate_with_categories(set, preds);
    EXPECT_NEAR(r.em, 88.89, 0.005);
    for (const auto& it : r.per_item) {
        EXPECT_EQ(*it.category, it.qa_id == "malawi-q1" ? ErrorCategory::boundary_error : ErrorCategory::correct);
    }
    const auto j = pqa::to_json(r);
    EXPECT_EQ(j["category_counts"]["boundary_error"], 1);
    EXPECT_EQ(j["category_counts"]["correct"], 8);
    EXPECT_NE(j["category_note"].get<std::string>().find("other_wrong"), std::string::npos);
}

TEST(Evaluate, MissingPredictionScoresZero) {
    const auto set = pqa::load_qaset(kFixture, pqa::DatasetFormat::pqa);
    auto preds = gold_predictions(set);
    preds.erase("queens-club-q2");
    const auto r = pqa::evaluate(set, preds);
    EXPECT_EQ(r.missing_ids, std::vector<std::string>{"queens-club-q2"});
    EXPECT_NEAR(r.em, 800.0 / 9.0, 1e-9);
}

TEST(Evaluate, FiftyOneItemArithmetic) {
    pqa::QASet set;
    for (int i = 0; i < 51; ++i) set.items.push_back(example("q" + std::to_string(i), "Q?", "Answer " + std::to_string(i) + ".", {{"answer" + std::to_string(i), 0, std::nullopt}}));
    for (auto [hits, em] : {std::pair{18, 35.29}, std::pair{20, 39.22}, std::pair{21, 41.18}}) {
        pqa::PredictionSet preds;
        for (int i = 0; i < 51; ++i) preds["q" + std::to_string(i)] = i < hits ? "answer" + std::to_string(i) : "wrong";
        EXPECT_NEAR(pqa::evaluate(set, preds).em, em, 0.01);
    }
}

TEST(Categorize, Examples) {
    const auto bosnia = example("b", "Where?", "Troops entered the eastern Bosnian enclave of Gorazde.",
                                {{"eastern Bosnian enclave of Gorazde", 0, 19}});
    EXPECT_EQ(pqa::categorize(bosnia, "eastern Bosnian enclave", Metric::jaccard), ErrorCategory::boundary_error);
    EXPECT_EQ(pqa::categorize(bosnia, "the eastern Bosnian enclave of Gorazde", Metric::jaccard), ErrorCategory::correct);

    const auto overlap = example("o", "Who ran for president in 1994?",
                                 "Banda ran for president in 1994. Later Muluzi won the vote.",
                                 {{"Muluzi", 0, 39}});
    for (auto m : {Metric::jaccard, Metric::tfidf, Metric::bm25}) {
        EXPECT_EQ(pqa::categorize(overlap, "Banda", m), ErrorCategory::high_overlap_wrong_sentence);
    }
    EXPECT_EQ(pqa::categorize(overlap, "the vote", Metric::jaccard), ErrorCategory::other_wrong);
    EXPECT_EQ(pqa::categorize(overlap, "Gorazde", Metric::jaccard), ErrorCategory::other_wrong);
}

std::string random_answer(std::mt19937& rng) {
    static const std::vector<std::string> words{"the", "A", "an", "UDF", "udf", "Front", "front", "(UDF)", "1997", "Banda,", "x"};
    std::uniform_int_distribution<int> len(0, 5);
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    std::string s;
    for (int i = len(rng); i > 0; --i) s += words[pick(rng)] + " ";
    return s;
}

TEST(EvalProperties, ScoreBoundsAndConsistency) {
    std::mt19937 rng(81);
    for (int i = 0; i < 1000; ++i) {
        const std::string pred = random_answer(rng);
        const std::vector<std::string> golds{random_answer(rng) + "x", random_answer(rng) + "UDF"};
        const double f1 = pqa::f1_score(pred, golds);
        EXPECT_GE(f1, 0.0);
        EXPECT_LE(f1, 1.0);
        if (pqa::exact_match(pred, golds) == 1) {
            EXPECT_DOUBLE_EQ(f1, 1.0);
        }
    }
}

TEST(EvalProperties, InvariantToArticlesAndCase) {
    std::mt19937 rng(82);
    for (int i = 0; i < 500; ++i) {
        const std::string pred = random_answer(rng);
        const std::vector<std::string> golds{random_answer(rng) + "front"};
        std::string upper = pred;
        std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
        for (const auto& variant : {"The " + pred, pred + " an", upper}) {
            EXPECT_EQ(pqa::exact_match(variant, golds), pqa::exact_match(pred, golds));
            EXPECT_DOUBLE_EQ(pqa::f1_score(variant, golds), pqa::f1_score(pred, golds));
        }
    }
}

TEST(EvalProperties, PermutationInvariantAndCategoryConsistent) {
    auto set = pqa::load_qaset(kFixture, pqa::DatasetFormat::pqa);
    std::mt19937 rng(83);
    pqa::PredictionSet preds;
    for (const auto& ex : set.items) {
        const auto& a = ex.answers.front().text;
        preds[ex.id] = rng() % 2 ? a : a.substr(0, a.size() / 2) + " Banda";
    }
    const auto base = pqa::to_json(pqa::evaluate_with_categories(set, preds));
    for (int i = 0; i < 5; ++i) {
        std::shuffle(set.items.begin(), set.items.end(), rng);
        const auto r = pqa::evaluate_with_categories(set, preds);
        EXPECT_EQ(pqa::to_json(r), base);
        for (const auto& it : r.per_item) {
            ASSERT_TRUE(it.category.has_value());
            EXPECT_EQ(*it.category == ErrorCategory::correct, it.em == 1);
        }
    }
}

TEST(Predictions, JsonShape) {
    EXPECT_EQ(pqa::predictions_from_json(nlohmann::json{{"a", "x"}}).at("a"), "x");
    EXPECT_THROW(pqa::predictions_from_json(nlohmann::json::array()), pqa::ParseError);
    EXPECT_THROW(pqa::predictions_from_json(nlohmann::json{{"a", 1}}), pqa::ParseError);
}

TEST(Report, Table) {
    const auto set = pqa::load_qaset(kFixture, pqa::DatasetFormat::pqa);
    const auto table = pqa::format_eval_table(pqa::evaluate(set, gold_predictions(set)), "ParallelQA");
    EXPECT_EQ(table, "Dataset      |     EM |     F1 | N\nParallelQA   | 100.00 | 100.00 | 9\n");
}

}  // namespace
