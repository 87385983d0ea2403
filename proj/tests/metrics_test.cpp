#include "rwr/metrics.hpp"

#include <gtest/gtest.h>

#include "generators.hpp"
#include "oracles.hpp"
#include "rwr/error.hpp"

namespace rwr::metrics {
namespace {

TEST(NormalizeAnswer, Examples) {
    EXPECT_EQ(normalize_answer("The Answer!"), "answer");
    EXPECT_EQ(normalize_answer(""), "");
    EXPECT_EQ(normalize_answer("a  an the"), "");
    EXPECT_EQ(normalize_answer("  Paris,\tFrance. "), "paris france");
    EXPECT_EQ(normalize_answer("theatre"), "theatre");
}

TEST(NormalizeAnswer, Idempotent) {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const auto s = testing::random_answer_string(rng);
        const auto once = normalize_answer(s);
        ASSERT_EQ(normalize_answer(once), once) << s;
    }
}

TEST(ExactMatch, Examples) {
    EXPECT_EQ(exact_match("Paris.", "paris"), 1);
    EXPECT_EQ(exact_match("Paris, France", "Paris"), 0);
    EXPECT_EQ(exact_match("", ""), 1);
}

TEST(SubEm, Examples) {
    EXPECT_EQ(sub_em("The answer is Paris, clearly.", "Paris"), 1);
    EXPECT_EQ(sub_em("Parisian", "Paris"), 1);
    EXPECT_EQ(sub_em("London", "Paris"), 0);
    EXPECT_EQ(sub_em("anything", ""), 1);
    EXPECT_EQ(sub_em("Paris", "The answer is Paris"), 0);
}

TEST(Metrics, EmImpliesSubEmAndSymmetry) {
    Rng rng(17);
    for (int i = 0; i < 1000; ++i) {
        const auto a = testing::random_answer_string(rng, 6);
        const auto b = testing::random_answer_string(rng, 6);
        if (exact_match(a, b)) ASSERT_EQ(sub_em(a, b), 1);
        ASSERT_EQ(exact_match(a, b), exact_match(b, a));
        ASSERT_DOUBLE_EQ(rouge_n(a, b, 1), rouge_n(b, a, 1));
        ASSERT_DOUBLE_EQ(rouge_l(a, b), rouge_l(b, a));
    }
}

TEST(AccuracyTwoWay, Examples) {
    EXPECT_EQ(accuracy_two_way("entailment", "entailment").score, 1);
    const auto neg = accuracy_two_way("I think this is not entailment", "not_entailment");
    EXPECT_EQ(neg.score, 1);
    EXPECT_EQ(neg.predicted, "not_entailment");
    const auto maybe = accuracy_two_way("maybe", "entailment");
    EXPECT_EQ(maybe.score, 0);
    EXPECT_FALSE(maybe.parsed);
    EXPECT_EQ(accuracy_two_way("entailment", "not_entailment").score, 0);
    EXPECT_THROW(accuracy_two_way("entailment", "contradiction"), InvalidArgument);
}

TEST(AccuracyTwoWay, AliasesMatchOnTokenBoundaries) {
    // "nonentailment" must not count as "entailment".
    EXPECT_FALSE(accuracy_two_way("nonentailment", "entailment").parsed);
    EXPECT_EQ(accuracy_two_way("Not_Entailment.", "not_entailment").score, 1);
}

TEST(Rouge, Examples) {
    EXPECT_DOUBLE_EQ(rouge_n("the cat sat", "the cat sat", 1), 1.0);
    EXPECT_DOUBLE_EQ(rouge_n("the cat sat", "the cat sat", 2), 1.0);
    EXPECT_DOUBLE_EQ(rouge_l("the cat sat", "the cat sat"), 1.0);
    // Brute force: one shared unigram out of two on each side.
    EXPECT_DOUBLE_EQ(rouge_n("the cat", "the dog", 1), 0.5);
    // LCS of "a b c d" / "a c b d" is 3 (a b d or a c d): P = R = 3/4.
    EXPECT_DOUBLE_EQ(rouge_l("a b c d", "a c b d"), 0.75);
    EXPECT_DOUBLE_EQ(rouge_avg("the cat sat", "the cat sat"), 1.0);
}

TEST(Rouge, EmptyConventions) {
    EXPECT_DOUBLE_EQ(rouge_n("", "", 1), 1.0);
    EXPECT_DOUBLE_EQ(rouge_l("", ""), 1.0);
    EXPECT_DOUBLE_EQ(rouge_n("", "x", 2), 0.0);
    EXPECT_DOUBLE_EQ(rouge_l("x", "!!"), 0.0);
    EXPECT_DOUBLE_EQ(rouge_n("cat", "cat", 2), 0.0);
    EXPECT_THROW(rouge_n("a", "a", 3), InvalidArgument);
}

TEST(Rouge, ClippedCounts) {
    // pred has "the" x3, gold x1: clipped overlap 1 of 3 / 1 of 1.
    EXPECT_DOUBLE_EQ(rouge_n("the the the", "the", 1), 2.0 * (1.0 / 3.0) * 1.0 / (1.0 / 3.0 + 1.0));
}

TEST(Rouge, MatchesBruteForceOracle) {
    Rng rng(1234);
    for (int i = 0; i < 600; ++i) {
        const auto p = testing::random_tokens(rng, 20, 6);
        const auto g = testing::random_tokens(rng, 20, 6);
        const auto ps = oracle::join(p);
        const auto gs = oracle::join(g);
        ASSERT_NEAR(rouge_n(ps, gs, 1), oracle::ngram_f1(p, g, 1), 1e-9);
        ASSERT_NEAR(rouge_n(ps, gs, 2), oracle::ngram_f1(p, g, 2), 1e-9);
        ASSERT_NEAR(rouge_l(ps, gs), oracle::lcs_f1(p, g), 1e-9);
    }
}

TEST(Rouge, Bounded) {
    Rng rng(8);
    for (int i = 0; i < 500; ++i) {
        const auto a = testing::random_answer_string(rng);
        const auto b = testing::random_answer_string(rng);
        for (double v : {rouge_n(a, b, 1), rouge_n(a, b, 2), rouge_l(a, b), rouge_avg(a, b)}) {
            ASSERT_GE(v, 0.0);
            ASSERT_LE(v, 1.0);
        }
    }
}

TEST(LlmJudge, ParsesFirstLine) {
    MockBackend yes(std::vector<MockRule>{{"", "Yes"}});
    MockBackend no(std::vector<MockRule>{{"", "No"}});
    MockBackend garbage(std::vector<MockRule>{{"", "The candidate seems fine"}});
    EXPECT_EQ(llm_judge("q", "gold", "pred", yes).score, 1);
    EXPECT_EQ(llm_judge("q", "gold", "pred", no).score, 0);
    EXPECT_TRUE(llm_judge("q", "gold", "pred", no).parsed);
    const auto g = llm_judge("q", "gold", "pred", garbage);
    EXPECT_EQ(g.score, 0);
    EXPECT_FALSE(g.parsed);
}

TEST(LlmJudge, SendsJudgePrompt) {
    std::string seen;
    ScriptedBackend judge([&](const ChatExchange& ex) {
        seen = ex.last_user_message();
        return "yes\nbecause";
    });
    EXPECT_EQ(llm_judge("Who?", "Ann", "ann", judge).score, 1);
    EXPECT_EQ(seen,
              "Question: Who?\nReference answer: Ann\nCandidate answer: ann\nIs the candidate answer correct with "
              "respect to the reference? Reply Yes or No on the first line.");
}

TEST(MetricKind, ParseRoundTrip) {
    for (auto k : {MetricKind::ExactMatch, MetricKind::SubEM, MetricKind::AccuracyTwoWay, MetricKind::RougeAvg,
                   MetricKind::LlmJudge}) {
        EXPECT_EQ(parse_metric_kind(to_string(k)), k);
    }
    EXPECT_THROW(parse_metric_kind("bleu"), InvalidArgument);
}

}  // namespace
}  // namespace rwr::metrics
