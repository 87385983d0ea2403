#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rwr/backend.hpp"

namespace rwr::metrics {

enum class MetricKind { ExactMatch, SubEM, AccuracyTwoWay, RougeAvg, LlmJudge };

std::string_view to_string(MetricKind kind);
MetricKind parse_metric_kind(std::string_view name);

/// Lowercase, drop ASCII punctuation, drop the standalone articles a/an/the,
/// collapse whitespace and trim.
std::string normalize_answer(std::string_view s);

int exact_match(std::string_view prediction, std::string_view gold);

/// 1 iff normalize(gold) is a character substring of normalize(prediction),
/// so "Parisian" matches "Paris".
int sub_em(std::string_view prediction, std::string_view gold);

/// Canonical labels with their surface aliases.
struct LabelSet {
    std::vector<std::pair<std::string, std::vector<std::string>>> labels;

    /// entailment / not_entailment.
    static LabelSet two_way_nli();

    /// Label whose alias occurs (on token boundaries) in normalize(text),
    /// trying longer aliases first.
    std::optional<std::string> canonicalize(std::string_view text) const;
};

struct LabelScore {
    int score = 0;
    bool parsed = false;
    std::string predicted;
};

/// Throws InvalidArgument if `gold` is not in the label set. An unparseable
/// prediction scores 0 with parsed = false.
LabelScore accuracy_two_way(std::string_view prediction, std::string_view gold,
                            const LabelSet& labels = LabelSet::two_way_nli());

/// Tokens for ROUGE: lowercased, ASCII punctuation removed, split on
/// whitespace. Articles are kept.
std::vector<std::string> rouge_tokens(std::string_view s);

/// Clipped n-gram overlap F1. Both token lists empty -> 1; exactly one
/// empty -> 0. n must be 1 or 2.
double rouge_n(std::string_view prediction, std::string_view gold, int n);

/// LCS-based F1 with the same empty-input conventions.
double rouge_l(std::string_view prediction, std::string_view gold);

/// Mean of ROUGE-1, ROUGE-2 and ROUGE-L.
double rouge_avg(std::string_view prediction, std::string_view gold);

struct JudgeScore {
    int score = 0;
    bool parsed = false;
    std::string raw;
    double latency_ms = 0.0;
};

JudgeScore llm_judge(std::string_view question, std::string_view gold, std::string_view prediction,
                     const ChatBackend& judge);

/// Scores a judge reply already obtained from a backend.
JudgeScore judge_from_reply(const std::string& reply);

}  // namespace rwr::metrics
