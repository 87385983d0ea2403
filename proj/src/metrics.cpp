#include "rwr/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "rwr/error.hpp"
#include "rwr/prompts.hpp"

namespace rwr::metrics {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

std::vector<std::string> lowered_tokens(std::string_view s) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : s) {
        if (is_space(c)) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else if (!is_punct(c)) {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

bool is_article(const std::string& t) { return t == "a" || t == "an" || t == "the"; }

std::string join(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out.push_back(' ');
        out += t;
    }
    return out;
}

std::vector<std::string> normalized_tokens(std::string_view s) {
    auto tokens = lowered_tokens(s);
    std::erase_if(tokens, is_article);
    return tokens;
}

double f1(std::size_t overlap, std::size_t pred_total, std::size_t gold_total) {
    if (overlap == 0 || pred_total == 0 || gold_total == 0) return 0.0;
    const double p = static_cast<double>(overlap) / static_cast<double>(pred_total);
    const double r = static_cast<double>(overlap) / static_cast<double>(gold_total);
    return 2.0 * p * r / (p + r);
}

using NGram = std::vector<std::string_view>;

std::map<NGram, std::size_t> count_ngrams(const std::vector<std::string>& tokens, std::size_t n) {
    std::map<NGram, std::size_t> counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        NGram gram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
        ++counts[gram];
    }
    return counts;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::size_t> row(b.size() + 1, 0);
    for (const auto& x : a) {
        std::size_t diagonal = 0;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t above = row[j];
            row[j] = (x == b[j - 1]) ? diagonal + 1 : std::max(row[j], row[j - 1]);
            diagonal = above;
        }
    }
    return row[b.size()];
}

bool contains_tokens(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > hay.size()) return false;
    return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace

std::string_view to_string(MetricKind kind) {
    switch (kind) {
        case MetricKind::ExactMatch: return "exact_match";
        case MetricKind::SubEM: return "sub_em";
        case MetricKind::AccuracyTwoWay: return "accuracy";
        case MetricKind::RougeAvg: return "rouge_avg";
        case MetricKind::LlmJudge: return "llm_judge";
    }
    return "exact_match";
}

MetricKind parse_metric_kind(std::string_view name) {
    if (name == "exact_match" || name == "em") return MetricKind::ExactMatch;
    if (name == "sub_em" || name == "subem") return MetricKind::SubEM;
    if (name == "accuracy" || name == "accuracy_two_way") return MetricKind::AccuracyTwoWay;
    if (name == "rouge_avg" || name == "rouge") return MetricKind::RougeAvg;
    if (name == "llm_judge" || name == "judge") return MetricKind::LlmJudge;
    throw InvalidArgument("unknown metric '" + std::string(name) + "'");
}

std::string normalize_answer(std::string_view s) { return join(normalized_tokens(s)); }

int exact_match(std::string_view prediction, std::string_view gold) {
    return normalize_answer(prediction) == normalize_answer(gold) ? 1 : 0;
}

int sub_em(std::string_view prediction, std::string_view gold) {
    const auto g = normalize_answer(gold);
    if (g.empty()) return 1;
    return normalize_answer(prediction).find(g) != std::string::npos ? 1 : 0;
}

LabelSet LabelSet::two_way_nli() {
    return LabelSet{{{"entailment", {"entailment"}},
                     {"not_entailment", {"not_entailment", "not entailment", "no entailment"}}}};
}

std::optional<std::string> LabelSet::canonicalize(std::string_view text) const {
    struct Alias {
        std::vector<std::string> tokens;
        std::size_t chars;
        const std::string* label;
    };
    std::vector<Alias> aliases;
    for (const auto& [label, surface] : labels) {
        for (const auto& s : surface) {
            auto tokens = normalized_tokens(s);
            const std::size_t chars = join(tokens).size();
            aliases.push_back({std::move(tokens), chars, &label});
        }
    }
    std::stable_sort(aliases.begin(), aliases.end(),
                     [](const Alias& a, const Alias& b) { return a.chars > b.chars; });
    const auto hay = normalized_tokens(text);
    for (const auto& alias : aliases) {
        if (contains_tokens(hay, alias.tokens)) return *alias.label;
    }
    return std::nullopt;
}

LabelScore accuracy_two_way(std::string_view prediction, std::string_view gold, const LabelSet& labels) {
    const auto gold_label = labels.canonicalize(gold);
    if (!gold_label) throw InvalidArgument("gold label '" + std::string(gold) + "' is not in the label set");
    const auto predicted = labels.canonicalize(prediction);
    if (!predicted) return {0, false, {}};
    return {*predicted == *gold_label ? 1 : 0, true, *predicted};
}

std::vector<std::string> rouge_tokens(std::string_view s) { return lowered_tokens(s); }

double rouge_n(std::string_view prediction, std::string_view gold, int n) {
    if (n != 1 && n != 2) throw InvalidArgument("rouge_n supports n = 1 or 2");
    const auto p = rouge_tokens(prediction);
    const auto g = rouge_tokens(gold);
    if (p.empty() && g.empty()) return 1.0;
    if (p.empty() || g.empty()) return 0.0;
    const auto pc = count_ngrams(p, static_cast<std::size_t>(n));
    const auto gc = count_ngrams(g, static_cast<std::size_t>(n));
    std::size_t overlap = 0;
    std::size_t p_total = 0;
    std::size_t g_total = 0;
    for (const auto& [gram, c] : pc) {
        p_total += c;
        if (auto it = gc.find(gram); it != gc.end()) overlap += std::min(c, it->second);
    }
    for (const auto& [gram, c] : gc) g_total += c;
    return f1(overlap, p_total, g_total);
}

double rouge_l(std::string_view prediction, std::string_view gold) {
    const auto p = rouge_tokens(prediction);
    const auto g = rouge_tokens(gold);
    if (p.empty() && g.empty()) return 1.0;
    if (p.empty() || g.empty()) return 0.0;
    return f1(lcs_length(p, g), p.size(), g.size());
}

double rouge_avg(std::string_view prediction, std::string_view gold) {
    return (rouge_n(prediction, gold, 1) + rouge_n(prediction, gold, 2) + rouge_l(prediction, gold)) / 3.0;
}

JudgeScore judge_from_reply(const std::string& reply) {
    const auto verdict = prompts::parse_yes_no(reply);
    JudgeScore out;
    out.raw = reply;
    out.parsed = verdict.has_value();
    out.score = verdict.value_or(false) ? 1 : 0;
    return out;
}

JudgeScore llm_judge(std::string_view question, std::string_view gold, std::string_view prediction,
                     const ChatBackend& judge) {
    const auto completion = judge.complete(ChatExchange::user(prompts::judge(question, gold, prediction)));
    auto out = judge_from_reply(completion.text);
    out.latency_ms = completion.latency_ms;
    return out;
}

}  // namespace rwr::metrics
