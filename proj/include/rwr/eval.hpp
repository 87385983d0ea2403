#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwr/backend.hpp"
#include "rwr/corpus.hpp"
#include "rwr/metrics.hpp"
#include "rwr/ssa.hpp"

namespace rwr::eval {

struct MetricBinding {
    metrics::MetricKind kind = metrics::MetricKind::ExactMatch;
    metrics::LabelSet labels = metrics::LabelSet::two_way_nli();
};

/// task tag -> metric. The task tag of an example is meta["task"].
using Bindings = std::map<std::string, MetricBinding>;

/// Accepts {"task": "sub_em", "nli": {"metric": "accuracy", "labels":
/// {"entailment": ["entailment"], ...}}}. Throws InvalidArgument.
Bindings parse_bindings(const nlohmann::json& j);
Bindings load_bindings(const std::filesystem::path& path);

struct Prediction {
    std::string text;
    double latency_ms = 0.0;
    bool timed = false;
};

using Predictions = std::map<std::string, Prediction>;

/// JSONL of {"id", "prediction"} or trace lines ({"id", "answer",
/// "latency_ms": {...}}). A numeric or object latency marks the entry timed.
Predictions load_predictions(const std::filesystem::path& path);

/// Traces from live inference; latency is the sum of backend-reported stage
/// latencies.
Predictions predictions_from_traces(const std::vector<ssa::SsaTrace>& traces);

struct TaskResult {
    std::string task;
    std::string metric;
    std::size_t n = 0;
    double score = 0.0;
    double mean_latency_ms = 0.0;
};

struct EvalReport {
    std::string label = "model";
    std::vector<TaskResult> results;
    double weighted_avg = 0.0;
    bool timed = false;
    std::vector<std::string> notes;

    nlohmann::ordered_json to_json() const;
    static EvalReport from_json(const nlohmann::json& j);

    /// Aligned text table: one row for this report, one column per task,
    /// then Avg (and Time when timed). Scores in percent.
    std::string to_table() const;
};

/// sum(n_i * score_i) / sum(n_i).
double weighted_average(const std::vector<TaskResult>& results);

struct EvalOptions {
    std::string label = "model";
    /// Required only when a binding uses llm_judge.
    const ChatBackend* judge = nullptr;
    std::size_t parallelism = 1;
};

/// Scores every example against its prediction and aggregates per task in
/// order of first appearance. Throws EmptyInput for no examples,
/// MissingBinding for an untagged or unbound task (or a judge task without a
/// judge), InvalidArgument for a missing prediction.
EvalReport run_eval(const std::vector<Example>& examples, const Predictions& predictions,
                    const Bindings& bindings, const EvalOptions& options);

}  // namespace rwr::eval
