#include "rwr/eval.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "rwr/error.hpp"
#include "rwr/log.hpp"
#include "rwr/prompts.hpp"

namespace rwr::eval {

namespace {

std::string percent(double score) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << score * 100.0;
    return out.str();
}

std::string milliseconds(double ms) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << ms;
    return out.str();
}

}  // namespace

Bindings parse_bindings(const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidArgument("bindings must be a JSON object of task -> metric");
    Bindings out;
    for (const auto& [task, spec] : j.items()) {
        MetricBinding b;
        if (spec.is_string()) {
            b.kind = metrics::parse_metric_kind(spec.get<std::string>());
        } else if (spec.is_object() && spec.contains("metric") && spec["metric"].is_string()) {
            b.kind = metrics::parse_metric_kind(spec["metric"].get<std::string>());
            if (spec.contains("labels")) {
                if (!spec["labels"].is_object()) throw InvalidArgument("labels of task '" + task + "' must be an object");
                b.labels.labels.clear();
                for (const auto& [label, aliases] : spec["labels"].items()) {
                    std::vector<std::string> surface;
                    if (aliases.is_string()) {
                        surface.push_back(aliases.get<std::string>());
                    } else if (aliases.is_array()) {
                        for (const auto& a : aliases) surface.push_back(a.get<std::string>());
                    } else {
                        throw InvalidArgument("aliases of label '" + label + "' must be strings");
                    }
                    surface.push_back(label);
                    b.labels.labels.emplace_back(label, std::move(surface));
                }
            }
        } else {
            throw InvalidArgument("binding for task '" + task + "' must be a metric name or {\"metric\": ...}");
        }
        out.emplace(task, std::move(b));
    }
    return out;
}

Bindings load_bindings(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open bindings " + path.string());
    try {
        return parse_bindings(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& err) {
        throw ParseError(1, std::string("bindings: ") + err.what());
    }
}

Predictions load_predictions(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open predictions " + path.string());
    Predictions out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& err) {
            throw ParseError(number, err.what());
        }
        if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) throw ParseError(number, "missing string id");
        Prediction p;
        if (j.contains("prediction") && j["prediction"].is_string()) {
            p.text = j["prediction"].get<std::string>();
        } else if (j.contains("answer") && j["answer"].is_string()) {
            p.text = j["answer"].get<std::string>();
        } else {
            throw ParseError(number, "missing string \"prediction\" or \"answer\"");
        }
        if (auto it = j.find("latency_ms"); it != j.end()) {
            if (it->is_number()) {
                p.latency_ms = it->get<double>();
                p.timed = true;
            } else if (it->is_object()) {
                for (const auto& [_, v] : it->items()) {
                    if (v.is_number()) p.latency_ms += v.get<double>();
                }
                p.timed = true;
            }
        }
        if (!out.emplace(j["id"].get<std::string>(), std::move(p)).second) {
            throw ParseError(number, "duplicate prediction id");
        }
    }
    return out;
}

Predictions predictions_from_traces(const std::vector<ssa::SsaTrace>& traces) {
    Predictions out;
    for (const auto& t : traces) out[t.id] = {t.answer, t.latency_ms.total_ms(), true};
    return out;
}

double weighted_average(const std::vector<TaskResult>& results) {
    double num = 0.0;
    double den = 0.0;
    for (const auto& r : results) {
        num += static_cast<double>(r.n) * r.score;
        den += static_cast<double>(r.n);
    }
    return den > 0.0 ? num / den : 0.0;
}

nlohmann::ordered_json EvalReport::to_json() const {
    nlohmann::ordered_json j;
    j["label"] = label;
    j["results"] = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        j["results"].push_back({{"task", r.task},
                                {"metric", r.metric},
                                {"n", r.n},
                                {"score", r.score},
                                {"mean_latency_ms", r.mean_latency_ms}});
    }
    j["weighted_avg"] = weighted_avg;
    j["timed"] = timed;
    j["notes"] = notes;
    return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
    EvalReport report;
    try {
        report.label = j.value("label", std::string("model"));
        for (const auto& r : j.at("results")) {
            report.results.push_back({r.at("task").get<std::string>(), r.value("metric", std::string()),
                                      r.at("n").get<std::size_t>(), r.at("score").get<double>(),
                                      r.value("mean_latency_ms", 0.0)});
        }
        report.weighted_avg = j.at("weighted_avg").get<double>();
        report.timed = j.value("timed", false);
        report.notes = j.value("notes", std::vector<std::string>{});
    } catch (const nlohmann::json::exception& err) {
        throw ParseError(0, std::string("malformed report: ") + err.what());
    }
    return report;
}

std::string EvalReport::to_table() const {
    std::vector<std::string> header{"Method"};
    std::vector<std::string> row{label};
    double latency_sum = 0.0;
    std::size_t n_total = 0;
    for (const auto& r : results) {
        header.push_back(r.task);
        row.push_back(percent(r.score));
        latency_sum += r.mean_latency_ms * static_cast<double>(r.n);
        n_total += r.n;
    }
    header.push_back("Avg");
    row.push_back(percent(weighted_avg));
    if (timed) {
        header.push_back("Time(ms)");
        row.push_back(milliseconds(n_total ? latency_sum / static_cast<double>(n_total) : 0.0));
    }
    std::ostringstream out;
    std::string rule;
    for (std::size_t c = 0; c < header.size(); ++c) {
        rule += std::string(std::max(header[c].size(), row[c].size()) + (c ? 2 : 0), '-');
    }
    for (const auto* line : {&header, &row}) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            const auto width = std::max(header[c].size(), row[c].size());
            out << (c ? "  " : "") << (c == 0 ? std::left : std::right) << std::setw(static_cast<int>(width))
                << (*line)[c];
        }
        out << '\n';
        if (line == &header) out << rule << '\n';
    }
    return out.str();
}

EvalReport run_eval(const std::vector<Example>& examples, const Predictions& predictions,
                    const Bindings& bindings, const EvalOptions& options) {
    if (examples.empty()) throw EmptyInput("no examples to evaluate");

    struct Sample {
        const Example* example;
        const MetricBinding* binding;
        const Prediction* prediction;
        double score = 0.0;
    };
    std::vector<Sample> samples;
    samples.reserve(examples.size());
    for (const auto& e : examples) {
        const auto tag = e.meta.find("task");
        if (tag == e.meta.end()) throw MissingBinding("example '" + e.id + "' has no task tag");
        const auto binding = bindings.find(tag->second);
        if (binding == bindings.end()) throw MissingBinding("task '" + tag->second + "' has no metric binding");
        if (binding->second.kind == metrics::MetricKind::LlmJudge && !options.judge) {
            throw MissingBinding("task '" + tag->second + "' is judged but no judge backend is configured");
        }
        const auto pred = predictions.find(e.id);
        if (pred == predictions.end()) throw InvalidArgument("no prediction for example '" + e.id + "'");
        samples.push_back({&e, &binding->second, &pred->second});
    }

    EvalReport report;
    report.label = options.label;

    std::vector<ChatExchange> judge_requests;
    std::vector<std::size_t> judged;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        auto& s = samples[i];
        const auto& pred = s.prediction->text;
        const auto& gold = s.example->answer;
        switch (s.binding->kind) {
            case metrics::MetricKind::ExactMatch: s.score = metrics::exact_match(pred, gold); break;
            case metrics::MetricKind::SubEM: s.score = metrics::sub_em(pred, gold); break;
            case metrics::MetricKind::RougeAvg: s.score = metrics::rouge_avg(pred, gold); break;
            case metrics::MetricKind::AccuracyTwoWay: {
                const auto r = metrics::accuracy_two_way(pred, gold, s.binding->labels);
                s.score = r.score;
                if (!r.parsed) {
                    report.notes.push_back("UnparseablePrediction: " + s.example->id);
                    log::warn("unparseable_prediction", {{"id", s.example->id}});
                }
                break;
            }
            case metrics::MetricKind::LlmJudge:
                judge_requests.push_back(ChatExchange::user(prompts::judge(s.example->query, gold, pred)));
                judged.push_back(i);
                break;
        }
    }
    if (!judged.empty()) {
        const auto replies = complete_batch(*options.judge, judge_requests, options.parallelism);
        for (std::size_t k = 0; k < judged.size(); ++k) {
            const auto verdict = metrics::judge_from_reply(replies[k].value().text);
            auto& s = samples[judged[k]];
            s.score = verdict.score;
            if (!verdict.parsed) {
                report.notes.push_back("UnparseableJudgment: " + s.example->id);
                log::warn("unparseable_judgment", {{"id", s.example->id}});
            }
        }
    }

    std::map<std::string, std::size_t> slot;
    std::vector<double> latency_sums;
    for (const auto& s : samples) {
        const auto& task = s.example->meta.at("task");
        auto [it, inserted] = slot.emplace(task, report.results.size());
        if (inserted) {
            report.results.push_back({task, std::string(metrics::to_string(s.binding->kind)), 0, 0.0, 0.0});
            latency_sums.push_back(0.0);
        }
        auto& r = report.results[it->second];
        ++r.n;
        r.score += s.score;
        latency_sums[it->second] += s.prediction->latency_ms;
        report.timed = report.timed || s.prediction->timed;
    }
    for (std::size_t i = 0; i < report.results.size(); ++i) {
        auto& r = report.results[i];
        r.score /= static_cast<double>(r.n);
        r.mean_latency_ms = latency_sums[i] / static_cast<double>(r.n);
    }
    report.weighted_avg = weighted_average(report.results);
    return report;
}

}  // namespace rwr::eval
