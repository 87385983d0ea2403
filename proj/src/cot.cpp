#include "rwr/cot.hpp"

#include <cmath>

#include "rwr/error.hpp"
#include "rwr/log.hpp"
#include "rwr/metrics.hpp"
#include "rwr/random.hpp"

namespace rwr::cot {

namespace {

std::string failure_reason(std::string_view stage, const BatchItem& item) {
    return std::string(stage) + ": " + item.error_kind() + ": " + item.error_message();
}

nlohmann::ordered_json rejections_json(const std::vector<Rejection>& items) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : items) arr.push_back({{"id", r.id}, {"reason", r.reason}});
    return arr;
}

bool has_content(std::string_view text) {
    return text.find_first_not_of(" \t\r\n\v\f") != std::string_view::npos;
}

}  // namespace

std::string_view to_string(TargetStyle style) {
    return style == TargetStyle::SummaryOnly ? "summary_only" : "summary_then_answer";
}

TargetStyle parse_target_style(std::string_view name) {
    if (name == "summary_only") return TargetStyle::SummaryOnly;
    if (name == "summary_then_answer") return TargetStyle::SummaryThenAnswer;
    throw InvalidArgument("unknown target style '" + std::string(name) + "'");
}

void PipelineConfig::validate() const {
    if (!extractor || !verifier) throw InvalidArgument("pipeline needs extractor and verifier backends");
    if (refusal.empty()) throw InvalidArgument("refusal string must be non-empty");
    if (cot_count == 0) throw InvalidArgument("cot_count must be positive");
    if (base_count == 0) throw InvalidArgument("base_count must be positive");
    if (!(empty_fraction >= 0.0 && empty_fraction <= 1.0)) {
        throw InvalidArgument("empty_fraction must lie in [0, 1]");
    }
    if (policy.max_units == 0) throw InvalidArgument("max_units must be positive");
    if (parallelism == 0) throw InvalidArgument("parallelism must be at least 1");
}

std::string extract_summary(const Example& e, const ChatBackend& extractor) {
    if (e.context.empty()) throw InvalidArgument("example '" + e.id + "' has an empty context");
    if (e.query.empty()) throw InvalidArgument("example '" + e.id + "' has an empty query");
    return prompts::trim(extractor.complete(ChatExchange::user(prompts::extraction(e.context, e.query))).text);
}

Verdict verify_summary(const Example& e, std::string_view summary, const ChatBackend& verifier,
                       std::string_view positive_token) {
    if (summary.empty()) throw InvalidArgument("summary for '" + e.id + "' is empty");
    auto reply = verifier.complete(ChatExchange::user(prompts::verifier(summary, e.answer))).text;
    const bool consistent = prompts::first_line(reply) == positive_token;
    return {consistent, std::move(reply)};
}

std::set<std::size_t> exact_match_paragraphs(const std::vector<Paragraph>& paragraphs,
                                             std::string_view answer) {
    std::set<std::size_t> out;
    const auto needle = metrics::normalize_answer(answer);
    if (needle.empty()) return out;
    for (const auto& p : paragraphs) {
        if (metrics::normalize_answer(p.text).find(needle) != std::string::npos) out.insert(p.index);
    }
    return out;
}

std::set<std::size_t> resolve_locator_reply(const std::vector<Paragraph>& paragraphs,
                                            std::string_view reply, std::string_view answer) {
    std::set<std::size_t> out = exact_match_paragraphs(paragraphs, answer);
    for (auto idx : prompts::parse_indices(reply)) {
        if (idx < paragraphs.size()) out.insert(idx);
    }
    if (out.empty()) throw EmptyLocatorReply("no paragraph located for the answer");
    return out;
}

std::set<std::size_t> locate_answer_paragraphs(const Example& e, const ChatBackend* locator) {
    if (e.answer.empty()) throw InvalidArgument("example '" + e.id + "' has an empty answer");
    const auto paragraphs = segment_paragraphs(e.context);
    std::string reply;
    if (locator) {
        reply = locator->complete(ChatExchange::user(prompts::locator(paragraphs, e.query, e.answer))).text;
    }
    return resolve_locator_reply(paragraphs, reply, e.answer);
}

std::string build_empty_context(const Example& e, const std::set<std::size_t>& removed) {
    const auto paragraphs = segment_paragraphs(e.context);
    for (auto idx : removed) {
        if (idx >= paragraphs.size()) {
            throw InvalidArgument("paragraph index " + std::to_string(idx) + " out of range for '" + e.id + "'");
        }
    }
    std::vector<const Paragraph*> survivors;
    for (const auto& p : paragraphs) {
        if (!removed.contains(p.index)) survivors.push_back(&p);
    }
    const bool any_content = std::any_of(survivors.begin(), survivors.end(),
                                         [](const Paragraph* p) { return has_content(p->text); });
    if (!any_content) {
        throw AllParagraphsRemoved("no paragraph of '" + e.id + "' survives answer excision");
    }
    std::string out;
    for (std::size_t i = 0; i < survivors.size(); ++i) {
        out += survivors[i]->text;
        if (i + 1 < survivors.size()) {
            out += survivors[i]->delimiter.empty() ? std::string(kParagraphDelimiter) : survivors[i]->delimiter;
        }
    }
    return out;
}

ValidSetResult build_valid_set(const std::vector<Example>& corpus, const PipelineConfig& cfg) {
    if (corpus.empty()) throw EmptyInput("corpus is empty");
    if (!cfg.extractor || !cfg.verifier) throw InvalidArgument("pipeline needs extractor and verifier backends");

    // Per-example outcome, filled stage by stage; a non-empty reason rejects.
    struct Slot {
        std::string summary;
        std::string reason;
    };
    std::vector<Slot> slots(corpus.size());

    std::vector<ChatExchange> requests;
    std::vector<std::size_t> owners;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& e = corpus[i];
        if (e.context.empty()) {
            slots[i].reason = "extract: empty context";
            continue;
        }
        requests.push_back(ChatExchange::user(prompts::extraction(e.context, e.query)));
        owners.push_back(i);
    }
    auto extracted = complete_batch(*cfg.extractor, requests, cfg.parallelism);
    for (std::size_t k = 0; k < owners.size(); ++k) {
        auto& slot = slots[owners[k]];
        if (!extracted[k].ok()) {
            slot.reason = failure_reason("extract", extracted[k]);
            continue;
        }
        slot.summary = prompts::trim(extracted[k].completion->text);
        if (slot.summary.empty()) slot.reason = "extract: empty summary";
    }

    requests.clear();
    owners.clear();
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (!slots[i].reason.empty()) continue;
        requests.push_back(ChatExchange::user(prompts::verifier(slots[i].summary, corpus[i].answer)));
        owners.push_back(i);
    }
    auto verdicts = complete_batch(*cfg.verifier, requests, cfg.parallelism);
    for (std::size_t k = 0; k < owners.size(); ++k) {
        auto& slot = slots[owners[k]];
        if (!verdicts[k].ok()) {
            slot.reason = failure_reason("verify", verdicts[k]);
            continue;
        }
        const auto line = prompts::first_line(verdicts[k].completion->text);
        if (line != cfg.positive_token) slot.reason = "verify: inconsistent (" + line + ")";
    }

    ValidSetResult out;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (slots[i].reason.empty()) {
            out.admitted.push_back({corpus[i], SummaryLabel::valid(std::move(slots[i].summary))});
        } else {
            out.rejected.push_back({corpus[i].id, std::move(slots[i].reason)});
        }
    }
    log::info("valid_set_built", {{"examples", corpus.size()},
                                  {"admitted", out.admitted.size()},
                                  {"rejected", out.rejected.size()}});
    return out;
}

EmptySetResult build_empty_set(const std::vector<Example>& corpus, const PipelineConfig& cfg) {
    if (corpus.empty()) throw EmptyInput("corpus is empty");

    std::vector<std::string> reasons(corpus.size());
    std::vector<std::vector<Paragraph>> paragraphs(corpus.size());
    std::vector<std::string> replies(corpus.size());

    std::vector<ChatExchange> requests;
    std::vector<std::size_t> owners;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& e = corpus[i];
        if (e.answer.empty()) {
            reasons[i] = "locate: empty answer";
            continue;
        }
        if (metrics::normalize_answer(e.answer).empty()) {
            reasons[i] = "locate: answer normalizes to empty";
            continue;
        }
        paragraphs[i] = segment_paragraphs(e.context);
        if (cfg.locator) {
            requests.push_back(ChatExchange::user(prompts::locator(paragraphs[i], e.query, e.answer)));
            owners.push_back(i);
        }
    }
    if (cfg.locator) {
        auto located = complete_batch(*cfg.locator, requests, cfg.parallelism);
        for (std::size_t k = 0; k < owners.size(); ++k) {
            if (located[k].ok()) {
                replies[owners[k]] = located[k].completion->text;
            } else {
                reasons[owners[k]] = failure_reason("locate", located[k]);
            }
        }
    }

    EmptySetResult out;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& e = corpus[i];
        if (reasons[i].empty()) {
            try {
                const auto removed = resolve_locator_reply(paragraphs[i], replies[i], e.answer);
                Example excised = e;
                excised.context = build_empty_context(e, removed);
                const auto rendered = metrics::normalize_answer(excised.context + "\n\n" + excised.query);
                if (rendered.find(metrics::normalize_answer(e.answer)) != std::string::npos) {
                    reasons[i] = "excise: answer survives excision";
                } else {
                    out.admitted.push_back({std::move(excised), SummaryLabel::empty(cfg.refusal)});
                    continue;
                }
            } catch (const Error& err) {
                reasons[i] = "excise: " + err.kind() + ": " + err.what();
            }
        }
        out.skipped.push_back({e.id, reasons[i]});
    }
    log::info("empty_set_built", {{"examples", corpus.size()},
                                  {"admitted", out.admitted.size()},
                                  {"skipped", out.skipped.size()}});
    return out;
}

TrainingRecord render_record(const LabeledExample& item, TargetStyle style) {
    const auto& e = item.example;
    TrainingRecord r;
    r.input_text = e.context + std::string(kParagraphDelimiter) + e.query;
    if (item.label.kind == SummaryKind::Empty) {
        r.id = e.id + "#empty";
        r.source = RecordSource::EmptyCot;
        r.target_text = item.label.text;
    } else {
        r.id = e.id + "#valid";
        r.source = RecordSource::ValidCot;
        r.target_text = item.label.text;
        if (style == TargetStyle::SummaryThenAnswer) r.target_text += "\n\nAnswer: " + e.answer;
    }
    return r;
}

std::vector<TrainingRecord> assemble_dataset(const std::vector<LabeledExample>& valid,
                                             const std::vector<LabeledExample>& empty,
                                             const PipelineConfig& cfg) {
    const auto empty_quota = static_cast<std::size_t>(
        std::llround(static_cast<double>(cfg.cot_count) * cfg.empty_fraction));
    const std::size_t valid_quota = cfg.cot_count - std::min(empty_quota, cfg.cot_count);
    const std::size_t n_valid = std::min(valid.size(), valid_quota);
    const std::size_t n_empty = std::min(empty.size(), empty_quota);

    std::vector<TrainingRecord> out;
    out.reserve(n_valid + n_empty);
    for (std::size_t i = 0; i < n_valid; ++i) out.push_back(render_record(valid[i], cfg.target_style));
    for (std::size_t i = 0; i < n_empty; ++i) out.push_back(render_record(empty[i], cfg.target_style));
    Rng rng(cfg.seed);
    shuffle(std::span<TrainingRecord>(out), rng);
    return out;
}

std::vector<TrainingRecord> mix_with_base(std::vector<TrainingRecord> base, std::vector<TrainingRecord> cot,
                                          std::uint64_t seed) {
    base.reserve(base.size() + cot.size());
    for (auto& r : cot) base.push_back(std::move(r));
    // Distinct stream from assemble_dataset's shuffle under the same seed.
    Rng rng(seed ^ 0x6d69785f62617365ULL);
    shuffle(std::span<TrainingRecord>(base), rng);
    return base;
}

nlohmann::ordered_json BuildResult::audit() const {
    nlohmann::ordered_json j;
    j["admitted"] = {{"valid_cot", valid_used},
                     {"empty_cot", empty_used},
                     {"base", base_used},
                     {"total", records.size()},
                     {"valid_candidates", valid.admitted.size()},
                     {"empty_candidates", empty.admitted.size()}};
    std::vector<Rejection> rejected = truncation_failures;
    rejected.insert(rejected.end(), valid.rejected.begin(), valid.rejected.end());
    j["rejected"] = rejections_json(rejected);
    j["skipped"] = rejections_json(empty.skipped);
    return j;
}

BuildResult build_dataset(const std::vector<Example>& corpus, const std::vector<TrainingRecord>& base,
                          const PipelineConfig& cfg) {
    cfg.validate();
    if (corpus.empty()) throw EmptyInput("corpus is empty");

    BuildResult result;
    std::vector<Example> prepared;
    prepared.reserve(corpus.size());
    for (const auto& e : corpus) {
        try {
            prepared.push_back(truncate_example(e, cfg.policy));
        } catch (const QueryTooLong& err) {
            result.truncation_failures.push_back({e.id, std::string("truncate: QueryTooLong: ") + err.what()});
        }
    }
    if (prepared.empty()) throw EmptyInput("no example survives truncation");

    result.valid = build_valid_set(prepared, cfg);
    result.empty = build_empty_set(prepared, cfg);
    auto cot = assemble_dataset(result.valid.admitted, result.empty.admitted, cfg);
    for (const auto& r : cot) {
        if (r.source == RecordSource::ValidCot) ++result.valid_used;
        if (r.source == RecordSource::EmptyCot) ++result.empty_used;
    }

    std::vector<TrainingRecord> base_part(base.begin(),
                                          base.begin() + static_cast<std::ptrdiff_t>(std::min(base.size(), cfg.base_count)));
    result.base_used = base_part.size();
    result.records = mix_with_base(std::move(base_part), std::move(cot), cfg.seed);
    log::info("dataset_assembled", {{"valid_cot", result.valid_used},
                                    {"empty_cot", result.empty_used},
                                    {"base", result.base_used}});
    return result;
}

}  // namespace rwr::cot
