#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rwr/backend.hpp"
#include "rwr/corpus.hpp"
#include "rwr/prompts.hpp"

// Summary-CoT dataset construction: verified valid summaries, empty-summary
// examples over answer-excised contexts, their assembly and base-data mixing.
namespace rwr::cot {

enum class TargetStyle { SummaryOnly, SummaryThenAnswer };

std::string_view to_string(TargetStyle style);
TargetStyle parse_target_style(std::string_view name);

struct Verdict {
    bool consistent = false;
    std::string raw_judgment;
};

struct PipelineConfig {
    const ChatBackend* extractor = nullptr;
    const ChatBackend* verifier = nullptr;
    /// nullptr selects the exact-match locator (substring scan only).
    const ChatBackend* locator = nullptr;

    std::string refusal{prompts::kDefaultRefusal};
    std::string positive_token = "yes";
    TargetStyle target_style = TargetStyle::SummaryThenAnswer;
    std::size_t cot_count = 10000;
    std::size_t base_count = 100000;
    double empty_fraction = 0.5;
    std::uint64_t seed = 0;
    LengthPolicy policy;
    std::size_t parallelism = 1;

    void validate() const;
};

struct LabeledExample {
    Example example;
    SummaryLabel label;
};

struct Rejection {
    std::string id;
    std::string reason;
};

struct ValidSetResult {
    std::vector<LabeledExample> admitted;
    std::vector<Rejection> rejected;
};

struct EmptySetResult {
    std::vector<LabeledExample> admitted;
    std::vector<Rejection> skipped;
};

/// Sends the extraction prompt and returns the trimmed reply. Throws
/// InvalidArgument on an empty context or query.
std::string extract_summary(const Example& e, const ChatBackend& extractor);

Verdict verify_summary(const Example& e, std::string_view summary, const ChatBackend& verifier,
                       std::string_view positive_token = "yes");

/// Indices of paragraphs whose normalized text contains the normalized answer.
std::set<std::size_t> exact_match_paragraphs(const std::vector<Paragraph>& paragraphs,
                                             std::string_view answer);

/// Parses a locator reply against `paragraphs`, drops out-of-range indices and
/// unions in exact_match_paragraphs. Throws EmptyLocatorReply if the union is
/// empty.
std::set<std::size_t> resolve_locator_reply(const std::vector<Paragraph>& paragraphs,
                                            std::string_view reply, std::string_view answer);

/// With `locator` null only the exact-match scan runs.
std::set<std::size_t> locate_answer_paragraphs(const Example& e, const ChatBackend* locator);

/// Surviving paragraphs in original order, each followed by its recorded
/// delimiter except the last. Throws AllParagraphsRemoved when nothing with
/// content survives and InvalidArgument on out-of-range indices.
std::string build_empty_context(const Example& e, const std::set<std::size_t>& removed);

ValidSetResult build_valid_set(const std::vector<Example>& corpus, const PipelineConfig& cfg);

EmptySetResult build_empty_set(const std::vector<Example>& corpus, const PipelineConfig& cfg);

TrainingRecord render_record(const LabeledExample& item, TargetStyle style);

/// Takes up to cot_count records split by empty_fraction (no backfill when a
/// side runs short) and interleaves them deterministically under cfg.seed.
std::vector<TrainingRecord> assemble_dataset(const std::vector<LabeledExample>& valid,
                                             const std::vector<LabeledExample>& empty,
                                             const PipelineConfig& cfg);

std::vector<TrainingRecord> mix_with_base(std::vector<TrainingRecord> base,
                                          std::vector<TrainingRecord> cot, std::uint64_t seed);

struct BuildResult {
    std::vector<TrainingRecord> records;
    ValidSetResult valid;
    EmptySetResult empty;
    std::vector<Rejection> truncation_failures;
    std::size_t base_used = 0;
    std::size_t valid_used = 0;
    std::size_t empty_used = 0;

    /// {"admitted": {...counts}, "rejected": [{id, reason}], "skipped": [{id, reason}]}
    nlohmann::ordered_json audit() const;
};

/// Full build: truncate, build both sets, assemble, mix with the first
/// base_count base records.
BuildResult build_dataset(const std::vector<Example>& corpus, const std::vector<TrainingRecord>& base,
                          const PipelineConfig& cfg);

}  // namespace rwr::cot
