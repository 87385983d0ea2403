#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rwr/backend.hpp"
#include "rwr/corpus.hpp"
#include "rwr/prompts.hpp"

// Segmented summarization for answering: chunk the context, summarize every
// chunk against the query, answer from the joined summaries.
namespace rwr::ssa {

struct SsaConfig {
    std::size_t chunk_units = 2000;
    LengthUnit unit = LengthUnit::WhitespaceWords;
    bool drop_refusals = true;
    std::string refusal{prompts::kDefaultRefusal};
    std::size_t parallelism = 1;

    void validate() const;
};

/// A chunk of context; `separator` is the exact text that sat between this
/// chunk and the next one (empty for the last).
struct Chunk {
    std::string text;
    std::string separator;

    bool operator==(const Chunk&) const = default;
};

/// Greedy packing of whole paragraphs into chunks measuring at most
/// chunk_units; a paragraph larger than the limit is hard-split at word (or
/// UTF-8) boundaries. Concatenating text+separator restores the context.
std::vector<Chunk> chunk_context(std::string_view context, const SsaConfig& cfg);

/// Extraction prompt over one chunk; returns the trimmed reply.
std::string summarize_chunk(std::string_view chunk, std::string_view query, const ChatBackend& student);

/// Drops refusals (keeping one if nothing else remains) and joins the rest
/// with blank lines in order. Throws InvalidArgument on an empty list.
std::string aggregate_summaries(const std::vector<std::string>& summaries, const SsaConfig& cfg);

struct ChunkSummary {
    std::string chunk_text;
    std::string summary_text;
};

struct StageLatency {
    double summarize_ms = 0.0;
    double answer_ms = 0.0;

    double total_ms() const { return summarize_ms + answer_ms; }
};

struct SsaTrace {
    std::string id;
    std::string mode;
    std::vector<ChunkSummary> chunks;
    std::string aggregate;
    std::string answer;
    StageLatency latency_ms;
    std::size_t student_calls = 0;
};

/// Chunk, summarize (batched), aggregate, answer. An empty context skips the
/// summarize stage and answers from the refusal string.
SsaTrace ssa_answer(const Example& e, const SsaConfig& cfg, const ChatBackend& student);

struct DirectAnswer {
    std::string prompt;
    std::string answer;
    double latency_ms = 0.0;
};

/// Single pass over the context truncated (tail-drop) to window_units.
DirectAnswer direct_answer(const Example& e, std::size_t window_units, const ChatBackend& student,
                           LengthUnit unit = LengthUnit::WhitespaceWords);

SsaTrace direct_trace(const Example& e, std::size_t window_units, const ChatBackend& student,
                      LengthUnit unit = LengthUnit::WhitespaceWords);

/// Trace JSON: {id, mode, chunks: [{chunk_text, summary_text}], aggregate,
/// answer, latency_ms: {summarize, answer}, student_calls}.
nlohmann::ordered_json trace_to_json(const SsaTrace& trace);
SsaTrace trace_from_json(const nlohmann::json& j);

}  // namespace rwr::ssa

namespace rwr::ssa {

enum class Mode { Ssa, Direct };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view name);

struct InferenceOptions {
    Mode mode = Mode::Ssa;
    SsaConfig ssa;
    std::size_t window_units = 6000;
    /// Examples answered concurrently; per-chunk fan-out uses ssa.parallelism.
    std::size_t parallelism = 1;
};

/// One trace per example, in input order. The first failure is rethrown.
std::vector<SsaTrace> run_inference(const std::vector<Example>& examples, const InferenceOptions& options,
                                    const ChatBackend& student);

}  // namespace rwr::ssa
