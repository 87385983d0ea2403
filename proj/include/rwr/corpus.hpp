#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace rwr {

/// A (context, query, answer) triple, the unit of raw data.
struct Example {
    std::string id;
    std::string context;
    std::string query;
    std::string answer;
    std::map<std::string, std::string> meta;

    bool operator==(const Example&) const = default;
};

/// One blank-line separated unit of a context. `delimiter` is the exact
/// newline run that followed the paragraph in the source (empty for the last
/// one), so concatenating text+delimiter over all paragraphs restores the
/// input byte-for-byte.
struct Paragraph {
    std::size_t index = 0;
    std::string text;
    std::string delimiter;

    bool operator==(const Paragraph&) const = default;
};

inline constexpr std::string_view kParagraphDelimiter = "\n\n";

enum class SummaryKind { Valid, Empty };

struct SummaryLabel {
    SummaryKind kind = SummaryKind::Valid;
    std::string text;
    bool verified = false;

    static SummaryLabel valid(std::string summary) {
        return {SummaryKind::Valid, std::move(summary), true};
    }
    static SummaryLabel empty(std::string refusal) {
        return {SummaryKind::Empty, std::move(refusal), false};
    }

    bool operator==(const SummaryLabel&) const = default;
};

enum class RecordSource { Base, ValidCot, EmptyCot };

std::string_view to_string(RecordSource source);
RecordSource parse_record_source(std::string_view name);

/// A rendered SFT pair.
struct TrainingRecord {
    std::string id;
    RecordSource source = RecordSource::Base;
    std::string input_text;
    std::string target_text;

    bool operator==(const TrainingRecord&) const = default;
};

enum class LengthUnit { WhitespaceWords, CharsDiv4 };

std::string_view to_string(LengthUnit unit);
LengthUnit parse_length_unit(std::string_view name);

struct LengthPolicy {
    LengthUnit unit = LengthUnit::WhitespaceWords;
    std::size_t max_units = 6000;
};

/// Splits on runs of two or more '\n'. The empty string has no paragraphs.
std::vector<Paragraph> segment_paragraphs(std::string_view context);

/// Inverse of segment_paragraphs.
std::string join_paragraphs(const std::vector<Paragraph>& paragraphs);

std::size_t measure_length(std::string_view text, LengthUnit unit);
inline std::size_t measure_length(std::string_view text, const LengthPolicy& policy) {
    return measure_length(text, policy.unit);
}

/// Longest prefix of `text` measuring at most `units`. For WhitespaceWords the
/// prefix ends right after a word; for CharsDiv4 it ends on a UTF-8 boundary.
std::string_view prefix_within(std::string_view text, std::size_t units, LengthUnit unit);

/// Cuts the context tail so measure(context) + measure(query) <= max_units.
/// Whole trailing paragraphs are dropped first; if not even the first
/// paragraph fits, it is hard-cut. Throws QueryTooLong when the query alone
/// reaches the limit.
Example truncate_example(const Example& e, const LengthPolicy& policy);

/// Throws InvalidArgument when the example breaks its field invariants.
void validate_example(const Example& e, bool require_answer = false);

// JSONL persistence. Keys are written in a fixed order:
//   Example:        id, context, query, answer, meta
//   TrainingRecord: id, source, input_text, target_text
// Blank lines are ignored on read. Errors: ParseError (1-based line), IoError.

std::vector<Example> read_examples(const std::filesystem::path& path);
void write_examples(const std::vector<Example>& examples, const std::filesystem::path& path);

std::vector<TrainingRecord> read_records(const std::filesystem::path& path);
void write_records(const std::vector<TrainingRecord>& records, const std::filesystem::path& path);

std::string example_to_line(const Example& e);
std::string record_to_line(const TrainingRecord& r);

}  // namespace rwr
