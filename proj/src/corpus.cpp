#include "rwr/corpus.hpp"

#include <algorithm>

#include "rwr/error.hpp"

namespace rwr {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_utf8_continuation(char c) { return (static_cast<unsigned char>(c) & 0xC0) == 0x80; }

}  // namespace

std::string_view to_string(RecordSource source) {
    switch (source) {
        case RecordSource::Base: return "base";
        case RecordSource::ValidCot: return "valid_cot";
        case RecordSource::EmptyCot: return "empty_cot";
    }
    return "base";
}

RecordSource parse_record_source(std::string_view name) {
    if (name == "base") return RecordSource::Base;
    if (name == "valid_cot") return RecordSource::ValidCot;
    if (name == "empty_cot") return RecordSource::EmptyCot;
    throw InvalidArgument("unknown record source '" + std::string(name) + "'");
}

std::string_view to_string(LengthUnit unit) {
    return unit == LengthUnit::WhitespaceWords ? "words" : "chars_div4";
}

LengthUnit parse_length_unit(std::string_view name) {
    if (name == "words" || name == "whitespace_words") return LengthUnit::WhitespaceWords;
    if (name == "chars_div4" || name == "chars") return LengthUnit::CharsDiv4;
    throw InvalidArgument("unknown length unit '" + std::string(name) + "'");
}

std::vector<Paragraph> segment_paragraphs(std::string_view context) {
    std::vector<Paragraph> out;
    if (context.empty()) return out;
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < context.size()) {
        if (context[i] != '\n') {
            ++i;
            continue;
        }
        std::size_t run_end = i;
        while (run_end < context.size() && context[run_end] == '\n') ++run_end;
        if (run_end - i >= 2) {
            out.push_back({out.size(), std::string(context.substr(start, i - start)),
                           std::string(context.substr(i, run_end - i))});
            start = run_end;
        }
        i = run_end;
    }
    out.push_back({out.size(), std::string(context.substr(start)), ""});
    return out;
}

std::string join_paragraphs(const std::vector<Paragraph>& paragraphs) {
    std::string out;
    for (const auto& p : paragraphs) {
        out += p.text;
        out += p.delimiter;
    }
    return out;
}

std::size_t measure_length(std::string_view text, LengthUnit unit) {
    if (unit == LengthUnit::CharsDiv4) return (text.size() + 3) / 4;
    std::size_t words = 0;
    bool in_word = false;
    for (char c : text) {
        const bool space = is_space(c);
        if (!space && !in_word) ++words;
        in_word = !space;
    }
    return words;
}

std::string_view prefix_within(std::string_view text, std::size_t units, LengthUnit unit) {
    if (unit == LengthUnit::CharsDiv4) {
        std::size_t cut = std::min(text.size(), units * 4);
        while (cut > 0 && cut < text.size() && is_utf8_continuation(text[cut])) --cut;
        return text.substr(0, cut);
    }
    std::size_t words = 0;
    std::size_t end = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        if (i == text.size()) break;
        if (words == units) break;
        while (i < text.size() && !is_space(text[i])) ++i;
        ++words;
        end = i;
    }
    // Leading whitespace before the first word is kept only if a word follows.
    return text.substr(0, end);
}

Example truncate_example(const Example& e, const LengthPolicy& policy) {
    const std::size_t query_units = measure_length(e.query, policy);
    if (query_units >= policy.max_units) {
        throw QueryTooLong("query of example '" + e.id + "' measures " +
                           std::to_string(query_units) + " units, limit " +
                           std::to_string(policy.max_units));
    }
    const std::size_t budget = policy.max_units - query_units;
    if (measure_length(e.context, policy) <= budget) return e;

    const auto paragraphs = segment_paragraphs(e.context);
    std::string kept;
    std::size_t kept_count = 0;
    for (const auto& p : paragraphs) {
        std::string candidate = kept;
        if (kept_count > 0) candidate += paragraphs[kept_count - 1].delimiter;
        candidate += p.text;
        if (measure_length(candidate, policy) > budget) break;
        kept = std::move(candidate);
        ++kept_count;
    }

    Example out = e;
    if (kept_count == 0) {
        out.context = std::string(prefix_within(paragraphs.front().text, budget, policy.unit));
    } else {
        out.context = std::move(kept);
    }
    return out;
}

void validate_example(const Example& e, bool require_answer) {
    if (e.id.empty()) throw InvalidArgument("example id must be non-empty");
    if (e.query.empty()) throw InvalidArgument("example '" + e.id + "' has an empty query");
    if (require_answer && e.answer.empty()) {
        throw InvalidArgument("example '" + e.id + "' has an empty answer");
    }
}

}  // namespace rwr
