#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rwr/corpus.hpp"

namespace rwr::prompts {

inline constexpr std::string_view kDefaultRefusal = "There is no enough information here.";
inline constexpr std::string_view kExtractionSuffix = "Please extract a note relevant to the query:";

/// "<context> <query> Please extract a note relevant to the query:"
std::string extraction(std::string_view context, std::string_view query);

std::string verifier(std::string_view summary, std::string_view answer);

/// Paragraphs listed as "[i] text", followed by the query, the answer and the
/// instruction to reply with comma-separated indices.
std::string locator(const std::vector<Paragraph>& paragraphs, std::string_view query,
                    std::string_view answer);

/// "Context:\n<context>\n\nQuestion: <query>\nAnswer:"; the context block is
/// omitted when the context is empty.
std::string answering(std::string_view context, std::string_view query);

std::string judge(std::string_view question, std::string_view gold, std::string_view prediction);

/// First line of the reply, trimmed and ASCII-lowercased.
std::string first_line(std::string_view reply);

/// true iff the first line equals `positive`; false iff it starts with the
/// word "no"; nullopt otherwise.
std::optional<bool> parse_yes_no(std::string_view reply, std::string_view positive = "yes");

/// Every maximal digit run in `reply`, in order of appearance.
std::vector<std::size_t> parse_indices(std::string_view reply);

std::string trim(std::string_view s);

}  // namespace rwr::prompts
