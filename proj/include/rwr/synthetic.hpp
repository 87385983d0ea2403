#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rwr/corpus.hpp"

namespace rwr::eval {

/// "The code for <key> is <value>."
std::string needle_sentence(const std::string& key, const std::string& value);

/// "What is the code for <key>?"
std::string needle_query(const std::string& key);

/// Deterministic key-value recall corpus: one filler document measuring
/// about `haystack_units` that hides `n_pairs` needle sentences at seeded,
/// uniformly drawn offsets, and one Example per needle sharing that document.
/// meta carries task, key, needle_unit_offset, needle_byte_offset and
/// needle_paragraph. Throws InvalidArgument unless n_pairs >= 1 and
/// haystack_units > n_pairs.
std::vector<Example> gen_synthetic_recall(std::uint64_t seed, std::size_t n_pairs,
                                          std::size_t haystack_units,
                                          LengthUnit unit = LengthUnit::WhitespaceWords);

}  // namespace rwr::eval
