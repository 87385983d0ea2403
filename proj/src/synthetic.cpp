#include "rwr/synthetic.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "rwr/error.hpp"
#include "rwr/random.hpp"

namespace rwr::eval {

namespace {

// Lowercase only, no digits, and never "code": needles stay unique.
constexpr std::array<const char*, 48> kFiller = {
    "river",  "stone",   "lantern", "meadow", "quiet",  "harbor", "copper", "window",
    "garden", "thunder", "velvet",  "orchard", "silver", "candle", "marble", "forest",
    "pebble", "shadow",  "autumn",  "bridge", "canvas", "falcon", "glacier", "hollow",
    "island", "jasmine", "kettle",  "ladder", "mirror", "needle", "ocean",  "paper",
    "quartz", "ribbon",  "saddle",  "tunnel", "umbrella", "valley", "willow", "yonder",
    "amber",  "breeze",  "cobalt",  "drift",  "ember",  "fable",  "gravel", "horizon"};

constexpr std::size_t kMinParagraphWords = 40;
constexpr std::size_t kMaxParagraphWords = 120;

std::string random_key(Rng& rng) {
    std::string key(6, 'A');
    for (auto& c : key) c = static_cast<char>('A' + rng.below(26));
    return key;
}

}  // namespace

std::string needle_sentence(const std::string& key, const std::string& value) {
    return "The code for " + key + " is " + value + ".";
}

std::string needle_query(const std::string& key) { return "What is the code for " + key + "?"; }

std::vector<Example> gen_synthetic_recall(std::uint64_t seed, std::size_t n_pairs, std::size_t haystack_units,
                                          LengthUnit unit) {
    if (n_pairs < 1) throw InvalidArgument("n_pairs must be at least 1");
    if (haystack_units <= n_pairs) throw InvalidArgument("haystack_units must exceed n_pairs");

    Rng rng(seed);
    std::vector<std::string> keys;
    std::vector<std::string> values;
    std::set<std::string> seen_keys;
    std::set<std::uint64_t> seen_values;
    while (keys.size() < n_pairs) {
        auto key = random_key(rng);
        if (!seen_keys.insert(key).second) continue;
        std::uint64_t value = 0;
        do {
            value = 100000 + rng.below(900000);
        } while (!seen_values.insert(value).second);
        keys.push_back(std::move(key));
        values.push_back(std::to_string(value));
    }

    std::size_t needle_units = 0;
    for (std::size_t i = 0; i < n_pairs; ++i) {
        needle_units += measure_length(needle_sentence(keys[i], values[i]), unit);
    }
    const std::size_t filler_target = haystack_units > needle_units ? haystack_units - needle_units : 0;

    // Needle i is inserted once the filler stream reaches offsets[i] units.
    std::vector<std::size_t> offsets(n_pairs);
    for (auto& off : offsets) off = filler_target == 0 ? 0 : static_cast<std::size_t>(rng.below(filler_target));
    std::vector<std::size_t> order(n_pairs);
    for (std::size_t i = 0; i < n_pairs; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return offsets[a] < offsets[b]; });

    std::string doc;
    std::size_t filler_units = 0;
    std::size_t paragraph = 0;
    std::size_t words_in_paragraph = 0;
    std::size_t paragraph_len = kMinParagraphWords + rng.below(kMaxParagraphWords - kMinParagraphWords + 1);
    std::size_t words_in_sentence = 0;
    std::size_t sentence_len = 8 + rng.below(8);
    std::size_t next = 0;

    struct Placement {
        std::size_t unit_offset;
        std::size_t byte_offset;
        std::size_t paragraph;
    };
    std::vector<Placement> placed(n_pairs);

    auto append_word = [&](const std::string& word) {
        if (!doc.empty() && doc.back() != '\n') doc.push_back(' ');
        doc += word;
    };
    auto place_needles = [&] {
        while (next < n_pairs && offsets[order[next]] <= filler_units) {
            const auto idx = order[next++];
            if (!doc.empty() && doc.back() != '\n') doc.push_back(' ');
            placed[idx] = {measure_length(doc, unit), doc.size(), paragraph};
            doc += needle_sentence(keys[idx], values[idx]);
            ++words_in_paragraph;
        }
    };

    std::size_t filler_words = 0;
    std::size_t filler_bytes = 0;
    auto filler_measure = [&] {
        return unit == LengthUnit::WhitespaceWords ? filler_words : (filler_bytes + 3) / 4;
    };

    while (filler_units < filler_target) {
        place_needles();
        std::string word = kFiller[rng.below(kFiller.size())];
        if (++words_in_sentence >= sentence_len) {
            word += '.';
            words_in_sentence = 0;
            sentence_len = 8 + rng.below(8);
        }
        append_word(word);
        ++filler_words;
        filler_bytes += word.size() + 1;
        filler_units = filler_measure();
        if (++words_in_paragraph >= paragraph_len && filler_units < filler_target) {
            if (doc.back() != '.') doc.push_back('.');
            doc += "\n\n";
            ++paragraph;
            words_in_paragraph = 0;
            words_in_sentence = 0;
            paragraph_len = kMinParagraphWords + rng.below(kMaxParagraphWords - kMinParagraphWords + 1);
        }
    }
    // Every offset is below filler_target, so this places the remainder.
    place_needles();
    if (!doc.empty() && doc.back() != '.') doc.push_back('.');

    std::vector<Example> out;
    out.reserve(n_pairs);
    for (std::size_t i = 0; i < n_pairs; ++i) {
        Example e;
        e.id = "synth-" + std::to_string(seed) + "-" + std::to_string(i);
        e.context = doc;
        e.query = needle_query(keys[i]);
        e.answer = values[i];
        e.meta = {{"task", "synthetic_recall"},
                  {"key", keys[i]},
                  {"needle_unit_offset", std::to_string(placed[i].unit_offset)},
                  {"needle_byte_offset", std::to_string(placed[i].byte_offset)},
                  {"needle_paragraph", std::to_string(placed[i].paragraph)}};
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace rwr::eval
