#pragma once

// Brute-force reference implementations used only by tests. They share no
// code with the library's metric paths.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace rwr::oracle {

/// Clipped n-gram F1 by explicit enumeration: for every distinct n-gram in
/// either list, count its occurrences in both by linear scan.
inline double ngram_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold, std::size_t n) {
    if (pred.empty() && gold.empty()) return 1.0;
    if (pred.empty() || gold.empty()) return 0.0;
    auto grams = [n](const std::vector<std::string>& t) {
        std::vector<std::vector<std::string>> out;
        for (std::size_t i = 0; i + n <= t.size(); ++i) out.emplace_back(t.begin() + i, t.begin() + i + n);
        return out;
    };
    const auto pg = grams(pred);
    const auto gg = grams(gold);
    if (pg.empty() || gg.empty()) return 0.0;
    std::size_t overlap = 0;
    for (std::size_t i = 0; i < pg.size(); ++i) {
        bool first = true;
        for (std::size_t j = 0; j < i; ++j) {
            if (pg[j] == pg[i]) first = false;
        }
        if (!first) continue;
        const auto in_pred = static_cast<std::size_t>(std::count(pg.begin(), pg.end(), pg[i]));
        const auto in_gold = static_cast<std::size_t>(std::count(gg.begin(), gg.end(), pg[i]));
        overlap += std::min(in_pred, in_gold);
    }
    if (overlap == 0) return 0.0;
    const double p = static_cast<double>(overlap) / static_cast<double>(pg.size());
    const double r = static_cast<double>(overlap) / static_cast<double>(gg.size());
    return 2.0 * p * r / (p + r);
}

/// Full quadratic DP table for LCS length.
inline std::size_t lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
        }
    }
    return t[a.size()][b.size()];
}

inline double lcs_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    if (pred.empty() && gold.empty()) return 1.0;
    if (pred.empty() || gold.empty()) return 0.0;
    const auto l = lcs(pred, gold);
    if (l == 0) return 0.0;
    const double p = static_cast<double>(l) / static_cast<double>(pred.size());
    const double r = static_cast<double>(l) / static_cast<double>(gold.size());
    return 2.0 * p * r / (p + r);
}

/// Joins tokens with single spaces; tokens are lowercase words so this is a
/// fixed point of the metric tokenizer.
inline std::string join(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

}  // namespace rwr::oracle
