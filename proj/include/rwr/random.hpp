#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace rwr {

/// SplitMix64 generator. Unlike the standard distributions, every draw here is
/// fully specified, so seeded outputs are identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();

    /// Uniform integer in [0, bound). `bound` must be positive.
    std::uint64_t below(std::uint64_t bound);

    /// Uniform double in [0, 1).
    double unit();

private:
    std::uint64_t state_;
};

template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

}  // namespace rwr
