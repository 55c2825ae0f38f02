#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace canepi {

// SplitMix64, used for seeding and for hashing stream keys.
struct SplitMix64 {
    std::uint64_t state;

    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state(seed) {}

    constexpr std::uint64_t next() noexcept {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) noexcept {
    SplitMix64 sm(a ^ (b * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
    sm.next();
    return sm.next();
}

/// Seeded xoshiro256** stream. One stream per realization; `derive` splits off
/// keyed child streams so that draws for one purpose never shift draws for another.
///
/// Same (seed, stream_id) gives the same sequence on every platform: all
/// samplers in this library are written against `next_u64`, never against
/// `<random>` distributions.
class RngStream {
public:
    using result_type = std::uint64_t;

    static constexpr std::string_view algorithm_name = "xoshiro256** (splitmix64-seeded, keyed split)";

    constexpr RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
        : seed_(seed), stream_id_(stream_id) {
        SplitMix64 sm(mix64(seed, stream_id));
        for (auto& word : s_) {
            word = sm.next();
        }
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) {
            s_[0] = 1;
        }
    }

    constexpr std::uint64_t seed() const noexcept { return seed_; }
    constexpr std::uint64_t stream_id() const noexcept { return stream_id_; }

    /// Child stream keyed by `keys`. Depends only on (seed, stream_id, keys),
    /// never on how many draws this stream has already produced.
    RngStream derive(std::initializer_list<std::uint64_t> keys) const noexcept {
        std::uint64_t id = mix64(stream_id_, 0x5851F42D4C957F2DULL);
        for (std::uint64_t k : keys) {
            id = mix64(id, k);
        }
        return RngStream(seed_, id);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept { return next_u64(); }

    constexpr std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5ULL, 7) * 9ULL;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// 53-bit uniform in [0, 1).
    constexpr double uniform01() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Unbiased integer in [0, bound). bound must be > 0.
    constexpr std::uint64_t uniform_below(std::uint64_t bound) noexcept {
        const std::uint64_t threshold = (0 - bound) % bound;
        std::uint64_t x = next_u64();
        while (x < threshold) {
            x = next_u64();
        }
        return x % bound;
    }

    friend constexpr bool operator==(const RngStream&, const RngStream&) = default;

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::array<std::uint64_t, 4> s_{};
};

/// In-place Fisher-Yates; std::shuffle is not reproducible across standard libraries.
template <class RandomIt>
void shuffle(RandomIt first, RandomIt last, RngStream& rng) {
    const auto n = last - first;
    for (decltype(last - first) i = n - 1; i > 0; --i) {
        const auto j = static_cast<decltype(i)>(rng.uniform_below(static_cast<std::uint64_t>(i) + 1));
        using std::swap;
        swap(first[i], first[j]);
    }
}

} // namespace canepi
