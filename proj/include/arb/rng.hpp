#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace arb {

// Philox4x32-10 counter-based generator (Salmon et al., Random123). The key is
// the user seed, the upper half of the counter selects an independent stream,
// and the lower half counts blocks. Satisfies UniformRandomBitGenerator.
class Philox {
public:
    using result_type = std::uint64_t;
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    explicit Philox(std::uint64_t seed = 0, std::uint64_t stream = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (lane_ == 2) {
            const Block ctr = {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                               static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
            out_ = bijection(ctr, key_);
            ++block_;
            lane_ = 0;
        }
        const std::uint64_t lo = out_[2 * lane_];
        const std::uint64_t hi = out_[2 * lane_ + 1];
        ++lane_;
        return lo | (hi << 32);
    }

    // Uniform double in the open interval (0, 1).
    double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    // Standard normal by the Marsaglia polar method (no cached second value,
    // so the stream position depends only on the number of calls).
    double normal() {
        for (;;) {
            const double u = 2.0 * uniform() - 1.0;
            const double v = 2.0 * uniform() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

    bool bernoulli(double prob) { return uniform() < prob; }

    std::uint64_t seed() const { return static_cast<std::uint64_t>(key_[0]) | (static_cast<std::uint64_t>(key_[1]) << 32); }
    std::uint64_t stream() const { return stream_; }

    static Block bijection(Block ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += 0x9E3779B9u;
                key[1] += 0xBB67AE85u;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(0xD2511F53u) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(0xCD9E8D57u) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

private:
    Key key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    Block out_{};
    int lane_ = 2;
};

}  // namespace arb
