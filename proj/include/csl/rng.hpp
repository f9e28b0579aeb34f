#pragma once

// Counter-based random number generator: Philox4x32 with 10 rounds
// (Salmon, Moro, Dull, Shaw 2011). 64-bit seed as the key, 128-bit counter
// incremented per block. Verified against the Random123 known-answer vectors.
//
// Gaussian variates via the Box-Muller transform on (0,1) uniforms built from
// 53 high bits of each 64-bit output word. Determinism contract: bit-level
// reproducibility within one implementation for a fixed seed.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace csl {

class PhiloxRng {
public:
    explicit PhiloxRng(std::uint64_t seed) {
        key_[0] = static_cast<std::uint32_t>(seed);
        key_[1] = static_cast<std::uint32_t>(seed >> 32);
    }

    // Raw keyed block function (exposed for known-answer tests).
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        constexpr std::uint32_t kMul0 = 0xD2511F53u;
        constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
        constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
        constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }

    std::uint64_t next_u64() {
        if (word_ >= 4) refill();
        const std::uint64_t lo = buffer_[word_];
        const std::uint64_t hi = buffer_[word_ + 1];
        word_ += 2;
        return lo | (hi << 32);
    }

    // Uniform double in (0, 1): 53 high bits, offset half a ulp from both ends.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; generates pairs, caches the second.
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(phi);
        have_cached_ = true;
        return r * std::cos(phi);
    }

private:
    void refill() {
        buffer_ = block(counter_, key_);
        word_ = 0;
        for (int i = 0; i < 4; ++i) {
            if (++counter_[i] != 0) break;  // 128-bit increment with carry
        }
    }

    std::array<std::uint32_t, 4> counter_{0, 0, 0, 0};
    std::array<std::uint32_t, 2> key_{0, 0};
    std::array<std::uint32_t, 4> buffer_{};
    int word_ = 4;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace csl
