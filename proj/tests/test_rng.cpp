#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "csl/rng.hpp"

using csl::PhiloxRng;

TEST_CASE("philox4x32-10 known-answer vectors", "[rng]") {
    // Random123 kat_vectors file, philox4x32 10 rounds
    const auto zero = PhiloxRng::block({0, 0, 0, 0}, {0, 0});
    CHECK(zero == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu,
                                               0x9b00dbd8u});

    const auto ones = PhiloxRng::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                       {0xffffffffu, 0xffffffffu});
    CHECK(ones == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u,
                                               0x6d5451fdu});

    const auto pi = PhiloxRng::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                     {0xa4093822u, 0x299f31d0u});
    CHECK(pi == std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u,
                                             0x24126ea1u});
}

TEST_CASE("fixed seeds replay bit-identically, different seeds diverge", "[rng]") {
    PhiloxRng a(12345), b(12345), c(54321);
    bool all_equal = true, any_equal_c = false;
    for (int i = 0; i < 1000; ++i) {
        const auto va = a.next_u64();
        const auto vb = b.next_u64();
        const auto vc = c.next_u64();
        all_equal = all_equal && (va == vb);
        any_equal_c = any_equal_c || (va == vc);
    }
    CHECK(all_equal);
    CHECK_FALSE(any_equal_c);
}

TEST_CASE("uniforms stay inside the open unit interval", "[rng]") {
    PhiloxRng rng(99);
    double lo = 1.0, hi = 0.0, mean = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        mean += u;
    }
    mean /= n;
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(mean == Catch::Approx(0.5).margin(3.0 / std::sqrt(12.0 * n)));
}

TEST_CASE("gaussian moments", "[rng]") {
    PhiloxRng rng(7);
    const int n = 400000;
    double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.gaussian();
        m1 += z;
        m2 += z * z;
        m3 += z * z * z;
        m4 += z * z * z * z;
    }
    m1 /= n;
    m2 /= n;
    m3 /= n;
    m4 /= n;
    // standard errors: 1/sqrt(n), sqrt(2/n), sqrt(15/n), sqrt(96/n)
    CHECK(m1 == Catch::Approx(0.0).margin(3.0 / std::sqrt(double(n))));
    CHECK(m2 == Catch::Approx(1.0).margin(3.0 * std::sqrt(2.0 / n)));
    CHECK(m3 == Catch::Approx(0.0).margin(3.0 * std::sqrt(15.0 / n)));
    CHECK(m4 == Catch::Approx(3.0).margin(3.0 * std::sqrt(96.0 / n)));
}

TEST_CASE("no serial correlation at lag one", "[rng]") {
    PhiloxRng rng(31);
    const int n = 200000;
    double prev = rng.gaussian(), acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.gaussian();
        acc += prev * z;
        prev = z;
    }
    CHECK(acc / n == Catch::Approx(0.0).margin(3.0 / std::sqrt(double(n))));
}
