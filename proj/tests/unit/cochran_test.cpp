#include <catch2/catch_amalgamated.hpp>

#include "synlog/cochran.hpp"

using synlog::CochranParams;
using synlog::cochran_sample_size;

TEST_CASE("cochran gives 385 for a ten-million-event population", "[cochran]") {
    CHECK(cochran_sample_size({10'000'000ull, 1.96, 0.5, 0.05}) == 385);
}

TEST_CASE("cochran unbounded matches the uncorrected n0 ceiling", "[cochran]") {
    // n0 = 1.96^2 * 0.25 / 0.0025 = 384.16 -> 385
    CHECK(cochran_sample_size({std::nullopt, 1.96, 0.5, 0.05}) == 385);
    // Large populations barely move the corrected value.
    CHECK(cochran_sample_size({1'000'000'000ull, 1.96, 0.5, 0.05}) == 385);
}

TEST_CASE("cochran finite-population correction shrinks small populations", "[cochran]") {
    // n = 384.16 / (1 + 383.16/1000) = 277.74 -> 278
    CHECK(cochran_sample_size({1000ull, 1.96, 0.5, 0.05}) == 278);
    // N=100: n = 384.16 / (1 + 383.16/100) = 79.51 -> 80
    CHECK(cochran_sample_size({100ull, 1.96, 0.5, 0.05}) == 80);
    // Sample never exceeds the population.
    for (std::uint64_t N : {1ull, 2ull, 10ull, 50ull, 385ull, 1000ull}) {
        CHECK(cochran_sample_size({N, 1.96, 0.5, 0.05}) <= N);
    }
}

TEST_CASE("cochran rejects out-of-domain parameters", "[cochran]") {
    CHECK_THROWS_AS(cochran_sample_size({std::nullopt, 0.0, 0.5, 0.05}), std::domain_error);
    CHECK_THROWS_AS(cochran_sample_size({std::nullopt, -1.0, 0.5, 0.05}), std::domain_error);
    CHECK_THROWS_AS(cochran_sample_size({std::nullopt, 1.96, 0.0, 0.05}), std::domain_error);
    CHECK_THROWS_AS(cochran_sample_size({std::nullopt, 1.96, 1.0, 0.05}), std::domain_error);
    CHECK_THROWS_AS(cochran_sample_size({std::nullopt, 1.96, 0.5, 0.0}), std::domain_error);
    CHECK_THROWS_AS(cochran_sample_size({std::nullopt, 1.96, 0.5, 1.0}), std::domain_error);
    CHECK_THROWS_AS(cochran_sample_size({0ull, 1.96, 0.5, 0.05}), std::domain_error);
}

TEST_CASE("cochran is monotonic in margin of error and population", "[cochran][property]") {
    std::uint64_t prev = std::numeric_limits<std::uint64_t>::max();
    for (double e = 0.01; e < 0.25; e += 0.01) {
        const auto n = cochran_sample_size({std::nullopt, 1.96, 0.5, e});
        CHECK(n <= prev);
        prev = n;
    }
    // Finite-population sizes are bounded by the unbounded size.
    const auto infinite = cochran_sample_size({std::nullopt, 1.96, 0.5, 0.05});
    for (std::uint64_t N = 10; N <= 100000; N *= 10) {
        CHECK(cochran_sample_size({N, 1.96, 0.5, 0.05}) <= infinite);
    }
}
