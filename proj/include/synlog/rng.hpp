#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace synlog {

// SplitMix64 (Steele/Lea/Flood). Chosen over <random> engines because the
// standard distributions are implementation-defined; generated datasets must
// be byte-identical across platforms and compilers.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Stream split: an independent generator for (seed, index). Record i draws
    // only from stream(seed, i), so changing what happens at other indices
    // never perturbs record i's values.
    static SplitMix64 stream(std::uint64_t seed, std::uint64_t index) {
        return SplitMix64(mix(seed) ^ mix(0x9E3779B97F4A7C15ull * (index + 1)));
    }

    // Bounded draw via 128-bit multiply-shift (Lemire). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    template <typename Container>
    const auto& pick(const Container& pool) {
        return pool[static_cast<std::size_t>(below(pool.size()))];
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

// Random UUIDv4 text form (lowercase, 8-4-4-4-12).
inline std::string uuid4(SplitMix64& rng) {
    const std::uint64_t hi = rng.next();
    const std::uint64_t lo = rng.next();
    std::array<unsigned char, 16> b{};
    for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<unsigned char>(hi >> (56 - 8 * i));
    for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(8 + i)] = static_cast<unsigned char>(lo >> (56 - 8 * i));
    b[6] = static_cast<unsigned char>((b[6] & 0x0F) | 0x40);  // version 4
    b[8] = static_cast<unsigned char>((b[8] & 0x3F) | 0x80);  // RFC 4122 variant

    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(36);
    for (std::size_t i = 0; i < 16; ++i) {
        if (i == 4 || i == 6 || i == 8 || i == 10) out.push_back('-');
        out.push_back(hex[b[i] >> 4]);
        out.push_back(hex[b[i] & 0x0F]);
    }
    return out;
}

}  // namespace synlog
