#include "qmlshots/rng.hpp"

namespace qmlshots {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::uint32_t ctr[4], std::uint32_t key[2]) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t out0 = hi1 ^ ctr[1] ^ key[0];
    const std::uint32_t out2 = hi0 ^ ctr[3] ^ key[1];
    ctr[0] = out0;
    ctr[1] = lo1;
    ctr[2] = out2;
    ctr[3] = lo0;
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

void RngStream::refill() {
    std::uint32_t ctr[4] = {
        static_cast<std::uint32_t>(counter_),
        static_cast<std::uint32_t>(counter_ >> 32),
        0u,
        0u,
    };
    std::uint32_t key[2] = {
        static_cast<std::uint32_t>(key_),
        static_cast<std::uint32_t>(key_ >> 32),
    };
    for (int r = 0; r < 10; ++r) {
        philox_round(ctr, key);
    }
    block_[0] = ctr[0];
    block_[1] = ctr[1];
    block_[2] = ctr[2];
    block_[3] = ctr[3];
    block_pos_ = 0;
    ++counter_;
}

std::uint32_t RngStream::next_u32() {
    if (block_pos_ >= 4) {
        refill();
    }
    return block_[block_pos_++];
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return (hi << 32) | lo;
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
    if (have_spare_normal_) {
        have_spare_normal_ = false;
        return spare_normal_;
    }
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 <= 0.0) {
        u1 = 0x1.0p-53;
    }
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * M_PI * u2;
    spare_normal_ = r * std::sin(phi);
    have_spare_normal_ = true;
    return r * std::cos(phi);
}

std::uint64_t RngStream::below(std::uint64_t bound) {
    if (bound <= 1) {
        return 0;
    }
    const std::uint64_t threshold = (0ull - bound) % bound;
    for (;;) {
        const std::uint64_t v = next_u64();
        if (v >= threshold) {
            return v % bound;
        }
    }
}

std::uint64_t derive_key(std::uint64_t root_seed, std::string_view tag,
                         std::uint64_t a, std::uint64_t b) {
    // FNV-1a over the tag, then splitmix64 mixing of the numeric parts.
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (const char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    std::uint64_t k = splitmix64(root_seed ^ h);
    k = splitmix64(k ^ a);
    k = splitmix64(k ^ b);
    return k;
}

}  // namespace qmlshots
