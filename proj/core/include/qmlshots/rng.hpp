#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace qmlshots {

// Counter-based stream built on Philox4x32-10. Every consumer of randomness
// in the project derives its own stream from (root seed, purpose tag,
// indices), so results do not depend on thread count or call interleaving,
// and are bit-identical across platforms (no std::*_distribution anywhere).
class RngStream {
  public:
    explicit RngStream(std::uint64_t key) : key_(key) {}

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    // Uniform in [0, 1) with 53 random bits.
    double uniform();

    // Standard normal via Box-Muller (pinned, unlike std::normal_distribution).
    double normal();

    // Uniform integer in [0, bound) without modulo bias.
    std::uint64_t below(std::uint64_t bound);

  private:
    void refill();

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::uint32_t block_[4] = {};
    int block_pos_ = 4;
    bool have_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

// Derives a substream key from a root seed, a purpose tag, and up to two
// indices (epoch / item / term, as each module's contract specifies).
std::uint64_t derive_key(std::uint64_t root_seed, std::string_view tag,
                         std::uint64_t a = 0, std::uint64_t b = 0);

inline RngStream derive_stream(std::uint64_t root_seed, std::string_view tag,
                               std::uint64_t a = 0, std::uint64_t b = 0) {
    return RngStream(derive_key(root_seed, tag, a, b));
}

}  // namespace qmlshots
