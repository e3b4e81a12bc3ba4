#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

namespace qmlshots::sched {

using Shots = long long;

// Epoch -> shots policy. Epochs are 1-based; the floor clamp applies to both
// the linear and step variants (the step formula alone hits 0 at t = 100).
struct ShotSchedule {
    enum class Kind { Constant, Linear, Step };

    Kind kind = Kind::Constant;
    Shots s = 1000;        // Constant
    Shots s_start = 1000;  // Linear / Step
    Shots slope = 10;      // Linear, shots per epoch
    Shots delta = 100;     // Step, shots per period
    Shots period = 10;     // Step, epochs
    Shots floor = 20;      // Linear / Step lower bound

    static ShotSchedule constant(Shots s);
    static ShotSchedule linear(Shots s_start, Shots slope, Shots floor = 20);
    static ShotSchedule step(Shots s_start = 1000, Shots delta = 100,
                             Shots period = 10, Shots floor = 20);

    // Throws std::invalid_argument on an ill-formed policy.
    void validate() const;

    std::string describe() const;
};

// s_t for 1-based epoch t. Constant -> s; Linear -> max(floor, s_start -
// slope*t); Step -> max(floor, s_start - delta*floor(t/period)).
Shots shots_at(const ShotSchedule& schedule, long long t);

// dataset_size * evals_per_item * sum_{t=1..epochs} s_t. The headline
// accounting uses evals_per_item = 1 (forward passes only, excluding test
// evaluation and gradient circuits).
Shots total_training_shots(const ShotSchedule& schedule, long long epochs,
                           long long dataset_size, long long evals_per_item);

// Shot-consumption categories tracked separately: `Forward` is the headline
// training budget; `Gradient` covers parameter-shift circuit
// executions; `Evaluation` covers end-of-epoch test/train metric passes.
enum class ShotCategory { Forward, Gradient, Evaluation };

struct LedgerEntry {
    long long epoch = 0;
    Shots shots_each = 0;
    long long evaluations = 0;
    Shots consumed = 0;  // shots_each * evaluations
    ShotCategory category = ShotCategory::Forward;
};

// Exact cumulative shot accounting. Appends are serialized so workers may
// record concurrently; totals are exact regardless of interleaving.
class ShotLedger {
  public:
    void record(long long epoch, Shots shots_each, long long evaluations,
                ShotCategory category = ShotCategory::Forward);

    Shots cumulative() const;                     // all categories
    Shots cumulative(ShotCategory category) const;
    std::vector<LedgerEntry> entries() const;

  private:
    mutable std::mutex mutex_;
    std::vector<LedgerEntry> entries_;
    Shots totals_[3] = {0, 0, 0};
};

}  // namespace qmlshots::sched
