#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qmlshots/circuit.hpp"
#include "qmlshots/dataio.hpp"
#include "qmlshots/gradient.hpp"
#include "qmlshots/rng.hpp"
#include "qmlshots/schedule.hpp"

namespace qmlshots::hybrid {

// Flat-parameter layout of the hybrid network:
// 784 -> fc1(128) -> ReLU -> fc2(32) -> split 16+16 -> amplitude embed ->
// two 4-qubit PQCs -> 4 PauliZ expectations each -> concat(8) -> fc3(10).
struct Layout {
    static constexpr int fc1_out = 128, fc1_in = 784;
    static constexpr int fc2_out = 32, fc2_in = 128;
    static constexpr int pqc_params = 84;
    static constexpr int fc3_out = 10, fc3_in = 8;

    static constexpr std::size_t fc1_w = 0;
    static constexpr std::size_t fc1_b = fc1_w + std::size_t{fc1_out} * fc1_in;
    static constexpr std::size_t fc2_w = fc1_b + fc1_out;
    static constexpr std::size_t fc2_b = fc2_w + std::size_t{fc2_out} * fc2_in;
    static constexpr std::size_t pqc_a = fc2_b + fc2_out;
    static constexpr std::size_t pqc_b = pqc_a + pqc_params;
    static constexpr std::size_t fc3_w = pqc_b + pqc_params;
    static constexpr std::size_t fc3_b = fc3_w + std::size_t{fc3_out} * fc3_in;
    static constexpr std::size_t total = fc3_b + fc3_out;  // 104866
};

class HybridModel {
  public:
    HybridModel() : params_(Layout::total, 0.0) {}
    explicit HybridModel(std::vector<double> params);

    // Every parameter (weights, biases, PQC angles) i.i.d. N(0,1) from the
    // seeded stream.
    static HybridModel init(std::uint64_t seed);

    std::span<const double> params() const { return params_; }
    std::span<double> params() { return params_; }

    std::span<const double> pqc_a() const {
        return std::span(params_).subspan(Layout::pqc_a, Layout::pqc_params);
    }
    std::span<const double> pqc_b() const {
        return std::span(params_).subspan(Layout::pqc_b, Layout::pqc_params);
    }

  private:
    std::vector<double> params_;
};

struct ForwardOptions {
    bool exact = true;
    long long shots = 0;          // per PQC execution when sampled
    bool relu_after_fc2 = false;
};

struct ForwardResult {
    std::array<double, Layout::fc3_out> logits{};
    long long pqc_executions = 0;  // sampled mode: 2 per forward
};

// Runs the network on one image. Sampled mode draws from `rng` (required).
ForwardResult forward(const HybridModel& model, std::span<const float> image,
                      const ForwardOptions& opts, RngStream* rng = nullptr);

struct LossResult {
    double loss = 0.0;
    bool correct = false;
};

// Softmax cross-entropy with max-subtraction; argmax ties break low.
LossResult loss_and_accuracy(std::span<const double> logits, int label);

std::vector<double> softmax(std::span<const double> logits);

struct BackwardResult {
    std::vector<double> grad;  // Layout::total entries
    double loss = 0.0;
    bool correct = false;
    long long gradient_executions = 0;  // sampled parameter-shift circuit runs
};

// Full reverse pass for one (image, label). PQC parameter gradients follow
// `opts` (adjoint when exact, sampled parameter-shift otherwise); gradients
// into the embedding features are always computed by the exact adjoint.
BackwardResult backward(const HybridModel& model, std::span<const float> image,
                        int label, const ForwardOptions& opts,
                        RngStream* rng = nullptr);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
  public:
    explicit Adam(std::size_t dim, AdamConfig cfg = {});
    void update(std::span<double> params, std::span<const double> grad);

  private:
    AdamConfig cfg_;
    std::vector<double> m_, v_;
    long long t_ = 0;
};

struct MetricsRecord {
    long long epoch = 0;
    double train_loss = 0.0, test_loss = 0.0;
    double train_acc = 0.0, test_acc = 0.0;
    sched::Shots shots_this_epoch = 0;
    sched::Shots cumulative_shots = 0;       // headline forward bucket
    sched::Shots grad_cumulative_shots = 0;  // parameter-shift circuits
};

struct TrainConfig {
    sched::ShotSchedule schedule = sched::ShotSchedule::constant(1000);
    bool exact = false;
    long long epochs = 100;
    int batch_size = 32;
    AdamConfig adam;
    bool relu_after_fc2 = false;
    std::uint64_t seed = 0;
    int threads = 1;
};

// Shot-scheduled training loop. Per-image randomness comes from substreams
// keyed by (seed, purpose, epoch, item index), so metrics do not depend on
// thread count. Optimizer updates are applied serially per batch (mean
// gradient). End-of-epoch train/test evaluation mirrors the epoch's s_t and
// is ledgered under Evaluation.
std::vector<MetricsRecord> train(
    HybridModel& model, const data::LabeledImageSet& train_set,
    const data::LabeledImageSet& test_set, const TrainConfig& cfg,
    sched::ShotLedger& ledger,
    const std::function<void(const MetricsRecord&)>& on_epoch = {});

}  // namespace qmlshots::hybrid
