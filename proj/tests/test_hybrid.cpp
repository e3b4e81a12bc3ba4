#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "qmlshots/dataio.hpp"
#include "qmlshots/hybrid.hpp"
#include "qmlshots/rng.hpp"

using namespace qmlshots;
using hybrid::ForwardOptions;
using hybrid::HybridModel;
using hybrid::Layout;

namespace {

std::vector<float> random_image(std::uint64_t seed) {
    RngStream rng = derive_stream(seed, "image");
    std::vector<float> img(Layout::fc1_in);
    for (float& px : img) {
        px = static_cast<float>(rng.uniform());
    }
    return img;
}

}  // namespace

TEST_CASE("layout offsets and total size") {
    CHECK(Layout::fc1_b == 100352);
    CHECK(Layout::fc2_w == 100480);
    CHECK(Layout::fc2_b == 104576);
    CHECK(Layout::pqc_a == 104608);
    CHECK(Layout::pqc_b == 104692);
    CHECK(Layout::fc3_w == 104776);
    CHECK(Layout::fc3_b == 104856);
    CHECK(Layout::total == 104866);
}

TEST_CASE("init draws N(0,1) parameters, deterministically per seed") {
    const HybridModel a = HybridModel::init(12);
    const HybridModel b = HybridModel::init(12);
    const HybridModel c = HybridModel::init(13);
    CHECK(std::equal(a.params().begin(), a.params().end(), b.params().begin()));
    CHECK(!std::equal(a.params().begin(), a.params().end(), c.params().begin()));

    double sum = 0.0, sum_sq = 0.0;
    for (const double p : a.params()) {
        sum += p;
        sum_sq += p * p;
    }
    const double n = static_cast<double>(Layout::total);
    const double mean = sum / n;
    const double std = std::sqrt(sum_sq / n - mean * mean);
    CHECK(mean > -0.02);
    CHECK(mean < 0.02);
    CHECK(std > 0.98);
    CHECK(std < 1.02);
}

TEST_CASE("exact forward pass: shape and determinism") {
    const HybridModel model = HybridModel::init(1);
    const auto img = random_image(2);
    const ForwardOptions opts{true, 0, false};
    const auto a = hybrid::forward(model, img, opts);
    const auto b = hybrid::forward(model, img, opts);
    CHECK(a.logits == b.logits);
    CHECK(a.pqc_executions == 0);
    bool all_finite = true;
    for (const double l : a.logits) {
        all_finite = all_finite && std::isfinite(l);
    }
    CHECK(all_finite);
}

TEST_CASE("zero fc3 block means logits equal the fc3 bias") {
    HybridModel model = HybridModel::init(3);
    auto params = model.params();
    for (std::size_t i = Layout::fc3_w; i < Layout::fc3_b; ++i) {
        params[i] = 0.0;
    }
    for (int j = 0; j < Layout::fc3_out; ++j) {
        params[Layout::fc3_b + j] = 0.5 * j;
    }
    const auto res = hybrid::forward(model, random_image(4), ForwardOptions{true, 0, false});
    for (int j = 0; j < Layout::fc3_out; ++j) {
        CHECK(res.logits[j] == doctest::Approx(0.5 * j));
    }
}

TEST_CASE("sampled forward pass uses 2 PQC executions and tracks exact mode") {
    const HybridModel model = HybridModel::init(5);
    const auto img = random_image(6);
    const auto exact = hybrid::forward(model, img, ForwardOptions{true, 0, false});
    RngStream rng = derive_stream(7, "fwd");
    const auto sampled =
        hybrid::forward(model, img, ForwardOptions{false, 4000, false}, &rng);
    CHECK(sampled.pqc_executions == 2);
    // Only the 8 Z expectations are noisy; at 4000 shots each stays within a
    // few standard errors, so logits track the exact ones loosely.
    double max_w = 0.0;
    for (std::size_t i = Layout::fc3_w; i < Layout::fc3_b; ++i) {
        max_w = std::max(max_w, std::abs(model.params()[i]));
    }
    const double tol = 8.0 * max_w * 5.0 / std::sqrt(4000.0);
    for (int j = 0; j < Layout::fc3_out; ++j) {
        CHECK(std::abs(sampled.logits[j] - exact.logits[j]) < tol);
    }
}

TEST_CASE("softmax and cross-entropy") {
    SUBCASE("softmax sums to 1 and orders with logits") {
        const std::vector<double> logits{1.0, 3.0, -2.0, 0.0, 0.0,
                                         0.0, 0.0, 0.0,  0.0, 0.0};
        const auto p = hybrid::softmax(logits);
        CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0));
        CHECK(p[1] > p[0]);
        CHECK(p[0] > p[2]);
    }
    SUBCASE("uniform logits give loss ln(10)") {
        const std::vector<double> logits(10, 0.7);
        const auto r = hybrid::loss_and_accuracy(logits, 4);
        CHECK(r.loss == doctest::Approx(std::log(10.0)).epsilon(1e-12));
        CHECK(r.correct == false);  // argmax ties break low -> class 0
    }
    SUBCASE("saturated correct logit gives near-zero loss") {
        std::vector<double> logits(10, 0.0);
        logits[2] = 50.0;
        const auto r = hybrid::loss_and_accuracy(logits, 2);
        CHECK(r.loss < 1e-12);
        CHECK(r.correct);
    }
    SUBCASE("large logits do not overflow") {
        std::vector<double> logits(10, 1000.0);
        logits[3] = 1010.0;
        const auto r = hybrid::loss_and_accuracy(logits, 3);
        CHECK(std::isfinite(r.loss));
        CHECK(r.correct);
    }
    SUBCASE("loss decreases as the correct logit grows") {
        std::vector<double> logits(10, 0.0);
        double prev = hybrid::loss_and_accuracy(logits, 0).loss;
        for (double v = 0.5; v < 5.0; v += 0.5) {
            logits[0] = v;
            const double cur = hybrid::loss_and_accuracy(logits, 0).loss;
            CHECK(cur < prev);
            prev = cur;
        }
    }
}

TEST_CASE("exact backward matches finite differences on a coordinate subset") {
    HybridModel model = HybridModel::init(9);
    const auto img = random_image(10);
    const int label = 3;
    const ForwardOptions opts{true, 0, false};
    const auto back = hybrid::backward(model, img, label, opts);
    REQUIRE(back.grad.size() == Layout::total);
    CHECK(back.gradient_executions == 0);

    const auto loss_at = [&](std::size_t idx, double delta) {
        HybridModel m = model;
        m.params()[idx] += delta;
        const auto f = hybrid::forward(m, img, opts);
        return hybrid::loss_and_accuracy(
                   std::vector<double>(f.logits.begin(), f.logits.end()), label)
            .loss;
    };

    // A stratified set of coordinates: a few from each block.
    const std::vector<std::size_t> coords{
        Layout::fc1_w + 5,       Layout::fc1_w + 40000, Layout::fc1_b + 17,
        Layout::fc2_w + 123,     Layout::fc2_b + 30,    Layout::pqc_a + 0,
        Layout::pqc_a + 47,      Layout::pqc_a + 83,    Layout::pqc_b + 12,
        Layout::pqc_b + 70,      Layout::fc3_w + 11,    Layout::fc3_b + 9};
    const double h = 1e-4;
    for (const std::size_t idx : coords) {
        const double fd = (loss_at(idx, h) - loss_at(idx, -h)) / (2 * h);
        CHECK(back.grad[idx] == doctest::Approx(fd).epsilon(2e-4).scale(1.0));
    }
}

TEST_CASE("sampled backward counts parameter-shift executions") {
    HybridModel model = HybridModel::init(11);
    const auto img = random_image(12);
    RngStream rng = derive_stream(13, "back");
    const auto back =
        hybrid::backward(model, img, 0, ForwardOptions{false, 20, false}, &rng);
    // 216 shifted evaluations per PQC, two PQCs.
    CHECK(back.gradient_executions == 2 * 216);
}

TEST_CASE("training smoke run on synthetic data improves accuracy") {
    const auto train_set = data::synthetic_image_set(12, 3, 21);
    const auto test_set = data::synthetic_image_set(5, 3, 22);
    HybridModel model = HybridModel::init(23);
    hybrid::TrainConfig cfg;
    cfg.schedule = sched::ShotSchedule::constant(100);
    cfg.exact = true;
    cfg.epochs = 8;
    cfg.batch_size = 12;
    cfg.adam.lr = 0.01;
    cfg.seed = 24;
    sched::ShotLedger ledger;
    const auto metrics = hybrid::train(model, train_set, test_set, cfg, ledger);
    REQUIRE(metrics.size() == 8);
    CHECK(metrics.front().epoch == 1);
    CHECK(metrics.back().train_acc > metrics.front().train_acc - 0.05);
    CHECK(metrics.back().train_loss < metrics.front().train_loss);
    // Exact mode consumes no shots, so the forward bucket stays empty.
    CHECK(metrics.back().cumulative_shots == 0);
    CHECK(ledger.cumulative() == 0);
}

TEST_CASE("training metrics are reproducible and thread-count independent") {
    const auto train_set = data::synthetic_image_set(8, 2, 31);
    const auto test_set = data::synthetic_image_set(4, 2, 32);
    std::vector<std::vector<hybrid::MetricsRecord>> runs;
    for (const int threads : {1, 4}) {
        HybridModel model = HybridModel::init(33);
        hybrid::TrainConfig cfg;
        cfg.schedule = sched::ShotSchedule::linear(200, 20);
        cfg.exact = false;
        cfg.epochs = 3;
        cfg.batch_size = 8;
        cfg.seed = 34;
        cfg.threads = threads;
        sched::ShotLedger ledger;
        runs.push_back(hybrid::train(model, train_set, test_set, cfg, ledger));
    }
    REQUIRE(runs[0].size() == runs[1].size());
    for (std::size_t e = 0; e < runs[0].size(); ++e) {
        CHECK(runs[0][e].train_loss == runs[1][e].train_loss);
        CHECK(runs[0][e].test_loss == runs[1][e].test_loss);
        CHECK(runs[0][e].train_acc == runs[1][e].train_acc);
        CHECK(runs[0][e].cumulative_shots == runs[1][e].cumulative_shots);
        CHECK(runs[0][e].grad_cumulative_shots == runs[1][e].grad_cumulative_shots);
    }
}

TEST_CASE("Adam takes a descent step on a quadratic") {
    hybrid::AdamConfig cfg;
    cfg.lr = 0.1;
    hybrid::Adam opt(2, cfg);
    std::vector<double> x{3.0, -2.0};
    for (int i = 0; i < 200; ++i) {
        const std::vector<double> grad{2 * x[0], 2 * x[1]};
        opt.update(x, grad);
    }
    CHECK(std::abs(x[0]) < 0.05);
    CHECK(std::abs(x[1]) < 0.05);
}

TEST_CASE("first Adam step has magnitude lr") {
    hybrid::Adam opt(1, hybrid::AdamConfig{0.01, 0.9, 0.999, 1e-8});
    std::vector<double> x{1.0};
    opt.update(x, std::vector<double>{0.37});
    // Bias correction makes the first step exactly -lr * sign(grad) (up to eps).
    CHECK(x[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
}
