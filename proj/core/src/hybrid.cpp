#include "qmlshots/hybrid.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace qmlshots::hybrid {

namespace {

using ansatz::CircuitTemplate;
using sim::Observable;
using sim::PauliString;
using sim::StateVector;

const CircuitTemplate& qcnn_template() {
    static const CircuitTemplate tmpl = ansatz::build_qcnn_pqc();
    return tmpl;
}

const std::vector<PauliString>& z_observables() {
    static const std::vector<PauliString> obs = [] {
        std::vector<PauliString> v;
        for (int q = 0; q < 4; ++q) {
            v.push_back(PauliString::single_z(q, 4));
        }
        return v;
    }();
    return obs;
}

// y = W x + b with W stored row-major (out x in).
void dense_forward(std::span<const double> w, std::span<const double> b,
                   std::span<const double> x, std::span<double> y) {
    const std::size_t out = b.size();
    const std::size_t in = x.size();
    for (std::size_t o = 0; o < out; ++o) {
        double acc = b[o];
        const double* row = w.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) {
            acc += row[i] * x[i];
        }
        y[o] = acc;
    }
}

// Accumulates dW += dy x^T, db += dy and computes dx = W^T dy.
void dense_backward(std::span<const double> w, std::span<const double> x,
                    std::span<const double> dy, std::span<double> dw,
                    std::span<double> db, std::span<double> dx) {
    const std::size_t out = dy.size();
    const std::size_t in = x.size();
    std::fill(dx.begin(), dx.end(), 0.0);
    for (std::size_t o = 0; o < out; ++o) {
        const double g = dy[o];
        db[o] += g;
        double* dwrow = dw.data() + o * in;
        const double* wrow = w.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) {
            dwrow[i] += g * x[i];
            dx[i] += wrow[i] * g;
        }
    }
}

struct ForwardCache {
    std::vector<double> x;        // 784 input as double
    std::vector<double> pre1;     // fc1 pre-activation (128)
    std::vector<double> h1;       // post-ReLU (128)
    std::vector<double> pre2;     // fc2 pre-activation (32)
    std::vector<double> h2;       // fc2 output after optional ReLU (32)
    std::array<double, 4> za{}, zb{};
    std::vector<double> z;        // 8
    std::array<double, Layout::fc3_out> logits{};
};

std::span<const double> seg(std::span<const double> p, std::size_t off, std::size_t n) {
    return p.subspan(off, n);
}
std::span<double> seg(std::span<double> p, std::size_t off, std::size_t n) {
    return p.subspan(off, n);
}

// Forward pass filling the cache. Quantum outputs are exact or one
// shared-sample readout per PQC.
void run_forward(const HybridModel& model, std::span<const float> image,
                 const ForwardOptions& opts, RngStream* rng, ForwardCache& c,
                 long long* pqc_executions) {
    if (image.size() != Layout::fc1_in) {
        throw std::invalid_argument("image must have 784 pixels");
    }
    if (!opts.exact) {
        if (opts.shots < 1) {
            throw std::invalid_argument("sampled forward needs shots >= 1");
        }
        if (rng == nullptr) {
            throw std::invalid_argument("sampled forward needs an rng stream");
        }
    }
    const auto p = model.params();
    c.x.assign(image.begin(), image.end());
    c.pre1.resize(Layout::fc1_out);
    dense_forward(seg(p, Layout::fc1_w, std::size_t{Layout::fc1_out} * Layout::fc1_in),
                  seg(p, Layout::fc1_b, Layout::fc1_out), c.x, c.pre1);
    c.h1.resize(Layout::fc1_out);
    for (int i = 0; i < Layout::fc1_out; ++i) {
        c.h1[i] = std::max(0.0, c.pre1[i]);
    }
    c.pre2.resize(Layout::fc2_out);
    dense_forward(seg(p, Layout::fc2_w, std::size_t{Layout::fc2_out} * Layout::fc2_in),
                  seg(p, Layout::fc2_b, Layout::fc2_out), c.h1, c.pre2);
    c.h2 = c.pre2;
    if (opts.relu_after_fc2) {
        for (double& v : c.h2) {
            v = std::max(0.0, v);
        }
    }

    const CircuitTemplate& tmpl = qcnn_template();
    auto run_pqc = [&](std::span<const double> features,
                       std::span<const double> theta, std::array<double, 4>& out) {
        const StateVector embedded = StateVector::amplitude_embed(features);
        const StateVector state = ansatz::apply_circuit(tmpl, theta, embedded);
        if (opts.exact) {
            for (int q = 0; q < 4; ++q) {
                out[q] = sim::expectation_exact(state, z_observables()[q]);
            }
        } else {
            const std::vector<double> est =
                sim::expectation_sampled_z(state, {0, 1, 2, 3}, opts.shots, *rng);
            std::copy(est.begin(), est.end(), out.begin());
            if (pqc_executions != nullptr) {
                ++*pqc_executions;
            }
        }
    };
    run_pqc(std::span(c.h2).first(16), model.pqc_a(), c.za);
    run_pqc(std::span(c.h2).subspan(16, 16), model.pqc_b(), c.zb);

    c.z.resize(8);
    std::copy(c.za.begin(), c.za.end(), c.z.begin());
    std::copy(c.zb.begin(), c.zb.end(), c.z.begin() + 4);

    std::vector<double> logits(Layout::fc3_out);
    dense_forward(seg(p, Layout::fc3_w, std::size_t{Layout::fc3_out} * Layout::fc3_in),
                  seg(p, Layout::fc3_b, Layout::fc3_out), c.z, logits);
    std::copy(logits.begin(), logits.end(), c.logits.begin());
}

}  // namespace

HybridModel::HybridModel(std::vector<double> params) : params_(std::move(params)) {
    if (params_.size() != Layout::total) {
        throw std::invalid_argument("parameter vector must have " +
                                    std::to_string(Layout::total) + " entries");
    }
}

HybridModel HybridModel::init(std::uint64_t seed) {
    RngStream rng = derive_stream(seed, "init");
    std::vector<double> p(Layout::total);
    for (double& v : p) {
        v = rng.normal();
    }
    return HybridModel(std::move(p));
}

ForwardResult forward(const HybridModel& model, std::span<const float> image,
                      const ForwardOptions& opts, RngStream* rng) {
    ForwardCache cache;
    ForwardResult result;
    run_forward(model, image, opts, rng, cache, &result.pqc_executions);
    result.logits = cache.logits;
    return result;
}

std::vector<double> softmax(std::span<const double> logits) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (double& v : p) {
        v /= sum;
    }
    return p;
}

LossResult loss_and_accuracy(std::span<const double> logits, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
        throw std::invalid_argument("label out of range");
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (const double l : logits) {
        sum += std::exp(l - mx);
    }
    LossResult r;
    r.loss = std::log(sum) - (logits[label] - mx);
    const std::size_t argmax =
        std::max_element(logits.begin(), logits.end()) - logits.begin();
    r.correct = static_cast<int>(argmax) == label;
    return r;
}

BackwardResult backward(const HybridModel& model, std::span<const float> image,
                        int label, const ForwardOptions& opts, RngStream* rng) {
    ForwardCache c;
    long long pqc_execs = 0;
    run_forward(model, image, opts, rng, c, &pqc_execs);

    BackwardResult result;
    result.grad.assign(Layout::total, 0.0);
    const LossResult lr = loss_and_accuracy(c.logits, label);
    result.loss = lr.loss;
    result.correct = lr.correct;

    const auto p = model.params();
    auto g = std::span<double>(result.grad);

    // d loss / d logits = softmax - onehot
    std::vector<double> dlogits = softmax(c.logits);
    dlogits[label] -= 1.0;

    std::vector<double> dz(Layout::fc3_in);
    dense_backward(seg(p, Layout::fc3_w, std::size_t{Layout::fc3_out} * Layout::fc3_in),
                   c.z, dlogits,
                   seg(g, Layout::fc3_w, std::size_t{Layout::fc3_out} * Layout::fc3_in),
                   seg(g, Layout::fc3_b, Layout::fc3_out), dz);

    const CircuitTemplate& tmpl = qcnn_template();
    std::vector<double> dh2(Layout::fc2_out, 0.0);

    auto backprop_pqc = [&](std::span<const double> features,
                            std::span<const double> theta,
                            std::span<const double> weights,  // dloss/dz_q, 4
                            std::span<double> theta_grad,
                            std::span<double> feature_grad) {
        // weighted observable sum_q w_q Z_q lets one adjoint pass produce
        // both the parameter gradient and the input-feature gradient
        Observable weighted;
        for (int q = 0; q < 4; ++q) {
            weighted.push_back({weights[q], PauliString::single_z(q, 4)});
        }
        if (opts.exact) {
            const ansatz::AdjointResult adj = ansatz::adjoint_gradient(
                tmpl, theta, StateVector::amplitude_embed(features), weighted);
            for (int k = 0; k < tmpl.num_params; ++k) {
                theta_grad[k] += adj.param_grad[k];
            }
        } else {
            ansatz::GradientBackend backend{ansatz::GradientMode::SampledParamShift,
                                            opts.shots};
            const ansatz::GradientResult gr = ansatz::gradient(
                tmpl, theta, StateVector::amplitude_embed(features), z_observables(),
                backend, rng);
            const auto counts = ansatz::shift_rule_counts(tmpl);
            result.gradient_executions += 2LL * counts.two_term + 4LL * counts.four_term;
            for (int q = 0; q < 4; ++q) {
                for (int k = 0; k < tmpl.num_params; ++k) {
                    theta_grad[k] += weights[q] * gr.jacobian[q][k];
                }
            }
        }
        // input-feature gradients always go through the exact adjoint
        const std::vector<double> fg =
            ansatz::feature_gradient(tmpl, theta, features, weighted);
        for (int i = 0; i < 16; ++i) {
            feature_grad[i] += fg[i];
        }
    };

    backprop_pqc(std::span(c.h2).first(16), model.pqc_a(),
                 std::span(dz).first(4),
                 seg(g, Layout::pqc_a, Layout::pqc_params),
                 std::span(dh2).first(16));
    backprop_pqc(std::span(c.h2).subspan(16, 16), model.pqc_b(),
                 std::span(dz).subspan(4, 4),
                 seg(g, Layout::pqc_b, Layout::pqc_params),
                 std::span(dh2).subspan(16, 16));

    if (opts.relu_after_fc2) {
        for (int i = 0; i < Layout::fc2_out; ++i) {
            if (c.pre2[i] <= 0.0) {
                dh2[i] = 0.0;
            }
        }
    }

    std::vector<double> dh1(Layout::fc1_out);
    dense_backward(seg(p, Layout::fc2_w, std::size_t{Layout::fc2_out} * Layout::fc2_in),
                   c.h1, dh2,
                   seg(g, Layout::fc2_w, std::size_t{Layout::fc2_out} * Layout::fc2_in),
                   seg(g, Layout::fc2_b, Layout::fc2_out), dh1);
    for (int i = 0; i < Layout::fc1_out; ++i) {
        if (c.pre1[i] <= 0.0) {
            dh1[i] = 0.0;
        }
    }
    std::vector<double> dx(Layout::fc1_in);
    dense_backward(seg(p, Layout::fc1_w, std::size_t{Layout::fc1_out} * Layout::fc1_in),
                   c.x, dh1,
                   seg(g, Layout::fc1_w, std::size_t{Layout::fc1_out} * Layout::fc1_in),
                   seg(g, Layout::fc1_b, Layout::fc1_out), dx);
    return result;
}

Adam::Adam(std::size_t dim, AdamConfig cfg)
    : cfg_(cfg), m_(dim, 0.0), v_(dim, 0.0) {}

void Adam::update(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) {
        throw std::invalid_argument("Adam state shape mismatch");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
        v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
        const double mhat = m_[i] / bc1;
        const double vhat = v_[i] / bc2;
        params[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
}

namespace {

// Deterministic parallel map: results land in index order regardless of
// thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    const int workers = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) {
                    return;
                }
                fn(i);
            }
        });
    }
    for (std::thread& t : pool) {
        t.join();
    }
}

struct EvalStats {
    double loss = 0.0;
    double acc = 0.0;
};

EvalStats evaluate_set(const HybridModel& model, const data::LabeledImageSet& set,
                       const ForwardOptions& opts, std::uint64_t seed,
                       const char* tag, long long epoch, int threads) {
    std::vector<double> losses(set.size());
    std::vector<int> correct(set.size());
    parallel_for(set.size(), threads, [&](std::size_t i) {
        RngStream rng = derive_stream(seed, tag, epoch, i);
        const ForwardResult fr =
            forward(model, set.images[i], opts, opts.exact ? nullptr : &rng);
        const LossResult lr = loss_and_accuracy(fr.logits, set.labels[i]);
        losses[i] = lr.loss;
        correct[i] = lr.correct ? 1 : 0;
    });
    EvalStats stats;
    for (std::size_t i = 0; i < set.size(); ++i) {
        stats.loss += losses[i];
        stats.acc += correct[i];
    }
    stats.loss /= static_cast<double>(set.size());
    stats.acc /= static_cast<double>(set.size());
    return stats;
}

}  // namespace

std::vector<MetricsRecord> train(
    HybridModel& model, const data::LabeledImageSet& train_set,
    const data::LabeledImageSet& test_set, const TrainConfig& cfg,
    sched::ShotLedger& ledger,
    const std::function<void(const MetricsRecord&)>& on_epoch) {
    if (cfg.epochs < 1) {
        throw std::invalid_argument("epochs must be >= 1");
    }
    if (train_set.size() == 0 || test_set.size() == 0) {
        throw std::invalid_argument("train and test sets must be non-empty");
    }
    cfg.schedule.validate();

    Adam adam(Layout::total, cfg.adam);
    std::vector<MetricsRecord> records;
    records.reserve(cfg.epochs);

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }

    for (long long epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const sched::Shots s_t = sched::shots_at(cfg.schedule, epoch);
        const ForwardOptions opts{cfg.exact, s_t, cfg.relu_after_fc2};

        // per-epoch shuffle from its own substream
        RngStream shuffle_rng = derive_stream(cfg.seed, "shuffle", epoch);
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = shuffle_rng.below(i);
            std::swap(order[i - 1], order[j]);
        }

        long long grad_execs_epoch = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const std::size_t bsz = end - start;
            std::vector<BackwardResult> results(bsz);
            parallel_for(bsz, cfg.threads, [&](std::size_t k) {
                const std::size_t item = order[start + k];
                RngStream rng = derive_stream(cfg.seed, "train", epoch, item);
                results[k] = backward(model, train_set.images[item],
                                      train_set.labels[item], opts,
                                      cfg.exact ? nullptr : &rng);
            });
            std::vector<double> mean_grad(Layout::total, 0.0);
            for (const BackwardResult& r : results) {
                for (std::size_t i = 0; i < Layout::total; ++i) {
                    mean_grad[i] += r.grad[i];
                }
                grad_execs_epoch += r.gradient_executions;
            }
            const double inv = 1.0 / static_cast<double>(bsz);
            for (double& v : mean_grad) {
                v *= inv;
            }
            adam.update(model.params(), mean_grad);
        }

        if (!cfg.exact) {
            // headline bucket: s_t per image, forward passes only
            ledger.record(epoch, s_t, static_cast<long long>(train_set.size()),
                          sched::ShotCategory::Forward);
            ledger.record(epoch, s_t, grad_execs_epoch, sched::ShotCategory::Gradient);
        }

        const EvalStats train_stats = evaluate_set(
            model, train_set, opts, cfg.seed, "eval-train", epoch, cfg.threads);
        const EvalStats test_stats = evaluate_set(
            model, test_set, opts, cfg.seed, "eval-test", epoch, cfg.threads);
        if (!cfg.exact) {
            ledger.record(epoch, s_t,
                          static_cast<long long>(train_set.size() + test_set.size()),
                          sched::ShotCategory::Evaluation);
        }

        MetricsRecord rec;
        rec.epoch = epoch;
        rec.train_loss = train_stats.loss;
        rec.test_loss = test_stats.loss;
        rec.train_acc = train_stats.acc;
        rec.test_acc = test_stats.acc;
        rec.shots_this_epoch = cfg.exact ? 0 : s_t;
        rec.cumulative_shots = ledger.cumulative(sched::ShotCategory::Forward);
        rec.grad_cumulative_shots = ledger.cumulative(sched::ShotCategory::Gradient);
        records.push_back(rec);
        if (on_epoch) {
            on_epoch(rec);
        }
    }
    return records;
}

}  // namespace qmlshots::hybrid
