#include <benchmark/benchmark.h>

#include "qmlshots/circuit.hpp"
#include "qmlshots/gradient.hpp"
#include "qmlshots/hybrid.hpp"
#include "qmlshots/rng.hpp"

namespace {

using namespace qmlshots;

std::vector<double> random_params(int n, std::uint64_t seed) {
    RngStream rng = derive_stream(seed, "bench");
    std::vector<double> p(n);
    for (double& v : p) {
        v = rng.normal();
    }
    return p;
}

void BM_ApplyQcnnCircuit(benchmark::State& state) {
    const auto tmpl = ansatz::build_qcnn_pqc();
    const auto params = random_params(tmpl.num_params, 1);
    const auto input = sim::StateVector::zero_state(4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ansatz::apply_circuit(tmpl, params, input));
    }
}
BENCHMARK(BM_ApplyQcnnCircuit);

void BM_SampleCounts(benchmark::State& state) {
    const auto tmpl = ansatz::build_qcnn_pqc();
    const auto params = random_params(tmpl.num_params, 2);
    const auto sv = ansatz::apply_circuit(tmpl, params, sim::StateVector::zero_state(4));
    RngStream rng = derive_stream(3, "bench-sample");
    for (auto _ : state) {
        benchmark::DoNotOptimize(sim::sample_counts(sv, state.range(0), rng));
    }
}
BENCHMARK(BM_SampleCounts)->Arg(100)->Arg(1000);

void BM_AdjointGradientQcnn(benchmark::State& state) {
    const auto tmpl = ansatz::build_qcnn_pqc();
    const auto params = random_params(tmpl.num_params, 4);
    const auto input = sim::StateVector::zero_state(4);
    sim::Observable obs{{1.0, sim::PauliString::single_z(0, 4)}};
    for (auto _ : state) {
        benchmark::DoNotOptimize(ansatz::adjoint_gradient(tmpl, params, input, obs));
    }
}
BENCHMARK(BM_AdjointGradientQcnn);

void BM_HybridForwardExact(benchmark::State& state) {
    const auto model = hybrid::HybridModel::init(5);
    RngStream rng = derive_stream(6, "bench-image");
    std::vector<float> image(hybrid::Layout::fc1_in);
    for (float& px : image) {
        px = static_cast<float>(rng.uniform());
    }
    const hybrid::ForwardOptions opts{true, 0, false};
    for (auto _ : state) {
        benchmark::DoNotOptimize(hybrid::forward(model, image, opts));
    }
}
BENCHMARK(BM_HybridForwardExact);

}  // namespace

BENCHMARK_MAIN();
