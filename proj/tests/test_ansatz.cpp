#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "qmlshots/circuit.hpp"
#include "qmlshots/gradient.hpp"
#include "qmlshots/rng.hpp"

using namespace qmlshots;
using ansatz::CircuitTemplate;
using sim::cdouble;
using sim::GateKind;
using sim::GateOp;
using sim::PauliString;
using sim::StateVector;

namespace {

// Independent dense-matrix oracle: every gate is lifted to a full 2^n x 2^n
// matrix via explicit Kronecker products (qubit 0 leftmost / most significant)
// and multiplied into the state. Shares nothing with the production kernels.
using Mat = std::vector<std::vector<cdouble>>;

Mat identity(std::size_t d) {
    Mat m(d, std::vector<cdouble>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) {
        m[i][i] = 1.0;
    }
    return m;
}

Mat kron(const Mat& a, const Mat& b) {
    const std::size_t ra = a.size(), ca = a[0].size();
    const std::size_t rb = b.size(), cb = b[0].size();
    Mat m(ra * rb, std::vector<cdouble>(ca * cb, 0.0));
    for (std::size_t i = 0; i < ra; ++i) {
        for (std::size_t j = 0; j < ca; ++j) {
            for (std::size_t k = 0; k < rb; ++k) {
                for (std::size_t l = 0; l < cb; ++l) {
                    m[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    return m;
}

Mat mat2(cdouble a, cdouble b, cdouble c, cdouble d) {
    return {{a, b}, {c, d}};
}

Mat single_gate_matrix(GateKind kind, double theta) {
    const double h = theta / 2.0;
    const cdouble i{0.0, 1.0};
    switch (kind) {
        case GateKind::H: {
            const double s = 1.0 / std::sqrt(2.0);
            return mat2(s, s, s, -s);
        }
        case GateKind::X:
            return mat2(0, 1, 1, 0);
        case GateKind::Y:
            return mat2(0, -i, i, 0);
        case GateKind::Z:
            return mat2(1, 0, 0, -1);
        case GateKind::S:
            return mat2(1, 0, 0, i);
        case GateKind::T:
            return mat2(1, 0, 0, std::exp(i * (3.14159265358979323846 / 4.0)));
        case GateKind::RX:
            return mat2(std::cos(h), -i * std::sin(h), -i * std::sin(h), std::cos(h));
        case GateKind::RY:
            return mat2(std::cos(h), -std::sin(h), std::sin(h), std::cos(h));
        case GateKind::RZ:
        case GateKind::CRZ:
            return mat2(std::exp(-i * h), 0, 0, std::exp(i * h));
        case GateKind::CRX:
            return mat2(std::cos(h), -i * std::sin(h), -i * std::sin(h), std::cos(h));
        default:
            throw std::logic_error("not a single-qubit kind");
    }
}

Mat lift_single(int num_qubits, int qubit, const Mat& u) {
    Mat full = (qubit == 0) ? u : identity(2);
    if (qubit == 0) {
        for (int q = 1; q < num_qubits; ++q) {
            full = kron(full, identity(2));
        }
        return full;
    }
    for (int q = 1; q < num_qubits; ++q) {
        full = kron(full, q == qubit ? u : identity(2));
    }
    return full;
}

Mat lift_controlled(int num_qubits, int control, int target, const Mat& u) {
    const Mat p0 = mat2(1, 0, 0, 0);
    const Mat p1 = mat2(0, 0, 0, 1);
    Mat part0{{1.0}};
    Mat part1{{1.0}};
    for (int q = 0; q < num_qubits; ++q) {
        const Mat* f0;
        const Mat* f1;
        static const Mat id = identity(2);
        if (q == control) {
            f0 = &p0;
            f1 = &p1;
        } else if (q == target) {
            f0 = &id;
            f1 = &u;
        } else {
            f0 = &id;
            f1 = &id;
        }
        part0 = kron(part0, *f0);
        part1 = kron(part1, *f1);
    }
    Mat full = part0;
    for (std::size_t r = 0; r < full.size(); ++r) {
        for (std::size_t c = 0; c < full.size(); ++c) {
            full[r][c] += part1[r][c];
        }
    }
    return full;
}

std::vector<cdouble> matvec(const Mat& m, const std::vector<cdouble>& v) {
    std::vector<cdouble> out(m.size(), 0.0);
    for (std::size_t r = 0; r < m.size(); ++r) {
        for (std::size_t c = 0; c < v.size(); ++c) {
            out[r] += m[r][c] * v[c];
        }
    }
    return out;
}

std::vector<cdouble> oracle_run(const CircuitTemplate& tmpl,
                                const std::vector<double>& params,
                                std::vector<cdouble> state) {
    const int n = tmpl.num_qubits;
    for (const GateOp& g : tmpl.gates) {
        const auto slot_value = [&](std::size_t k) {
            return params[static_cast<std::size_t>(g.param_slots[k])];
        };
        switch (g.kind) {
            case GateKind::CNOT:
                state = matvec(
                    lift_controlled(n, g.controls[0], g.targets[0], mat2(0, 1, 1, 0)),
                    state);
                break;
            case GateKind::CRX:
            case GateKind::CRZ:
                state = matvec(lift_controlled(n, g.controls[0], g.targets[0],
                                               single_gate_matrix(g.kind, slot_value(0))),
                               state);
                break;
            case GateKind::Rot:
                // RZ(alpha), then RY(beta), then RZ(gamma) in circuit order.
                state = matvec(lift_single(n, g.targets[0],
                                           single_gate_matrix(GateKind::RZ, slot_value(0))),
                               state);
                state = matvec(lift_single(n, g.targets[0],
                                           single_gate_matrix(GateKind::RY, slot_value(1))),
                               state);
                state = matvec(lift_single(n, g.targets[0],
                                           single_gate_matrix(GateKind::RZ, slot_value(2))),
                               state);
                break;
            default: {
                const double theta =
                    g.param_slots.empty() ? 0.0 : slot_value(0);
                state = matvec(lift_single(n, g.targets[0],
                                           single_gate_matrix(g.kind, theta)),
                               state);
                break;
            }
        }
    }
    return state;
}

std::vector<double> random_params(int n, std::uint64_t seed) {
    RngStream rng = derive_stream(seed, "params");
    std::vector<double> p(n);
    for (double& v : p) {
        v = rng.normal();
    }
    return p;
}

}  // namespace

TEST_CASE("QCNN template structure") {
    const CircuitTemplate tmpl = ansatz::build_qcnn_pqc();
    CHECK(tmpl.num_qubits == 4);
    CHECK(tmpl.num_params == 84);
    CHECK_NOTHROW(tmpl.validate());
    int cnots = 0, crx = 0, crz = 0, rots = 0, rys = 0, xs = 0;
    for (const GateOp& g : tmpl.gates) {
        switch (g.kind) {
            case GateKind::CNOT: ++cnots; break;
            case GateKind::CRX: ++crx; break;
            case GateKind::CRZ: ++crz; break;
            case GateKind::Rot: ++rots; break;
            case GateKind::RY: ++rys; break;
            case GateKind::X: ++xs; break;
            default: break;
        }
    }
    // 3 rings of 4 conv pairs (1 CNOT each) + 3 entangling layers of 4 CNOTs.
    CHECK(cnots == 24);
    CHECK(crx == 12);
    CHECK(crz == 12);
    CHECK(xs == 12);
    CHECK(rys == 24);
    CHECK(rots == 12);
    // 24 RY + 12 CRZ + 12 CRX + 12 Rot*3 = 84 slots.
    const auto counts = ansatz::shift_rule_counts(tmpl);
    CHECK(counts.two_term == 60);
    CHECK(counts.four_term == 24);
}

TEST_CASE("VQE ansatz structure") {
    const CircuitTemplate t = ansatz::build_vqe_ansatz(3, 2);
    CHECK(t.num_params == 12);
    CHECK_NOTHROW(t.validate());
    const CircuitTemplate one = ansatz::build_vqe_ansatz(1, 2);
    int cnots = 0;
    for (const GateOp& g : one.gates) {
        if (g.kind == GateKind::CNOT) ++cnots;
    }
    CHECK(cnots == 0);
}

TEST_CASE("template validation rejects gaps and bad slots") {
    CircuitTemplate t;
    t.num_qubits = 2;
    t.num_params = 2;
    t.gates = {sim::gate(GateKind::RY, 0, 0)};  // slot 1 never used
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    t.num_params = 1;
    CHECK_NOTHROW(t.validate());
    t.gates.push_back(sim::gate(GateKind::RY, 0, 5));  // slot out of range
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}

TEST_CASE("apply_circuit matches the Kronecker-product oracle") {
    RngStream rng = derive_stream(77, "oracle-state");
    for (const bool vqe : {false, true}) {
        const CircuitTemplate tmpl =
            vqe ? ansatz::build_vqe_ansatz(4, 3) : ansatz::build_qcnn_pqc();
        const auto params = random_params(tmpl.num_params, vqe ? 11 : 12);
        std::vector<cdouble> init(16);
        double norm_sq = 0.0;
        for (auto& a : init) {
            a = cdouble{rng.normal(), rng.normal()};
            norm_sq += std::norm(a);
        }
        for (auto& a : init) {
            a /= std::sqrt(norm_sq);
        }
        const StateVector out =
            ansatz::apply_circuit(tmpl, params, StateVector(4, init));
        const auto expected = oracle_run(tmpl, params, init);
        for (std::size_t i = 0; i < 16; ++i) {
            CHECK(std::abs(out[i] - expected[i]) < 1e-10);
        }
    }
}

TEST_CASE("QCNN at zero parameters matches the oracle from |0000>") {
    const CircuitTemplate tmpl = ansatz::build_qcnn_pqc();
    const std::vector<double> zeros(tmpl.num_params, 0.0);
    std::vector<cdouble> init(16, 0.0);
    init[0] = 1.0;
    const StateVector out =
        ansatz::apply_circuit(tmpl, zeros, StateVector::zero_state(4));
    const auto expected = oracle_run(tmpl, zeros, init);
    for (std::size_t i = 0; i < 16; ++i) {
        CHECK(std::abs(out[i] - expected[i]) < 1e-12);
    }
}

TEST_CASE("analytic gradient: d<Z>/dtheta of RY(theta)|0> is -sin(theta)") {
    CircuitTemplate t;
    t.num_qubits = 1;
    t.num_params = 1;
    t.gates = {sim::gate(GateKind::RY, 0, 0)};
    const double theta = 0.731;
    const sim::Observable obs{{1.0, PauliString("Z")}};
    const auto res = ansatz::adjoint_gradient(t, std::vector<double>{theta},
                                              StateVector::zero_state(1), obs);
    CHECK(res.param_grad.size() == 1);
    CHECK(res.param_grad[0] == doctest::Approx(-std::sin(theta)).epsilon(1e-10));
}

TEST_CASE("adjoint gradient matches central finite differences on the QCNN") {
    const CircuitTemplate tmpl = ansatz::build_qcnn_pqc();
    const auto params = random_params(tmpl.num_params, 21);
    const StateVector input = StateVector::zero_state(4);
    const sim::Observable obs{{0.7, PauliString::single_z(0, 4)},
                              {-0.4, PauliString::single_z(2, 4)}};
    const auto res = ansatz::adjoint_gradient(tmpl, params, input, obs);

    const auto energy = [&](const std::vector<double>& p) {
        const StateVector out = ansatz::apply_circuit(tmpl, p, input);
        double e = 0.0;
        for (const auto& term : obs) {
            e += term.coeff * sim::expectation_exact(out, term.pauli);
        }
        return e;
    };
    const double h = 1e-5;
    for (int k = 0; k < tmpl.num_params; k += 7) {  // stride keeps runtime modest
        auto plus = params, minus = params;
        plus[k] += h;
        minus[k] -= h;
        const double fd = (energy(plus) - energy(minus)) / (2 * h);
        CHECK(res.param_grad[k] == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("exact parameter-shift equals the adjoint gradient to 1e-9") {
    for (const bool vqe : {false, true}) {
        const CircuitTemplate tmpl =
            vqe ? ansatz::build_vqe_ansatz(3, 2) : ansatz::build_qcnn_pqc();
        const auto params = random_params(tmpl.num_params, vqe ? 31 : 32);
        const StateVector input = StateVector::zero_state(tmpl.num_qubits);
        const PauliString z0 = PauliString::single_z(0, tmpl.num_qubits);
        const sim::Observable obs{{1.0, z0}};
        const auto adj = ansatz::adjoint_gradient(tmpl, params, input, obs);
        const auto shift = ansatz::parameter_shift_jacobian(
            tmpl, params, 1, [&](std::span<const double> p) {
                const StateVector out = ansatz::apply_circuit(tmpl, p, input);
                return std::vector<double>{sim::expectation_exact(out, z0)};
            });
        REQUIRE(shift.size() == 1);
        for (int k = 0; k < tmpl.num_params; ++k) {
            CHECK(std::abs(shift[0][k] - adj.param_grad[k]) < 1e-9);
        }
    }
}

TEST_CASE("sampled evaluation accounting and exact-mode equivalence") {
    const CircuitTemplate tmpl = ansatz::build_qcnn_pqc();
    const auto params = random_params(tmpl.num_params, 41);
    const StateVector input = StateVector::zero_state(4);
    const std::vector<PauliString> observables{
        PauliString::single_z(0, 4), PauliString::single_z(1, 4),
        PauliString::single_z(2, 4), PauliString::single_z(3, 4)};

    const ansatz::GradientBackend exact{ansatz::GradientMode::ExactAdjoint, 0};
    const auto er = ansatz::evaluate(tmpl, params, input, observables, exact);
    CHECK(er.shots_consumed == 0);
    CHECK(er.values.size() == 4);

    ansatz::GradientBackend sampled{ansatz::GradientMode::SampledParamShift, 250};
    RngStream rng = derive_stream(42, "eval");
    const auto sr = ansatz::evaluate(tmpl, params, input, observables, sampled, &rng);
    CHECK(sr.shots_consumed == 250);  // one shared shot set for all four
    for (int j = 0; j < 4; ++j) {
        CHECK(std::abs(sr.values[j] - er.values[j]) < 0.3);
    }
}

TEST_CASE("sampled gradient shot accounting: (2*n2 + 4*n4) * shots") {
    const CircuitTemplate tmpl = ansatz::build_qcnn_pqc();
    const auto params = random_params(tmpl.num_params, 51);
    ansatz::GradientBackend sampled{ansatz::GradientMode::SampledParamShift, 10};
    RngStream rng = derive_stream(52, "grad");
    const auto res =
        ansatz::gradient(tmpl, params, StateVector::zero_state(4),
                         {PauliString::single_z(0, 4)}, sampled, &rng);
    CHECK(res.shots_consumed == (2LL * 60 + 4LL * 24) * 10);
    CHECK(res.jacobian.size() == 1);
    CHECK(res.jacobian[0].size() == 84);
}

TEST_CASE("sampled gradient is unbiased on a one-qubit circuit") {
    CircuitTemplate t;
    t.num_qubits = 1;
    t.num_params = 1;
    t.gates = {sim::gate(GateKind::RY, 0, 0)};
    const std::vector<double> params{0.9};
    const double truth = -std::sin(0.9);
    ansatz::GradientBackend sampled{ansatz::GradientMode::SampledParamShift, 50};
    double mean = 0.0;
    const int seeds = 500;
    for (int s = 0; s < seeds; ++s) {
        RngStream rng = derive_stream(60, "unbiased", s);
        mean += ansatz::gradient(t, params, StateVector::zero_state(1),
                                 {PauliString("Z")}, sampled, &rng)
                    .jacobian[0][0];
    }
    mean /= seeds;
    // std of one estimate <= 1/sqrt(50) per shifted term; 4/sqrt(500*50) margin
    CHECK(std::abs(mean - truth) < 4.0 / std::sqrt(500.0 * 50.0) * 10);
    CHECK(std::abs(mean - truth) < 0.03);
}

TEST_CASE("zero-parameter template yields an empty gradient") {
    CircuitTemplate t;
    t.num_qubits = 1;
    t.num_params = 0;
    t.gates = {sim::gate(GateKind::H, 0)};
    const ansatz::GradientBackend exact{ansatz::GradientMode::ExactAdjoint, 0};
    const auto res = ansatz::gradient(t, {}, StateVector::zero_state(1),
                                      {PauliString("Z")}, exact);
    CHECK(res.jacobian[0].empty());
}

TEST_CASE("feature gradient matches finite differences through embedding") {
    const CircuitTemplate tmpl = ansatz::build_qcnn_pqc();
    const auto params = random_params(tmpl.num_params, 71);
    RngStream rng = derive_stream(72, "features");
    std::vector<double> features(16);
    for (double& f : features) {
        f = rng.uniform() + 0.1;
    }
    const sim::Observable obs{{1.0, PauliString::single_z(1, 4)}};
    const auto grad = ansatz::feature_gradient(tmpl, params, features, obs);
    REQUIRE(grad.size() == 16);

    const auto energy = [&](const std::vector<double>& x) {
        const StateVector embedded = StateVector::amplitude_embed(x);
        const StateVector out = ansatz::apply_circuit(tmpl, params, embedded);
        return sim::expectation_exact(out, obs[0].pauli);
    };
    const double h = 1e-6;
    for (int i = 0; i < 16; ++i) {
        auto plus = features, minus = features;
        plus[i] += h;
        minus[i] -= h;
        const double fd = (energy(plus) - energy(minus)) / (2 * h);
        CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-4));
    }
}
