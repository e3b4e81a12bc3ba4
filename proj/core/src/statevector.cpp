#include "qmlshots/statevector.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qmlshots::sim {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

constexpr cdouble kI{0.0, 1.0};

}  // namespace

StateVector::StateVector(int num_qubits) : num_qubits_(num_qubits) {
    if (num_qubits < 1 || num_qubits > kMaxQubits) {
        throw std::out_of_range("num_qubits must be in 1.." +
                                std::to_string(kMaxQubits));
    }
    amps_.assign(std::size_t{1} << num_qubits, cdouble{0.0, 0.0});
    amps_[0] = 1.0;
}

StateVector::StateVector(int num_qubits, std::vector<cdouble> amplitudes)
    : num_qubits_(num_qubits), amps_(std::move(amplitudes)) {
    if (num_qubits < 1 || num_qubits > kMaxQubits) {
        throw std::out_of_range("num_qubits must be in 1.." +
                                std::to_string(kMaxQubits));
    }
    if (amps_.size() != (std::size_t{1} << num_qubits)) {
        throw std::invalid_argument("amplitude count does not match 2^num_qubits");
    }
}

StateVector StateVector::zero_state(int num_qubits) {
    return StateVector(num_qubits);
}

StateVector StateVector::amplitude_embed(std::span<const double> features) {
    if (!is_power_of_two(features.size())) {
        throw std::invalid_argument("feature length must be a power of two");
    }
    double norm_sq = 0.0;
    for (const double f : features) {
        norm_sq += f * f;
    }
    const double norm = std::sqrt(norm_sq);
    if (norm <= 1e-12) {
        throw EmbeddingError("amplitude embedding input has (near-)zero norm");
    }
    int n = 0;
    while ((std::size_t{1} << n) < features.size()) {
        ++n;
    }
    std::vector<cdouble> amps(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        amps[i] = features[i] / norm;
    }
    return StateVector(n, std::move(amps));
}

double StateVector::norm() const {
    double s = 0.0;
    for (const cdouble& a : amps_) {
        s += std::norm(a);
    }
    return std::sqrt(s);
}

std::vector<double> StateVector::probabilities() const {
    std::vector<double> p(amps_.size());
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        p[i] = std::norm(amps_[i]);
    }
    return p;
}

int param_slot_count(GateKind kind) {
    switch (kind) {
        case GateKind::RX:
        case GateKind::RY:
        case GateKind::RZ:
        case GateKind::CRX:
        case GateKind::CRZ:
            return 1;
        case GateKind::Rot:
            return 3;
        default:
            return 0;
    }
}

const char* gate_name(GateKind kind) {
    switch (kind) {
        case GateKind::H: return "H";
        case GateKind::X: return "X";
        case GateKind::Y: return "Y";
        case GateKind::Z: return "Z";
        case GateKind::S: return "S";
        case GateKind::T: return "T";
        case GateKind::RX: return "RX";
        case GateKind::RY: return "RY";
        case GateKind::RZ: return "RZ";
        case GateKind::Rot: return "Rot";
        case GateKind::CNOT: return "CNOT";
        case GateKind::CRX: return "CRX";
        case GateKind::CRZ: return "CRZ";
    }
    return "?";
}

GateOp gate(GateKind kind, int target) {
    if (param_slot_count(kind) != 0 || kind == GateKind::CNOT) {
        throw std::invalid_argument("gate(kind, target) is for fixed 1-qubit gates");
    }
    return GateOp{kind, {target}, {}, {}};
}

GateOp gate(GateKind kind, int target, int param_slot) {
    if (param_slot_count(kind) != 1 || kind == GateKind::CRX || kind == GateKind::CRZ) {
        throw std::invalid_argument("expected an uncontrolled 1-parameter rotation");
    }
    return GateOp{kind, {target}, {}, {param_slot}};
}

GateOp cnot(int control, int target) {
    return GateOp{GateKind::CNOT, {target}, {control}, {}};
}

GateOp controlled_rotation(GateKind kind, int control, int target, int param_slot) {
    if (kind != GateKind::CRX && kind != GateKind::CRZ) {
        throw std::invalid_argument("controlled_rotation expects CRX or CRZ");
    }
    return GateOp{kind, {target}, {control}, {param_slot}};
}

GateOp rot(int target, int slot_a, int slot_b, int slot_c) {
    return GateOp{GateKind::Rot, {target}, {}, {slot_a, slot_b, slot_c}};
}

namespace {

Matrix2 matmul(const Matrix2& a, const Matrix2& b) {
    return Matrix2{{a.m[0] * b.m[0] + a.m[1] * b.m[2],
                    a.m[0] * b.m[1] + a.m[1] * b.m[3],
                    a.m[2] * b.m[0] + a.m[3] * b.m[2],
                    a.m[2] * b.m[1] + a.m[3] * b.m[3]}};
}

Matrix2 rx_matrix(double t) {
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    return Matrix2{{c, -kI * s, -kI * s, c}};
}

Matrix2 ry_matrix(double t) {
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    return Matrix2{{c, -s, s, c}};
}

Matrix2 rz_matrix(double t) {
    return Matrix2{{std::exp(-kI * (t / 2)), 0.0, 0.0, std::exp(kI * (t / 2))}};
}

// d/dt exp(-i t P/2) = (-i/2) P exp(-i t P/2)
Matrix2 pauli_times(const Matrix2& u, GateKind axis) {
    switch (axis) {
        case GateKind::RX:
        case GateKind::CRX:
            // X * u
            return Matrix2{{u.m[2], u.m[3], u.m[0], u.m[1]}};
        case GateKind::RZ:
        case GateKind::CRZ:
            return Matrix2{{u.m[0], u.m[1], -u.m[2], -u.m[3]}};
        default:  // RY
            return Matrix2{{-kI * u.m[2], -kI * u.m[3], kI * u.m[0], kI * u.m[1]}};
    }
}

Matrix2 scale(const Matrix2& u, cdouble f) {
    return Matrix2{{f * u.m[0], f * u.m[1], f * u.m[2], f * u.m[3]}};
}

double resolve_param(const GateOp& g, std::span<const double> params, int which) {
    const int slot = g.param_slots[which];
    if (slot < 0 || static_cast<std::size_t>(slot) >= params.size()) {
        throw std::invalid_argument(std::string("missing parameter slot for gate ") +
                                    gate_name(g.kind));
    }
    return params[slot];
}

}  // namespace

Matrix2 gate_matrix(const GateOp& g, std::span<const double> params) {
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    switch (g.kind) {
        case GateKind::H:
            return Matrix2{{inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2}};
        case GateKind::X:
        case GateKind::CNOT:
            return Matrix2{{0.0, 1.0, 1.0, 0.0}};
        case GateKind::Y:
            return Matrix2{{0.0, -kI, kI, 0.0}};
        case GateKind::Z:
            return Matrix2{{1.0, 0.0, 0.0, -1.0}};
        case GateKind::S:
            return Matrix2{{1.0, 0.0, 0.0, kI}};
        case GateKind::T:
            return Matrix2{{1.0, 0.0, 0.0, std::exp(kI * (std::numbers::pi / 4))}};
        case GateKind::RX:
        case GateKind::CRX:
            return rx_matrix(resolve_param(g, params, 0));
        case GateKind::RY:
            return ry_matrix(resolve_param(g, params, 0));
        case GateKind::RZ:
        case GateKind::CRZ:
            return rz_matrix(resolve_param(g, params, 0));
        case GateKind::Rot: {
            const double a = resolve_param(g, params, 0);
            const double b = resolve_param(g, params, 1);
            const double c = resolve_param(g, params, 2);
            // circuit order RZ(a), RY(b), RZ(c) -> matrix RZ(c)·RY(b)·RZ(a)
            return matmul(rz_matrix(c), matmul(ry_matrix(b), rz_matrix(a)));
        }
    }
    throw std::logic_error("unreachable gate kind");
}

Matrix2 adjoint(const Matrix2& u) {
    return Matrix2{{std::conj(u.m[0]), std::conj(u.m[2]),
                    std::conj(u.m[1]), std::conj(u.m[3])}};
}

Matrix2 gate_matrix_derivative(const GateOp& g, std::span<const double> params,
                               int which_slot) {
    switch (g.kind) {
        case GateKind::RX:
        case GateKind::CRX:
        case GateKind::RY:
        case GateKind::RZ:
        case GateKind::CRZ: {
            const Matrix2 u = gate_matrix(g, params);
            return scale(pauli_times(u, g.kind == GateKind::RY ? GateKind::RY : g.kind),
                         cdouble{0.0, -0.5});
        }
        case GateKind::Rot: {
            const double a = resolve_param(g, params, 0);
            const double b = resolve_param(g, params, 1);
            const double c = resolve_param(g, params, 2);
            const Matrix2 za = rz_matrix(a);
            const Matrix2 yb = ry_matrix(b);
            const Matrix2 zc = rz_matrix(c);
            const cdouble half_i{0.0, -0.5};
            if (which_slot == 0) {
                return matmul(zc, matmul(yb, scale(pauli_times(za, GateKind::RZ), half_i)));
            }
            if (which_slot == 1) {
                return matmul(zc, matmul(scale(pauli_times(yb, GateKind::RY), half_i), za));
            }
            if (which_slot == 2) {
                return matmul(scale(pauli_times(zc, GateKind::RZ), half_i), matmul(yb, za));
            }
            throw std::invalid_argument("Rot derivative slot must be 0..2");
        }
        default:
            throw std::invalid_argument(std::string("gate ") + gate_name(g.kind) +
                                        " has no parameters");
    }
}

namespace {

void check_indices(const StateVector& state, const GateOp& g) {
    const int n = state.num_qubits();
    for (const int t : g.targets) {
        if (t < 0 || t >= n) {
            throw std::out_of_range("gate target out of range");
        }
    }
    for (const int c : g.controls) {
        if (c < 0 || c >= n) {
            throw std::out_of_range("gate control out of range");
        }
        for (const int t : g.targets) {
            if (c == t) {
                throw std::invalid_argument("control and target qubits must be disjoint");
            }
        }
    }
}

// Applies a 2x2 block `u` on `g`'s target, restricted to the subspace where
// every control bit is 1. When `annihilate_rest` is set, amplitudes outside
// the control subspace are zeroed (derivative of a controlled gate).
void apply_block(StateVector& state, const GateOp& g, const Matrix2& u,
                 bool annihilate_rest) {
    check_indices(state, g);
    const int n = state.num_qubits();
    const int target = g.targets.at(0);
    const std::size_t dim = state.dim();
    const std::size_t tmask = std::size_t{1} << (n - 1 - target);

    std::size_t cmask = 0;
    for (const int c : g.controls) {
        cmask |= std::size_t{1} << (n - 1 - c);
    }

    auto amps = state.amplitudes();
    for (std::size_t i = 0; i < dim; ++i) {
        if (i & tmask) {
            continue;  // visit each (|0>,|1>) pair once via its |0> member
        }
        const std::size_t j = i | tmask;
        const bool active = (i & cmask) == cmask;
        if (!active) {
            if (annihilate_rest) {
                amps[i] = 0.0;
                amps[j] = 0.0;
            }
            continue;
        }
        const cdouble a0 = amps[i];
        const cdouble a1 = amps[j];
        amps[i] = u.m[0] * a0 + u.m[1] * a1;
        amps[j] = u.m[2] * a0 + u.m[3] * a1;
    }
}

}  // namespace

void apply_gate(StateVector& state, const GateOp& g, std::span<const double> params) {
    apply_block(state, g, gate_matrix(g, params), false);
}

void apply_gate_adjoint(StateVector& state, const GateOp& g,
                        std::span<const double> params) {
    apply_block(state, g, adjoint(gate_matrix(g, params)), false);
}

void apply_gate_derivative(StateVector& state, const GateOp& g,
                           std::span<const double> params, int which_slot) {
    apply_block(state, g, gate_matrix_derivative(g, params, which_slot),
                !g.controls.empty());
}

}  // namespace qmlshots::sim
