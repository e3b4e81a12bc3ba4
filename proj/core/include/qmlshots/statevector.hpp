#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace qmlshots::sim {

using cdouble = std::complex<double>;

constexpr int kMaxQubits = 16;

// Dense amplitude vector for up to kMaxQubits qubits. Qubit 0 is the most
// significant bit of the basis index, so |q0 q1 ... q_{n-1}> maps to index
// (q0 << (n-1)) | ... | q_{n-1}.
class StateVector {
  public:
    explicit StateVector(int num_qubits);
    StateVector(int num_qubits, std::vector<cdouble> amplitudes);

    // |00...0>
    static StateVector zero_state(int num_qubits);

    // Normalizes a real feature vector of length 2^n into amplitudes.
    // Throws std::invalid_argument for non-power-of-two lengths and
    // EmbeddingError for inputs with L2 norm <= 1e-12.
    static StateVector amplitude_embed(std::span<const double> features);

    int num_qubits() const { return num_qubits_; }
    std::size_t dim() const { return amps_.size(); }

    std::span<const cdouble> amplitudes() const { return amps_; }
    std::span<cdouble> amplitudes() { return amps_; }
    const cdouble& operator[](std::size_t i) const { return amps_[i]; }
    cdouble& operator[](std::size_t i) { return amps_[i]; }

    double norm() const;

    // Bit of qubit q in basis index i (qubit 0 = MSB).
    int bit(std::size_t index, int qubit) const {
        return static_cast<int>((index >> (num_qubits_ - 1 - qubit)) & 1u);
    }

    // Probability distribution |amplitudes|^2.
    std::vector<double> probabilities() const;

  private:
    int num_qubits_;
    std::vector<cdouble> amps_;
};

struct EmbeddingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class GateKind { H, X, Y, Z, S, T, RX, RY, RZ, Rot, CNOT, CRX, CRZ };

// Number of parameter slots a gate kind carries (0, 1 or 3).
int param_slot_count(GateKind kind);
const char* gate_name(GateKind kind);

// One gate in a circuit. Conventions:
//   RX(t) = [[cos t/2, -i sin t/2], [-i sin t/2, cos t/2]]
//   RY(t) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]]
//   RZ(t) = diag(e^{-it/2}, e^{it/2})
//   Rot(a,b,c) applies RZ(a), then RY(b), then RZ(c) in circuit order.
//   CNOT is X on `target` controlled on `controls[0]`; CRX/CRZ likewise.
struct GateOp {
    GateKind kind;
    std::vector<int> targets;
    std::vector<int> controls;     // empty for uncontrolled gates
    std::vector<int> param_slots;  // indices into a parameter vector
};

GateOp gate(GateKind kind, int target);
GateOp gate(GateKind kind, int target, int param_slot);
GateOp cnot(int control, int target);
GateOp controlled_rotation(GateKind kind, int control, int target, int param_slot);
GateOp rot(int target, int slot_a, int slot_b, int slot_c);

// 2x2 unitary acting on the gate's target (the target block for controlled
// gates), resolved from the parameter vector. Row-major: m[0]=m00, m[1]=m01,
// m[2]=m10, m[3]=m11.
struct Matrix2 {
    cdouble m[4];
};

Matrix2 gate_matrix(const GateOp& g, std::span<const double> params);
Matrix2 adjoint(const Matrix2& m);

// d(target block)/d(theta_k) for the k-th parameter slot of the gate.
Matrix2 gate_matrix_derivative(const GateOp& g, std::span<const double> params,
                               int which_slot);

// Applies the gate in place. Controlled gates act on the subspace where all
// control qubits are 1. Throws std::out_of_range for bad indices and
// std::invalid_argument when params does not cover a slot.
void apply_gate(StateVector& state, const GateOp& g, std::span<const double> params);

// Applies the gate's adjoint in place.
void apply_gate_adjoint(StateVector& state, const GateOp& g,
                        std::span<const double> params);

// Applies dU/dtheta for one slot. For controlled rotations this annihilates
// the control=0 subspace. The result is not a unitary image of the input.
void apply_gate_derivative(StateVector& state, const GateOp& g,
                           std::span<const double> params, int which_slot);

}  // namespace qmlshots::sim
