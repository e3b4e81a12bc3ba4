#pragma once

#include <span>
#include <vector>

#include "qmlshots/pauli.hpp"
#include "qmlshots/statevector.hpp"

namespace qmlshots::ansatz {

using sim::GateKind;
using sim::GateOp;
using sim::Observable;
using sim::PauliString;
using sim::StateVector;

// Ordered parametric gate list. Immutable after validate(); parameter slots
// must be contiguous 0..num_params-1 and each used by at least one gate.
struct CircuitTemplate {
    int num_qubits = 0;
    std::vector<GateOp> gates;
    int num_params = 0;

    // Throws std::invalid_argument on any structural violation.
    void validate() const;
};

// Runs the circuit on a copy of the input state.
StateVector apply_circuit(const CircuitTemplate& tmpl, std::span<const double> params,
                          const StateVector& input);

// The 4-qubit / 84-parameter image-branch circuit: 3 rings of
// (convolution pairs, pooling pairs) over (0,1),(1,2),(2,3),(3,0) followed by
// 3 strongly entangling layers (per-qubit Rot + CNOT ring).
CircuitTemplate build_qcnn_pqc();

// Hardware-efficient layers: RY + RZ on every qubit, then a CNOT ring
// (omitted for a single qubit). num_params = 2 * num_qubits * layers.
CircuitTemplate build_vqe_ansatz(int num_qubits, int layers);

}  // namespace qmlshots::ansatz
