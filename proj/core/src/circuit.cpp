#include "qmlshots/circuit.hpp"

#include <stdexcept>
#include <string>

namespace qmlshots::ansatz {

void CircuitTemplate::validate() const {
    if (num_qubits < 1 || num_qubits > sim::kMaxQubits) {
        throw std::invalid_argument("num_qubits out of range");
    }
    std::vector<int> slot_uses(num_params, 0);
    for (const GateOp& g : gates) {
        if (static_cast<int>(g.param_slots.size()) != sim::param_slot_count(g.kind)) {
            throw std::invalid_argument(std::string("gate ") + sim::gate_name(g.kind) +
                                        " has wrong slot count");
        }
        for (const int t : g.targets) {
            if (t < 0 || t >= num_qubits) {
                throw std::invalid_argument("gate target out of range");
            }
        }
        for (const int c : g.controls) {
            if (c < 0 || c >= num_qubits) {
                throw std::invalid_argument("gate control out of range");
            }
        }
        for (const int s : g.param_slots) {
            if (s < 0 || s >= num_params) {
                throw std::invalid_argument("param slot out of range");
            }
            ++slot_uses[s];
        }
    }
    for (int s = 0; s < num_params; ++s) {
        if (slot_uses[s] == 0) {
            throw std::invalid_argument("param slot " + std::to_string(s) + " unused");
        }
    }
}

StateVector apply_circuit(const CircuitTemplate& tmpl, std::span<const double> params,
                          const StateVector& input) {
    if (static_cast<int>(params.size()) != tmpl.num_params) {
        throw std::invalid_argument("parameter vector length does not match template");
    }
    StateVector state = input;
    for (const GateOp& g : tmpl.gates) {
        sim::apply_gate(state, g, params);
    }
    return state;
}

CircuitTemplate build_qcnn_pqc() {
    CircuitTemplate tmpl;
    tmpl.num_qubits = 4;
    const int pairs[4][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
    int slot = 0;

    for (int layer = 0; layer < 3; ++layer) {
        // convolution ring: RY on each qubit of the pair, then CNOT
        for (const auto& pr : pairs) {
            tmpl.gates.push_back(sim::gate(GateKind::RY, pr[0], slot++));
            tmpl.gates.push_back(sim::gate(GateKind::RY, pr[1], slot++));
            tmpl.gates.push_back(sim::cnot(pr[0], pr[1]));
        }
        // pooling ring: CRZ, X on the control qubit, CRX
        for (const auto& pr : pairs) {
            tmpl.gates.push_back(sim::controlled_rotation(GateKind::CRZ, pr[1], pr[0], slot++));
            tmpl.gates.push_back(sim::gate(GateKind::X, pr[1]));
            tmpl.gates.push_back(sim::controlled_rotation(GateKind::CRX, pr[1], pr[0], slot++));
        }
    }
    // strongly entangling layers
    for (int layer = 0; layer < 3; ++layer) {
        for (int q = 0; q < 4; ++q) {
            tmpl.gates.push_back(sim::rot(q, slot, slot + 1, slot + 2));
            slot += 3;
        }
        for (int q = 0; q < 4; ++q) {
            tmpl.gates.push_back(sim::cnot(q, (q + 1) % 4));
        }
    }
    tmpl.num_params = slot;  // 3*(8+8) + 3*12 = 84
    tmpl.validate();
    return tmpl;
}

CircuitTemplate build_vqe_ansatz(int num_qubits, int layers) {
    if (num_qubits < 1 || num_qubits > sim::kMaxQubits) {
        throw std::invalid_argument("num_qubits must be in 1.." +
                                    std::to_string(sim::kMaxQubits));
    }
    if (layers < 1) {
        throw std::invalid_argument("layers must be >= 1");
    }
    CircuitTemplate tmpl;
    tmpl.num_qubits = num_qubits;
    int slot = 0;
    for (int layer = 0; layer < layers; ++layer) {
        for (int q = 0; q < num_qubits; ++q) {
            tmpl.gates.push_back(sim::gate(GateKind::RY, q, slot++));
            tmpl.gates.push_back(sim::gate(GateKind::RZ, q, slot++));
        }
        if (num_qubits > 1) {
            for (int q = 0; q < num_qubits; ++q) {
                tmpl.gates.push_back(sim::cnot(q, (q + 1) % num_qubits));
            }
        }
    }
    tmpl.num_params = slot;
    tmpl.validate();
    return tmpl;
}

}  // namespace qmlshots::ansatz
