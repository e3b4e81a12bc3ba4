#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qmlshots/pauli.hpp"

namespace qmlshots::vqe {

// Weighted Pauli-string sum for ground-state estimation. Terms with equal
// strings are merged at load time; term order is the (deduplicated) file
// order.
struct PauliHamiltonian {
    int num_qubits = 0;
    sim::Observable terms;
    std::string name;

    // Sum of |c_i| over non-identity terms; bounds the sampled-estimate
    // standard deviation.
    double coefficient_l1() const;

    void validate() const;
};

// Parses `{"num_qubits": n, "terms": [{"coeff": c, "pauli": "ZZI..."}]}`.
// Malformed strings, length mismatches, and non-finite coefficients are
// rejected.
PauliHamiltonian load_hamiltonian(const std::filesystem::path& path);
PauliHamiltonian parse_hamiltonian(const std::string& json_text,
                                   const std::string& name);

// Minimum eigenvalue of the dense Hermitian matrix sum_i c_i P_i.
// Dense diagonalization; limited to 14 qubits. Beyond that, supply a
// reference energy in the run config instead.
double exact_ground_energy(const PauliHamiltonian& h);

}  // namespace qmlshots::vqe
