#pragma once

#include <map>
#include <string>
#include <vector>

#include "qmlshots/rng.hpp"
#include "qmlshots/statevector.hpp"

namespace qmlshots::sim {

// Tensor product of single-qubit Paulis, one letter in {I,X,Y,Z} per qubit,
// index 0 first (matching the MSB-first qubit ordering).
class PauliString {
  public:
    explicit PauliString(std::string ops);

    // Z on one qubit, identity elsewhere.
    static PauliString single_z(int qubit, int num_qubits);

    const std::string& ops() const { return ops_; }
    int num_qubits() const { return static_cast<int>(ops_.size()); }
    bool is_identity() const;
    bool is_diagonal() const;  // only I/Z letters

    bool operator==(const PauliString& other) const { return ops_ == other.ops_; }
    bool operator<(const PauliString& other) const { return ops_ < other.ops_; }

  private:
    std::string ops_;
};

struct PauliTerm {
    double coeff;
    PauliString pauli;
};

// Weighted Pauli sum, usable as a measurement observable.
using Observable = std::vector<PauliTerm>;

// P|psi> for a single Pauli string.
StateVector apply_pauli(const PauliString& p, const StateVector& state);

// (sum_i c_i P_i)|psi>.
StateVector apply_observable(const Observable& obs, const StateVector& state);

// <psi|P|psi>, real, in [-1, 1]. Throws std::invalid_argument on length
// mismatch.
double expectation_exact(const StateVector& state, const PauliString& p);

double expectation_exact(const StateVector& state, const Observable& obs);

// Result of `shots` projective measurements in the computational basis.
struct ShotOutcome {
    std::map<std::size_t, long long> counts;  // basis index -> occurrences
    long long shots = 0;
};

// `shots` i.i.d. draws from |amplitudes|^2. Deterministic given the rng
// stream position. Throws std::invalid_argument when shots < 1.
ShotOutcome sample_counts(const StateVector& state, long long shots, RngStream& rng);

// Estimates <Z_q> for every requested qubit from ONE shared set of `shots`
// basis-state samples (computational-basis Z observables commute, so a single
// circuit execution reads them all out, matching hardware semantics).
std::vector<double> expectation_sampled_z(const StateVector& state,
                                          const std::vector<int>& qubits,
                                          long long shots, RngStream& rng);

// Same shared-sample estimate for a set of diagonal (I/Z-only) Pauli strings.
std::vector<double> expectation_sampled_diagonal(const StateVector& state,
                                                 const std::vector<PauliString>& obs,
                                                 long long shots, RngStream& rng);

// (-1)^(number of set bits of `index` at the Z positions of `p`).
double diagonal_eigenvalue(const PauliString& p, std::size_t index);

}  // namespace qmlshots::sim
