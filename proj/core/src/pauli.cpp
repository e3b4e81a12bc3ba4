#include "qmlshots/pauli.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace qmlshots::sim {

PauliString::PauliString(std::string ops) : ops_(std::move(ops)) {
    if (ops_.empty() || ops_.size() > kMaxQubits) {
        throw std::invalid_argument("Pauli string length must be in 1.." +
                                    std::to_string(kMaxQubits));
    }
    for (const char c : ops_) {
        if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
            throw std::invalid_argument(std::string("invalid Pauli letter '") + c + "'");
        }
    }
}

PauliString PauliString::single_z(int qubit, int num_qubits) {
    if (qubit < 0 || qubit >= num_qubits) {
        throw std::out_of_range("qubit index out of range");
    }
    std::string s(num_qubits, 'I');
    s[qubit] = 'Z';
    return PauliString(std::move(s));
}

bool PauliString::is_identity() const {
    return ops_.find_first_not_of('I') == std::string::npos;
}

bool PauliString::is_diagonal() const {
    return ops_.find_first_not_of("IZ") == std::string::npos;
}

namespace {

void check_length(const StateVector& state, const PauliString& p) {
    if (p.num_qubits() != state.num_qubits()) {
        throw std::invalid_argument("Pauli string length does not match qubit count");
    }
}

struct PauliMasks {
    std::size_t flip = 0;   // X and Y positions
    std::size_t z_like = 0; // Z and Y positions (sign-carrying)
    int y_count = 0;
};

PauliMasks masks_of(const PauliString& p) {
    PauliMasks m;
    const int n = p.num_qubits();
    for (int q = 0; q < n; ++q) {
        const std::size_t bit = std::size_t{1} << (n - 1 - q);
        switch (p.ops()[q]) {
            case 'X': m.flip |= bit; break;
            case 'Y': m.flip |= bit; m.z_like |= bit; ++m.y_count; break;
            case 'Z': m.z_like |= bit; break;
            default: break;
        }
    }
    return m;
}

}  // namespace

StateVector apply_pauli(const PauliString& p, const StateVector& state) {
    check_length(state, p);
    const PauliMasks m = masks_of(p);
    // Global factor from Y letters: Y = i * (phase-carrying flip), and each Y
    // contributes i * (-1)^bit via the z_like mask below.
    cdouble y_factor{1.0, 0.0};
    switch (m.y_count % 4) {
        case 0: y_factor = {1.0, 0.0}; break;
        case 1: y_factor = {0.0, 1.0}; break;
        case 2: y_factor = {-1.0, 0.0}; break;
        case 3: y_factor = {0.0, -1.0}; break;
    }
    std::vector<cdouble> out(state.dim());
    const auto amps = state.amplitudes();
    for (std::size_t i = 0; i < state.dim(); ++i) {
        const std::size_t j = i ^ m.flip;
        const int sign_bits = std::popcount(i & m.z_like);
        const double sign = (sign_bits & 1) ? -1.0 : 1.0;
        out[j] = y_factor * sign * amps[i];
    }
    return StateVector(state.num_qubits(), std::move(out));
}

StateVector apply_observable(const Observable& obs, const StateVector& state) {
    std::vector<cdouble> acc(state.dim(), cdouble{0.0, 0.0});
    for (const PauliTerm& term : obs) {
        const StateVector t = apply_pauli(term.pauli, state);
        const auto amps = t.amplitudes();
        for (std::size_t i = 0; i < acc.size(); ++i) {
            acc[i] += term.coeff * amps[i];
        }
    }
    return StateVector(state.num_qubits(), std::move(acc));
}

double expectation_exact(const StateVector& state, const PauliString& p) {
    check_length(state, p);
    if (p.is_diagonal()) {
        double e = 0.0;
        const auto amps = state.amplitudes();
        for (std::size_t i = 0; i < state.dim(); ++i) {
            e += diagonal_eigenvalue(p, i) * std::norm(amps[i]);
        }
        return e;
    }
    const StateVector pv = apply_pauli(p, state);
    cdouble e{0.0, 0.0};
    const auto a = state.amplitudes();
    const auto b = pv.amplitudes();
    for (std::size_t i = 0; i < state.dim(); ++i) {
        e += std::conj(a[i]) * b[i];
    }
    return e.real();
}

double expectation_exact(const StateVector& state, const Observable& obs) {
    double e = 0.0;
    for (const PauliTerm& term : obs) {
        e += term.coeff * expectation_exact(state, term.pauli);
    }
    return e;
}

double diagonal_eigenvalue(const PauliString& p, std::size_t index) {
    const int n = p.num_qubits();
    int bits = 0;
    for (int q = 0; q < n; ++q) {
        if (p.ops()[q] == 'Z') {
            bits += static_cast<int>((index >> (n - 1 - q)) & 1u);
        }
    }
    return (bits & 1) ? -1.0 : 1.0;
}

ShotOutcome sample_counts(const StateVector& state, long long shots, RngStream& rng) {
    if (shots < 1) {
        throw std::invalid_argument("shots must be >= 1 (clamp schedules upstream)");
    }
    // Inverse-CDF sampling on the cumulative distribution.
    std::vector<double> cdf(state.dim());
    double acc = 0.0;
    const auto amps = state.amplitudes();
    for (std::size_t i = 0; i < state.dim(); ++i) {
        acc += std::norm(amps[i]);
        cdf[i] = acc;
    }
    cdf.back() = 1.0;  // guard against rounding shortfall

    ShotOutcome out;
    out.shots = shots;
    for (long long s = 0; s < shots; ++s) {
        const double u = rng.uniform();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const std::size_t idx = static_cast<std::size_t>(it - cdf.begin());
        ++out.counts[std::min(idx, state.dim() - 1)];
    }
    return out;
}

std::vector<double> expectation_sampled_z(const StateVector& state,
                                          const std::vector<int>& qubits,
                                          long long shots, RngStream& rng) {
    const ShotOutcome outcome = sample_counts(state, shots, rng);
    const int n = state.num_qubits();
    std::vector<double> result(qubits.size(), 0.0);
    for (const auto& [index, count] : outcome.counts) {
        for (std::size_t k = 0; k < qubits.size(); ++k) {
            const int q = qubits[k];
            if (q < 0 || q >= n) {
                throw std::out_of_range("qubit index out of range");
            }
            const int bit = static_cast<int>((index >> (n - 1 - q)) & 1u);
            result[k] += (bit ? -1.0 : 1.0) * static_cast<double>(count);
        }
    }
    for (double& r : result) {
        r /= static_cast<double>(shots);
    }
    return result;
}

std::vector<double> expectation_sampled_diagonal(const StateVector& state,
                                                 const std::vector<PauliString>& obs,
                                                 long long shots, RngStream& rng) {
    for (const PauliString& p : obs) {
        check_length(state, p);
        if (!p.is_diagonal()) {
            throw std::invalid_argument(
                "shared-sample estimation requires diagonal (I/Z) observables");
        }
    }
    const ShotOutcome outcome = sample_counts(state, shots, rng);
    std::vector<double> result(obs.size(), 0.0);
    for (const auto& [index, count] : outcome.counts) {
        for (std::size_t k = 0; k < obs.size(); ++k) {
            result[k] += diagonal_eigenvalue(obs[k], index) * static_cast<double>(count);
        }
    }
    for (double& r : result) {
        r /= static_cast<double>(shots);
    }
    return result;
}

}  // namespace qmlshots::sim
