#include "qmlshots/hamiltonian.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qmlshots::vqe {

double PauliHamiltonian::coefficient_l1() const {
    double s = 0.0;
    for (const sim::PauliTerm& t : terms) {
        if (!t.pauli.is_identity()) {
            s += std::abs(t.coeff);
        }
    }
    return s;
}

void PauliHamiltonian::validate() const {
    if (num_qubits < 1 || num_qubits > sim::kMaxQubits) {
        throw std::invalid_argument("Hamiltonian qubit count out of range");
    }
    std::map<std::string, int> seen;
    for (const sim::PauliTerm& t : terms) {
        if (t.pauli.num_qubits() != num_qubits) {
            throw std::invalid_argument("Pauli string length does not match num_qubits");
        }
        if (!std::isfinite(t.coeff)) {
            throw std::invalid_argument("non-finite coefficient");
        }
        if (++seen[t.pauli.ops()] > 1) {
            throw std::invalid_argument("duplicate Pauli string after merge: " +
                                        t.pauli.ops());
        }
    }
}

PauliHamiltonian parse_hamiltonian(const std::string& json_text,
                                   const std::string& name) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("Hamiltonian JSON parse error: ") +
                                    e.what());
    }
    if (!j.contains("num_qubits") || !j.contains("terms")) {
        throw std::invalid_argument("Hamiltonian file needs num_qubits and terms");
    }
    PauliHamiltonian h;
    h.num_qubits = j.at("num_qubits").get<int>();
    h.name = j.value("name", name);

    // merge duplicates by coefficient summation, preserving first-seen order
    std::map<std::string, std::size_t> index;
    for (const auto& term : j.at("terms")) {
        const double coeff = term.at("coeff").get<double>();
        const std::string pauli = term.at("pauli").get<std::string>();
        if (static_cast<int>(pauli.size()) != h.num_qubits) {
            throw std::invalid_argument("Pauli string '" + pauli +
                                        "' length does not match num_qubits");
        }
        sim::PauliString p(pauli);  // validates letters
        if (!std::isfinite(coeff)) {
            throw std::invalid_argument("non-finite coefficient for '" + pauli + "'");
        }
        const auto it = index.find(pauli);
        if (it == index.end()) {
            index[pauli] = h.terms.size();
            h.terms.push_back({coeff, std::move(p)});
        } else {
            h.terms[it->second].coeff += coeff;
        }
    }
    h.validate();
    return h;
}

PauliHamiltonian load_hamiltonian(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open Hamiltonian file: " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_hamiltonian(text.str(), path.stem().string());
}

double exact_ground_energy(const PauliHamiltonian& h) {
    h.validate();
    if (h.num_qubits > 14) {
        throw std::invalid_argument(
            "dense diagonalization is limited to 14 qubits; supply a reference "
            "energy in the run config instead");
    }
    const std::size_t dim = std::size_t{1} << h.num_qubits;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    // column j of P maps |j> to phase * |j ^ flip>; build by applying each
    // term to basis vectors via the simulator's Pauli action
    for (const sim::PauliTerm& term : h.terms) {
        for (std::size_t col = 0; col < dim; ++col) {
            std::vector<sim::cdouble> basis(dim, sim::cdouble{0.0, 0.0});
            basis[col] = 1.0;
            const sim::StateVector pv =
                sim::apply_pauli(term.pauli, sim::StateVector(h.num_qubits, std::move(basis)));
            for (std::size_t row = 0; row < dim; ++row) {
                const sim::cdouble a = pv[row];
                if (a != sim::cdouble{0.0, 0.0}) {
                    m(row, col) += term.coeff * a;
                }
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m,
                                                           Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eigen decomposition failed");
    }
    return solver.eigenvalues()(0);
}

}  // namespace qmlshots::vqe
