#include "qmlshots/vqe.hpp"

#include <cmath>
#include <stdexcept>

#include "qmlshots/gradient.hpp"

namespace qmlshots::vqe {

namespace {

using ansatz::CircuitTemplate;
using sim::GateKind;
using sim::PauliString;
using sim::StateVector;

// Rotates `state` so that `term` becomes diagonal: H for X, S-dagger then H
// for Y. Returns the equivalent I/Z string.
PauliString rotate_to_diagonal(StateVector& state, const PauliString& term,
                               std::span<const double> no_params) {
    std::string diag = term.ops();
    const int n = term.num_qubits();
    for (int q = 0; q < n; ++q) {
        const char op = term.ops()[q];
        if (op == 'X') {
            sim::apply_gate(state, sim::gate(GateKind::H, q), no_params);
            diag[q] = 'Z';
        } else if (op == 'Y') {
            const sim::GateOp sdg = sim::gate(GateKind::S, q);
            sim::apply_gate_adjoint(state, sdg, no_params);
            sim::apply_gate(state, sim::gate(GateKind::H, q), no_params);
            diag[q] = 'Z';
        }
    }
    return PauliString(std::move(diag));
}

}  // namespace

double energy_exact(const PauliHamiltonian& h, const CircuitTemplate& tmpl,
                    std::span<const double> params) {
    if (tmpl.num_qubits != h.num_qubits) {
        throw std::invalid_argument("ansatz qubit count does not match Hamiltonian");
    }
    const StateVector state =
        ansatz::apply_circuit(tmpl, params, StateVector::zero_state(h.num_qubits));
    return sim::expectation_exact(state, h.terms);
}

EnergyEstimate energy_sampled(const PauliHamiltonian& h, const CircuitTemplate& tmpl,
                              std::span<const double> params, long long shots,
                              std::uint64_t stream_key) {
    if (tmpl.num_qubits != h.num_qubits) {
        throw std::invalid_argument("ansatz qubit count does not match Hamiltonian");
    }
    if (shots < 1) {
        throw std::invalid_argument("shots must be >= 1");
    }
    const StateVector state =
        ansatz::apply_circuit(tmpl, params, StateVector::zero_state(h.num_qubits));

    long long sampled_terms = 0;
    for (const sim::PauliTerm& term : h.terms) {
        if (!term.pauli.is_identity()) {
            ++sampled_terms;
        }
    }

    EnergyEstimate est;
    if (sampled_terms == 0) {
        for (const sim::PauliTerm& term : h.terms) {
            est.energy += term.coeff;
        }
        return est;
    }
    const long long per_term = std::max<long long>(1, shots / sampled_terms);

    std::size_t term_index = 0;
    for (const sim::PauliTerm& term : h.terms) {
        if (term.pauli.is_identity()) {
            est.energy += term.coeff;
            continue;
        }
        StateVector rotated = state;
        const PauliString diag =
            rotate_to_diagonal(rotated, term.pauli, std::span<const double>{});
        RngStream rng(derive_key(stream_key, "term", term_index));
        const std::vector<double> v =
            sim::expectation_sampled_diagonal(rotated, {diag}, per_term, rng);
        est.energy += term.coeff * v[0];
        est.shots_consumed += per_term;
        ++term_index;
    }
    return est;
}

VqeRun vqe_optimize(const PauliHamiltonian& h, const VqeConfig& cfg,
                    sched::ShotLedger& ledger,
                    std::optional<double> reference_energy) {
    if (cfg.iterations < 1) {
        throw std::invalid_argument("iterations must be >= 1");
    }
    cfg.schedule.validate();
    const CircuitTemplate tmpl = ansatz::build_vqe_ansatz(h.num_qubits, cfg.layers);

    // small-angle start: near |0...0>, which keeps the landscape benign
    RngStream init_rng = derive_stream(cfg.seed, "vqe-init");
    std::vector<double> params(tmpl.num_params);
    for (double& p : params) {
        p = 0.1 * init_rng.normal();
    }

    hybrid::Adam adam(params.size(), cfg.adam);
    const StateVector input = StateVector::zero_state(h.num_qubits);

    VqeRun run;
    run.trajectory.reserve(cfg.iterations);
    sched::Shots objective_cumulative = 0;

    for (long long iter = 1; iter <= cfg.iterations; ++iter) {
        const sched::Shots s_t = sched::shots_at(cfg.schedule, iter);

        TrajectoryPoint pt;
        pt.iteration = iter;
        if (cfg.exact) {
            pt.energy = energy_exact(h, tmpl, params);
            pt.shots_iter = 0;
        } else {
            const EnergyEstimate est = energy_sampled(
                h, tmpl, params, s_t, derive_key(cfg.seed, "vqe-obj", iter));
            pt.energy = est.energy;
            pt.shots_iter = s_t;  // the iteration's budget, as scheduled
            ledger.record(iter, s_t, 1, sched::ShotCategory::Forward);
        }
        objective_cumulative += pt.shots_iter;
        pt.shots_cumulative = objective_cumulative;
        run.trajectory.push_back(pt);

        std::vector<double> grad;
        if (cfg.exact) {
            grad = ansatz::adjoint_gradient(tmpl, params, input, h.terms).param_grad;
        } else {
            long long eval_counter = 0;
            const auto eval_fn = [&](std::span<const double> shifted) {
                const EnergyEstimate est = energy_sampled(
                    h, tmpl, shifted, s_t,
                    derive_key(cfg.seed, "vqe-grad",
                               static_cast<std::uint64_t>(iter), eval_counter));
                ++eval_counter;
                ledger.record(iter, s_t, 1, sched::ShotCategory::Gradient);
                return std::vector<double>{est.energy};
            };
            grad = ansatz::parameter_shift_jacobian(tmpl, params, 1, eval_fn)[0];
        }
        adam.update(params, grad);
    }

    run.final_params = params;
    run.final_energy = energy_exact(h, tmpl, params);
    run.reference_energy =
        reference_energy.has_value() ? *reference_energy : exact_ground_energy(h);
    run.delta_e = run.final_energy - run.reference_energy;
    return run;
}

}  // namespace qmlshots::vqe
