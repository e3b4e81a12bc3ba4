#include "qmlshots/gradient.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qmlshots::ansatz {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

bool is_four_term(GateKind kind) {
    return kind == GateKind::CRX || kind == GateKind::CRZ;
}

// slot -> owning gate index; throws when a slot is used more than once,
// because the plain shift rules assume a single occurrence.
std::vector<int> slot_owners(const CircuitTemplate& tmpl) {
    std::vector<int> owner(tmpl.num_params, -1);
    for (std::size_t gi = 0; gi < tmpl.gates.size(); ++gi) {
        for (const int s : tmpl.gates[gi].param_slots) {
            if (owner[s] != -1) {
                throw std::invalid_argument(
                    "parameter-shift requires each slot to feed a single gate");
            }
            owner[s] = static_cast<int>(gi);
        }
    }
    return owner;
}

double inner_real(const StateVector& a, const StateVector& b) {
    double acc = 0.0;
    const auto pa = a.amplitudes();
    const auto pb = b.amplitudes();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        acc += (std::conj(pa[i]) * pb[i]).real();
    }
    return acc;
}

}  // namespace

ShiftRuleCounts shift_rule_counts(const CircuitTemplate& tmpl) {
    ShiftRuleCounts c;
    for (const GateOp& g : tmpl.gates) {
        const int slots = static_cast<int>(g.param_slots.size());
        if (slots == 0) {
            continue;
        }
        if (is_four_term(g.kind)) {
            c.four_term += slots;
        } else {
            c.two_term += slots;
        }
    }
    return c;
}

EvalResult evaluate(const CircuitTemplate& tmpl, std::span<const double> params,
                    const StateVector& input,
                    const std::vector<PauliString>& observables,
                    const GradientBackend& backend, RngStream* rng) {
    const StateVector out = apply_circuit(tmpl, params, input);
    EvalResult result;
    if (backend.mode == GradientMode::ExactAdjoint) {
        result.values.reserve(observables.size());
        for (const PauliString& p : observables) {
            result.values.push_back(sim::expectation_exact(out, p));
        }
        return result;
    }
    if (backend.shots_per_evaluation < 1) {
        throw std::invalid_argument("sampled evaluation needs shots_per_evaluation >= 1");
    }
    if (rng == nullptr) {
        throw std::invalid_argument("sampled evaluation needs an rng stream");
    }
    result.values = sim::expectation_sampled_diagonal(
        out, observables, backend.shots_per_evaluation, *rng);
    result.shots_consumed = backend.shots_per_evaluation;
    return result;
}

AdjointResult adjoint_gradient(const CircuitTemplate& tmpl,
                               std::span<const double> params,
                               const StateVector& input, const Observable& obs) {
    if (static_cast<int>(params.size()) != tmpl.num_params) {
        throw std::invalid_argument("parameter vector length does not match template");
    }
    StateVector phi = apply_circuit(tmpl, params, input);
    StateVector lambda = sim::apply_observable(obs, phi);

    std::vector<double> grad(tmpl.num_params, 0.0);
    for (auto it = tmpl.gates.rbegin(); it != tmpl.gates.rend(); ++it) {
        const GateOp& g = *it;
        sim::apply_gate_adjoint(phi, g, params);  // phi is now the pre-gate state
        for (std::size_t which = 0; which < g.param_slots.size(); ++which) {
            StateVector mu = phi;
            sim::apply_gate_derivative(mu, g, params, static_cast<int>(which));
            grad[g.param_slots[which]] += 2.0 * inner_real(lambda, mu);
        }
        sim::apply_gate_adjoint(lambda, g, params);
    }
    return AdjointResult{std::move(grad), std::move(lambda)};
}

std::vector<double> feature_gradient(const CircuitTemplate& tmpl,
                                     std::span<const double> params,
                                     std::span<const double> features,
                                     const Observable& obs) {
    const StateVector embedded = StateVector::amplitude_embed(features);
    const AdjointResult adj = adjoint_gradient(tmpl, params, embedded, obs);

    // dE/da_i = 2 Re[(U^dagger O U a)_i] for real amplitudes a, then chain
    // through a = x / ||x||: dE/dx = (g - (a . g) a) / ||x||.
    const auto lam = adj.back_propagated.amplitudes();
    std::vector<double> g_amp(lam.size());
    for (std::size_t i = 0; i < lam.size(); ++i) {
        g_amp[i] = 2.0 * lam[i].real();
    }
    double norm_sq = 0.0;
    for (const double f : features) {
        norm_sq += f * f;
    }
    const double norm = std::sqrt(norm_sq);
    const auto a = embedded.amplitudes();
    double dot = 0.0;
    for (std::size_t i = 0; i < g_amp.size(); ++i) {
        dot += a[i].real() * g_amp[i];
    }
    std::vector<double> out(g_amp.size());
    for (std::size_t i = 0; i < g_amp.size(); ++i) {
        out[i] = (g_amp[i] - dot * a[i].real()) / norm;
    }
    return out;
}

std::vector<std::vector<double>> parameter_shift_jacobian(
    const CircuitTemplate& tmpl, std::span<const double> params,
    std::size_t num_outputs, const ShiftEvalFn& eval) {
    const std::vector<int> owner = slot_owners(tmpl);
    std::vector<double> shifted(params.begin(), params.end());
    std::vector<std::vector<double>> jac(
        num_outputs, std::vector<double>(tmpl.num_params, 0.0));

    auto eval_at = [&](int slot, double delta) {
        shifted[slot] = params[slot] + delta;
        std::vector<double> v = eval(shifted);
        shifted[slot] = params[slot];
        if (v.size() != num_outputs) {
            throw std::logic_error("shift evaluation returned wrong output count");
        }
        return v;
    };

    for (int slot = 0; slot < tmpl.num_params; ++slot) {
        const GateOp& g = tmpl.gates[owner[slot]];
        if (!is_four_term(g.kind)) {
            const std::vector<double> plus = eval_at(slot, kHalfPi);
            const std::vector<double> minus = eval_at(slot, -kHalfPi);
            for (std::size_t o = 0; o < num_outputs; ++o) {
                jac[o][slot] = (plus[o] - minus[o]) / 2.0;
            }
        } else {
            // four-term rule for controlled rotations
            const double sqrt2 = std::numbers::sqrt2;
            const double c_plus = (sqrt2 + 1.0) / (4.0 * sqrt2);
            const double c_minus = (sqrt2 - 1.0) / (4.0 * sqrt2);
            const std::vector<double> p1 = eval_at(slot, kHalfPi);
            const std::vector<double> m1 = eval_at(slot, -kHalfPi);
            const std::vector<double> p3 = eval_at(slot, 3.0 * kHalfPi);
            const std::vector<double> m3 = eval_at(slot, -3.0 * kHalfPi);
            for (std::size_t o = 0; o < num_outputs; ++o) {
                jac[o][slot] = c_plus * (p1[o] - m1[o]) - c_minus * (p3[o] - m3[o]);
            }
        }
    }
    return jac;
}

GradientResult gradient(const CircuitTemplate& tmpl, std::span<const double> params,
                        const StateVector& input,
                        const std::vector<PauliString>& observables,
                        const GradientBackend& backend, RngStream* rng) {
    GradientResult result;
    if (backend.mode == GradientMode::ExactAdjoint) {
        result.jacobian.reserve(observables.size());
        for (const PauliString& p : observables) {
            Observable single{{1.0, p}};
            result.jacobian.push_back(
                adjoint_gradient(tmpl, params, input, single).param_grad);
        }
        return result;
    }
    long long consumed = 0;
    const auto eval_fn = [&](std::span<const double> shifted) {
        EvalResult e = evaluate(tmpl, shifted, input, observables, backend, rng);
        consumed += e.shots_consumed;
        return e.values;
    };
    result.jacobian =
        parameter_shift_jacobian(tmpl, params, observables.size(), eval_fn);
    result.shots_consumed = consumed;
    return result;
}

}  // namespace qmlshots::ansatz
