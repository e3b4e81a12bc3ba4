#pragma once

#include <functional>
#include <span>
#include <vector>

#include "qmlshots/circuit.hpp"
#include "qmlshots/rng.hpp"

namespace qmlshots::ansatz {

enum class GradientMode { ExactAdjoint, SampledParamShift };

struct GradientBackend {
    GradientMode mode = GradientMode::ExactAdjoint;
    long long shots_per_evaluation = 0;  // SampledParamShift only, >= 1
};

struct EvalResult {
    std::vector<double> values;   // one per observable
    long long shots_consumed = 0;
};

// Expectation of each observable after running the circuit. Exact mode uses
// the statevector directly; sampled mode draws ONE shared shot set per call
// (observables must be diagonal) and consumes shots_per_evaluation shots.
EvalResult evaluate(const CircuitTemplate& tmpl, std::span<const double> params,
                    const StateVector& input,
                    const std::vector<PauliString>& observables,
                    const GradientBackend& backend, RngStream* rng = nullptr);

struct GradientResult {
    // jacobian[i][k] = d<obs_i>/d(theta_k)
    std::vector<std::vector<double>> jacobian;
    long long shots_consumed = 0;
};

// d<obs>/d(theta) for every parameter. ExactAdjoint walks the statevector
// backwards; SampledParamShift uses the two-term rule for RX/RY/RZ/Rot slots
// and the four-term rule for CRX/CRZ slots, with shots_per_evaluation shots
// per shifted circuit evaluation.
GradientResult gradient(const CircuitTemplate& tmpl, std::span<const double> params,
                        const StateVector& input,
                        const std::vector<PauliString>& observables,
                        const GradientBackend& backend, RngStream* rng = nullptr);

// Adjoint-differentiation pass for a weighted Pauli-sum observable.
// param_grad[k] = d<O>/d(theta_k); `back_propagated` is U^dagger O U |input>,
// so the derivative with respect to a real input amplitude a_i is
// 2*Re(back_propagated[i]).
struct AdjointResult {
    std::vector<double> param_grad;
    StateVector back_propagated;
};

AdjointResult adjoint_gradient(const CircuitTemplate& tmpl,
                               std::span<const double> params,
                               const StateVector& input, const Observable& obs);

// d<O>/d(features) through amplitude embedding (x -> x/||x|| -> circuit),
// with respect to the pre-normalization features. Always exact.
std::vector<double> feature_gradient(const CircuitTemplate& tmpl,
                                     std::span<const double> params,
                                     std::span<const double> features,
                                     const Observable& obs);

// Parameter-shift rule over an arbitrary multi-output evaluation functor
// (used by the VQE objective, whose evaluation does its own basis rotation).
// `eval` is called at shifted parameter vectors; rule selection follows the
// template's gate kinds. Throws if a slot is shared by multiple gates.
using ShiftEvalFn =
    std::function<std::vector<double>(std::span<const double> params)>;
std::vector<std::vector<double>> parameter_shift_jacobian(
    const CircuitTemplate& tmpl, std::span<const double> params,
    std::size_t num_outputs, const ShiftEvalFn& eval);

// Parameter counts by shift rule: first = two-term slots, second = four-term
// slots. A sampled gradient consumes (2*two + 4*four) * shots_per_evaluation.
struct ShiftRuleCounts {
    int two_term = 0;
    int four_term = 0;
};
ShiftRuleCounts shift_rule_counts(const CircuitTemplate& tmpl);

}  // namespace qmlshots::ansatz
