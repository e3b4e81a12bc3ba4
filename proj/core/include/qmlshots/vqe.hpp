#pragma once

#include <optional>

#include "qmlshots/circuit.hpp"
#include "qmlshots/hamiltonian.hpp"
#include "qmlshots/hybrid.hpp"
#include "qmlshots/schedule.hpp"

namespace qmlshots::vqe {

// <psi(theta)|H|psi(theta)> from |0...0>, exact.
double energy_exact(const PauliHamiltonian& h, const ansatz::CircuitTemplate& tmpl,
                    std::span<const double> params);

struct EnergyEstimate {
    double energy = 0.0;
    long long shots_consumed = 0;
};

// Sampled estimate: the budget is split equally across non-identity terms
// (each receives max(1, floor(shots/terms))); X/Y letters are measured by
// basis-rotating a state copy (H for X, S-dagger then H for Y) before
// Z-sampling. Per-term randomness comes from substreams of `stream_key`.
EnergyEstimate energy_sampled(const PauliHamiltonian& h,
                              const ansatz::CircuitTemplate& tmpl,
                              std::span<const double> params, long long shots,
                              std::uint64_t stream_key);

struct TrajectoryPoint {
    long long iteration = 0;
    double energy = 0.0;          // Hartree (noisy estimate when sampled)
    sched::Shots shots_iter = 0;
    sched::Shots shots_cumulative = 0;  // objective-evaluation shots only
};

struct VqeRun {
    std::vector<TrajectoryPoint> trajectory;
    std::vector<double> final_params;
    double final_energy = 0.0;      // exact re-evaluation at final parameters
    double reference_energy = 0.0;
    double delta_e = 0.0;           // final_energy - reference_energy
};

struct VqeConfig {
    int layers = 3;
    sched::ShotSchedule schedule = sched::ShotSchedule::constant(1000);
    long long iterations = 100;
    bool exact = false;
    hybrid::AdamConfig adam{0.05, 0.9, 0.999, 1e-8};
    std::uint64_t seed = 0;
};

// Adam on the hardware-efficient ansatz. Iteration t spends shots_at(t) on
// the objective estimate recorded in the trajectory; parameter-shift
// evaluations also use shots_at(t) each and are ledgered under Gradient.
// The reference energy defaults to exact diagonalization (<= 14 qubits).
VqeRun vqe_optimize(const PauliHamiltonian& h, const VqeConfig& cfg,
                    sched::ShotLedger& ledger,
                    std::optional<double> reference_energy = std::nullopt);

}  // namespace qmlshots::vqe
