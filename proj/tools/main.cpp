// qmlshots CLI: shot-scheduled training, shot sweeps, initialization-spread
// studies, and VQE ground-state runs, all emitting CSVs under --out.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qmlshots/harness.hpp"

namespace {

using qmlshots::harness::RunConfig;

struct CommonFlags {
    std::string config_path;
    std::string preset;
    std::string dataset, variant, data_dir, schedule, mode, out_dir;
    long long shots = 0, s_start = 0, slope = -1, delta = -1, period = 0, floor = 0;
    long long epochs = 0, split_seed = -1;
    long long seed = -1, num_seeds = 0;
    int batch_size = 0, threads = 0;
    double lr = -1.0;
    bool relu_after_fc2 = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON run config (CLI flags override)");
    cmd->add_option("--preset", f.preset, "Preset: smoke (60 images, 3 classes, 20 epochs)");
    cmd->add_option("--dataset", f.dataset, "mnist|fmnist|synthetic");
    cmd->add_option("--variant", f.variant, "short|full");
    cmd->add_option("--data-dir", f.data_dir, "IDX data directory (or QMLSHOTS_DATA_DIR)");
    cmd->add_option("--split-seed", f.split_seed, "Seed for the stratified subset");
    cmd->add_option("--schedule", f.schedule, "constant|linear|step");
    cmd->add_option("--shots", f.shots, "Constant-schedule shots");
    cmd->add_option("--s-start", f.s_start, "Linear/step starting shots");
    cmd->add_option("--slope", f.slope, "Linear slope (shots per epoch)");
    cmd->add_option("--delta", f.delta, "Step decrement");
    cmd->add_option("--period", f.period, "Step period (epochs)");
    cmd->add_option("--floor", f.floor, "Shot lower bound");
    cmd->add_option("--epochs", f.epochs, "Training epochs");
    cmd->add_option("--batch-size", f.batch_size, "Mini-batch size");
    cmd->add_option("--lr", f.lr, "Adam learning rate");
    cmd->add_option("--mode", f.mode, "exact|sampled gradient/measurement mode");
    cmd->add_option("--seed", f.seed, "Root seed");
    cmd->add_option("--seeds", f.num_seeds, "Seed count (init-spread)");
    cmd->add_option("--threads", f.threads, "Worker threads");
    cmd->add_option("--out", f.out_dir, "Output directory");
    cmd->add_flag("--relu-after-fc2", f.relu_after_fc2, "Extra ReLU after fc2");
}

RunConfig build_config(const CommonFlags& f, qmlshots::harness::Experiment exp) {
    RunConfig cfg;
    if (!f.config_path.empty()) {
        cfg = qmlshots::harness::load_config(f.config_path);
    }
    cfg.experiment = exp;
    if (f.preset == "smoke") {
        qmlshots::harness::apply_smoke_preset(cfg);
    } else if (!f.preset.empty()) {
        throw qmlshots::harness::ConfigError("unknown preset '" + f.preset + "'");
    }
    if (!f.dataset.empty()) cfg.dataset.name = f.dataset;
    if (!f.variant.empty()) cfg.dataset.variant = f.variant;
    if (!f.data_dir.empty()) cfg.dataset.data_dir = f.data_dir;
    if (f.split_seed >= 0) cfg.dataset.split_seed = static_cast<std::uint64_t>(f.split_seed);
    if (!f.schedule.empty()) {
        using qmlshots::sched::ShotSchedule;
        const long long s_start = f.s_start > 0 ? f.s_start : 1000;
        const long long floor = f.floor > 0 ? f.floor : 20;
        if (f.schedule == "constant") {
            cfg.schedule = ShotSchedule::constant(f.shots > 0 ? f.shots : 1000);
        } else if (f.schedule == "linear") {
            cfg.schedule = ShotSchedule::linear(s_start, f.slope >= 0 ? f.slope : 10, floor);
        } else if (f.schedule == "step") {
            cfg.schedule = ShotSchedule::step(s_start, f.delta >= 0 ? f.delta : 100,
                                              f.period > 0 ? f.period : 10, floor);
        } else {
            throw qmlshots::harness::ConfigError("--schedule must be constant|linear|step");
        }
    } else if (f.shots > 0) {
        cfg.schedule = qmlshots::sched::ShotSchedule::constant(f.shots);
    }
    if (f.epochs > 0) cfg.epochs = f.epochs;
    if (f.batch_size > 0) cfg.batch_size = f.batch_size;
    if (f.lr > 0) cfg.adam.lr = f.lr;
    if (!f.mode.empty()) {
        if (f.mode == "exact") {
            cfg.exact = true;
        } else if (f.mode == "sampled") {
            cfg.exact = false;
        } else {
            throw qmlshots::harness::ConfigError("--mode must be exact|sampled");
        }
    }
    if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
    if (f.num_seeds > 0) cfg.num_seeds = static_cast<int>(f.num_seeds);
    if (f.threads > 0) cfg.threads = f.threads;
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (f.relu_after_fc2) cfg.relu_after_fc2 = true;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shot-scheduled hybrid QML training and VQE toolkit"};
    app.require_subcommand(1);

    CommonFlags train_f, sweep_f, spread_f, vqe_f;
    std::string hamiltonian_path;
    long long iterations = 0;
    int layers = 0;
    double reference_energy = 0.0;
    bool have_reference = false;
    std::vector<std::string> sweep_list;
    std::vector<std::string> plot_inputs;
    std::string plot_out = "plots";
    bool schedule_grid = false;

    CLI::App* train_cmd = app.add_subcommand("train", "Single shot-scheduled training run");
    add_common_flags(train_cmd, train_f);
    train_cmd->add_flag("--grid", schedule_grid,
                        "Run the full schedule grid (s_start/slope sweeps + step)");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Constant-shot sweep");
    add_common_flags(sweep_cmd, sweep_f);
    sweep_cmd->add_option("--shot-list", sweep_list, "Shot values (default 1 5 10 50 100 500 1000)");

    CLI::App* spread_cmd = app.add_subcommand("init-spread", "Multi-seed initialization study");
    add_common_flags(spread_cmd, spread_f);

    CLI::App* vqe_cmd = app.add_subcommand("vqe", "Shot-scheduled VQE ground-state run");
    add_common_flags(vqe_cmd, vqe_f);
    vqe_cmd->add_option("--hamiltonian", hamiltonian_path, "Pauli Hamiltonian JSON file");
    vqe_cmd->add_option("--iterations", iterations, "Optimizer iterations");
    vqe_cmd->add_option("--layers", layers, "Ansatz layers");
    vqe_cmd->add_option("--reference-energy", reference_energy,
                        "Reference ground energy in Hartree (skips diagonalization)")
        ->each([&](const std::string&) { have_reference = true; });

    CLI::App* plot_cmd = app.add_subcommand("plot", "Emit long-format plot data from metrics CSVs");
    plot_cmd->add_option("files", plot_inputs, "metrics.csv files")->required();
    plot_cmd->add_option("--out", plot_out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        namespace hn = qmlshots::harness;
        if (train_cmd->parsed()) {
            const RunConfig cfg = build_config(
                train_f, schedule_grid ? hn::Experiment::Schedule : hn::Experiment::Train);
            const auto rows = schedule_grid ? hn::run_schedule_experiment(cfg)
                                            : hn::run_train(cfg);
            for (const auto& r : rows) {
                std::cout << r.run_id << ": test_acc=" << r.final_test_acc
                          << " total_shots=" << r.total_shots << '\n';
            }
        } else if (sweep_cmd->parsed()) {
            RunConfig cfg = build_config(sweep_f, hn::Experiment::Sweep);
            if (!sweep_list.empty()) {
                cfg.sweep_shots.clear();
                for (const std::string& s : sweep_list) {
                    cfg.sweep_shots.push_back(std::stoll(s));
                }
            }
            for (const auto& r : hn::run_sweep(cfg)) {
                std::cout << r.run_id << ": test_acc=" << r.final_test_acc
                          << " total_shots=" << r.total_shots << '\n';
            }
        } else if (spread_cmd->parsed()) {
            const RunConfig cfg = build_config(spread_f, hn::Experiment::InitSpread);
            const auto rows = hn::run_init_spread(cfg);
            std::cout << rows.size() << " seeds done; spread.csv written\n";
        } else if (vqe_cmd->parsed()) {
            RunConfig cfg = build_config(vqe_f, hn::Experiment::Vqe);
            if (!hamiltonian_path.empty()) cfg.vqe.hamiltonian = hamiltonian_path;
            if (iterations > 0) cfg.vqe.iterations = iterations;
            if (layers > 0) cfg.vqe.layers = layers;
            if (have_reference) cfg.vqe.reference_energy = reference_energy;
            const auto run = hn::run_vqe_experiment(cfg);
            std::cout << "final_energy=" << run.final_energy
                      << " reference=" << run.reference_energy
                      << " delta_e=" << run.delta_e << '\n';
        } else if (plot_cmd->parsed()) {
            std::vector<std::filesystem::path> files(plot_inputs.begin(),
                                                     plot_inputs.end());
            hn::emit_plot_data(files, plot_out);
            std::cout << "plot data written to " << plot_out << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "{\"error\": \"" << e.what() << "\"}\n";
        return 1;
    }
    return 0;
}
