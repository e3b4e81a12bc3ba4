#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qmlshots/dataio.hpp"
#include "qmlshots/hybrid.hpp"
#include "qmlshots/schedule.hpp"
#include "qmlshots/vqe.hpp"

namespace qmlshots::harness {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Experiment { Train, Sweep, Schedule, InitSpread, Vqe };

struct DatasetConfig {
    std::string name = "mnist";      // mnist | fmnist | synthetic
    std::string variant = "short";   // short | full
    std::filesystem::path data_dir;  // IDX location (env QMLSHOTS_DATA_DIR)
    std::uint64_t split_seed = 7;
    int per_class_train = 100;
    int per_class_test = 25;
    int num_classes = 10;  // synthetic only
};

struct VqeSection {
    std::filesystem::path hamiltonian;
    int layers = 3;
    long long iterations = 100;
    std::optional<double> reference_energy;
};

struct RunConfig {
    Experiment experiment = Experiment::Train;
    DatasetConfig dataset;
    sched::ShotSchedule schedule = sched::ShotSchedule::constant(1000);
    std::vector<sched::Shots> sweep_shots = {1, 5, 10, 50, 100, 500, 1000};
    long long epochs = 100;
    int batch_size = 32;
    hybrid::AdamConfig adam;
    bool exact = false;
    bool relu_after_fc2 = false;
    std::uint64_t seed = 0;
    int num_seeds = 15;  // init-spread
    int threads = 1;
    std::filesystem::path out_dir = "runs";
    VqeSection vqe;

    void validate() const;
};

// JSON round trip. Parsing rejects unknown keys; serialization materializes
// every default so a saved config reproduces the run.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& cfg);

// Applies `--preset smoke`: synthetic data, 3 classes, 20 train / 10 test
// per class, 20 epochs, lr 0.01.
void apply_smoke_preset(RunConfig& cfg);

// Resolves the configured dataset into (train, test). MNIST/FMNIST read the
// standard IDX filenames under data_dir/<name>/; synthetic is generated.
// The short variant applies the stratified per-class subsample.
std::pair<data::LabeledImageSet, data::LabeledImageSet> resolve_dataset(
    const DatasetConfig& cfg);

// Deterministic number formatting shared by every CSV writer ("%.10g").
std::string format_value(double v);

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<hybrid::MetricsRecord>& records);
std::vector<hybrid::MetricsRecord> read_metrics_csv(const std::filesystem::path& path);

void write_trajectory_csv(const std::filesystem::path& path, const vqe::VqeRun& run);

struct RunSummary {
    std::string run_id;
    std::string schedule;
    sched::Shots total_shots = 0;  // headline forward bucket
    double final_train_loss = 0.0, final_test_loss = 0.0;
    double final_train_acc = 0.0, final_test_acc = 0.0;
};

void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<RunSummary>& rows);

// Experiment drivers. Each writes per-run metrics CSVs plus the resolved
// config under cfg.out_dir and returns the summary rows.
std::vector<RunSummary> run_train(const RunConfig& cfg);
std::vector<RunSummary> run_sweep(const RunConfig& cfg);
std::vector<RunSummary> run_schedule_experiment(const RunConfig& cfg);
std::vector<RunSummary> run_init_spread(const RunConfig& cfg);
vqe::VqeRun run_vqe_experiment(const RunConfig& cfg);

// Long-format plot data (`series,epoch,value`), one output file per metric
// column, from a set of metrics CSVs.
void emit_plot_data(const std::vector<std::filesystem::path>& metrics_files,
                    const std::filesystem::path& out_dir);

}  // namespace qmlshots::harness
