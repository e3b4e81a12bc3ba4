#include "qmlshots/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace qmlshots::harness {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(known.begin(), known.end(), [&](const char* k) {
                return key == k;
            }) == known.end()) {
            throw ConfigError("unknown config key '" + key + "' in " + where);
        }
    }
}

Experiment parse_experiment(const std::string& s) {
    if (s == "train") return Experiment::Train;
    if (s == "sweep") return Experiment::Sweep;
    if (s == "schedule") return Experiment::Schedule;
    if (s == "init-spread") return Experiment::InitSpread;
    if (s == "vqe") return Experiment::Vqe;
    throw ConfigError("unknown experiment '" + s + "'");
}

const char* experiment_name(Experiment e) {
    switch (e) {
        case Experiment::Train: return "train";
        case Experiment::Sweep: return "sweep";
        case Experiment::Schedule: return "schedule";
        case Experiment::InitSpread: return "init-spread";
        case Experiment::Vqe: return "vqe";
    }
    return "?";
}

sched::ShotSchedule parse_schedule(const json& j) {
    reject_unknown_keys(j, {"kind", "s", "s_start", "slope", "delta", "period", "floor"},
                        "schedule");
    const std::string kind = j.value("kind", "constant");
    sched::ShotSchedule s;
    if (kind == "constant") {
        s = sched::ShotSchedule::constant(j.value("s", 1000LL));
    } else if (kind == "linear") {
        s = sched::ShotSchedule::linear(j.value("s_start", 1000LL),
                                        j.value("slope", 10LL), j.value("floor", 20LL));
    } else if (kind == "step") {
        s = sched::ShotSchedule::step(j.value("s_start", 1000LL), j.value("delta", 100LL),
                                      j.value("period", 10LL), j.value("floor", 20LL));
    } else {
        throw ConfigError("schedule kind must be constant|linear|step");
    }
    return s;
}

json schedule_to_json(const sched::ShotSchedule& s) {
    json j;
    switch (s.kind) {
        case sched::ShotSchedule::Kind::Constant:
            j["kind"] = "constant";
            j["s"] = s.s;
            break;
        case sched::ShotSchedule::Kind::Linear:
            j["kind"] = "linear";
            j["s_start"] = s.s_start;
            j["slope"] = s.slope;
            j["floor"] = s.floor;
            break;
        case sched::ShotSchedule::Kind::Step:
            j["kind"] = "step";
            j["s_start"] = s.s_start;
            j["delta"] = s.delta;
            j["period"] = s.period;
            j["floor"] = s.floor;
            break;
    }
    return j;
}

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("QMLSHOTS_DATA_DIR")) {
        return env;
    }
    return "data";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
}

}  // namespace

void RunConfig::validate() const {
    schedule.validate();
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (dataset.name != "mnist" && dataset.name != "fmnist" &&
        dataset.name != "synthetic") {
        throw ConfigError("dataset must be mnist|fmnist|synthetic");
    }
    if (dataset.variant != "short" && dataset.variant != "full") {
        throw ConfigError("variant must be short|full");
    }
    if (experiment == Experiment::Sweep && sweep_shots.empty()) {
        throw ConfigError("sweep requires a non-empty shot list");
    }
    for (const sched::Shots s : sweep_shots) {
        if (s < 1) throw ConfigError("sweep shot values must be >= 1");
    }
    if (experiment == Experiment::InitSpread && num_seeds < 2) {
        throw ConfigError("init-spread needs >= 2 seeds (spread undefined for 1)");
    }
    if (experiment == Experiment::Vqe) {
        if (vqe.hamiltonian.empty()) {
            throw ConfigError("vqe requires a hamiltonian file");
        }
        if (vqe.layers < 1 || vqe.iterations < 1) {
            throw ConfigError("vqe layers and iterations must be >= 1");
        }
    }
}

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    reject_unknown_keys(j,
                        {"experiment", "dataset", "schedule", "sweep_shots", "epochs",
                         "batch_size", "adam", "exact", "relu_after_fc2", "seed",
                         "num_seeds", "threads", "out_dir", "vqe"},
                        "top level");
    RunConfig cfg;
    if (j.contains("experiment")) {
        cfg.experiment = parse_experiment(j.at("experiment").get<std::string>());
    }
    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        reject_unknown_keys(d,
                            {"name", "variant", "data_dir", "split_seed",
                             "per_class_train", "per_class_test", "num_classes"},
                            "dataset");
        cfg.dataset.name = d.value("name", cfg.dataset.name);
        cfg.dataset.variant = d.value("variant", cfg.dataset.variant);
        cfg.dataset.data_dir = d.value("data_dir", std::string{});
        cfg.dataset.split_seed = d.value("split_seed", cfg.dataset.split_seed);
        cfg.dataset.per_class_train = d.value("per_class_train", cfg.dataset.per_class_train);
        cfg.dataset.per_class_test = d.value("per_class_test", cfg.dataset.per_class_test);
        cfg.dataset.num_classes = d.value("num_classes", cfg.dataset.num_classes);
    }
    if (j.contains("schedule")) {
        cfg.schedule = parse_schedule(j.at("schedule"));
    }
    if (j.contains("sweep_shots")) {
        cfg.sweep_shots = j.at("sweep_shots").get<std::vector<sched::Shots>>();
    }
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    if (j.contains("adam")) {
        const json& a = j.at("adam");
        reject_unknown_keys(a, {"lr", "beta1", "beta2", "eps"}, "adam");
        cfg.adam.lr = a.value("lr", cfg.adam.lr);
        cfg.adam.beta1 = a.value("beta1", cfg.adam.beta1);
        cfg.adam.beta2 = a.value("beta2", cfg.adam.beta2);
        cfg.adam.eps = a.value("eps", cfg.adam.eps);
    }
    cfg.exact = j.value("exact", cfg.exact);
    cfg.relu_after_fc2 = j.value("relu_after_fc2", cfg.relu_after_fc2);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.num_seeds = j.value("num_seeds", cfg.num_seeds);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.out_dir = j.value("out_dir", std::string("runs"));
    if (j.contains("vqe")) {
        const json& v = j.at("vqe");
        reject_unknown_keys(v, {"hamiltonian", "layers", "iterations", "reference_energy"},
                            "vqe");
        cfg.vqe.hamiltonian = v.value("hamiltonian", std::string{});
        cfg.vqe.layers = v.value("layers", cfg.vqe.layers);
        cfg.vqe.iterations = v.value("iterations", cfg.vqe.iterations);
        if (v.contains("reference_energy")) {
            cfg.vqe.reference_energy = v.at("reference_energy").get<double>();
        }
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string serialize_config(const RunConfig& cfg) {
    json j;
    j["experiment"] = experiment_name(cfg.experiment);
    j["dataset"] = {{"name", cfg.dataset.name},
                    {"variant", cfg.dataset.variant},
                    {"data_dir", cfg.dataset.data_dir.string()},
                    {"split_seed", cfg.dataset.split_seed},
                    {"per_class_train", cfg.dataset.per_class_train},
                    {"per_class_test", cfg.dataset.per_class_test},
                    {"num_classes", cfg.dataset.num_classes}};
    j["schedule"] = schedule_to_json(cfg.schedule);
    j["sweep_shots"] = cfg.sweep_shots;
    j["epochs"] = cfg.epochs;
    j["batch_size"] = cfg.batch_size;
    j["adam"] = {{"lr", cfg.adam.lr},
                 {"beta1", cfg.adam.beta1},
                 {"beta2", cfg.adam.beta2},
                 {"eps", cfg.adam.eps}};
    j["exact"] = cfg.exact;
    j["relu_after_fc2"] = cfg.relu_after_fc2;
    j["seed"] = cfg.seed;
    j["num_seeds"] = cfg.num_seeds;
    j["threads"] = cfg.threads;
    j["out_dir"] = cfg.out_dir.string();
    if (cfg.experiment == Experiment::Vqe) {
        json v;
        v["hamiltonian"] = cfg.vqe.hamiltonian.string();
        v["layers"] = cfg.vqe.layers;
        v["iterations"] = cfg.vqe.iterations;
        if (cfg.vqe.reference_energy.has_value()) {
            v["reference_energy"] = *cfg.vqe.reference_energy;
        }
        j["vqe"] = v;
    }
    return j.dump(2) + "\n";
}

void apply_smoke_preset(RunConfig& cfg) {
    cfg.dataset.name = "synthetic";
    cfg.dataset.variant = "short";
    cfg.dataset.num_classes = 3;
    cfg.dataset.per_class_train = 20;
    cfg.dataset.per_class_test = 10;
    cfg.epochs = 20;
    cfg.adam.lr = 0.01;
}

std::pair<data::LabeledImageSet, data::LabeledImageSet> resolve_dataset(
    const DatasetConfig& cfg) {
    if (cfg.name == "synthetic") {
        data::LabeledImageSet train = data::synthetic_image_set(
            cfg.per_class_train, cfg.num_classes, cfg.split_seed);
        data::LabeledImageSet test = data::synthetic_image_set(
            cfg.per_class_test, cfg.num_classes,
            cfg.split_seed ^ 0x9E3779B97F4A7C15ull);
        test.name = "synthetic_test";
        return {std::move(train), std::move(test)};
    }
    const std::filesystem::path root =
        (cfg.data_dir.empty() ? default_data_dir() : cfg.data_dir) / cfg.name;
    data::LabeledImageSet train = data::load_idx(root / "train-images-idx3-ubyte",
                                                 root / "train-labels-idx1-ubyte");
    data::LabeledImageSet test = data::load_idx(root / "t10k-images-idx3-ubyte",
                                                root / "t10k-labels-idx1-ubyte");
    if (cfg.variant == "short") {
        data::SplitSpec spec{cfg.per_class_train, cfg.per_class_test, cfg.split_seed};
        return data::stratified_subset(train, test, spec);
    }
    return {std::move(train), std::move(test)};
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<hybrid::MetricsRecord>& records) {
    std::ostringstream out;
    out << "epoch,train_loss,test_loss,train_acc,test_acc,shots_epoch,"
           "shots_cumulative,shots_grad_cumulative\n";
    for (const hybrid::MetricsRecord& r : records) {
        out << r.epoch << ',' << format_value(r.train_loss) << ','
            << format_value(r.test_loss) << ',' << format_value(r.train_acc) << ','
            << format_value(r.test_acc) << ',' << r.shots_this_epoch << ','
            << r.cumulative_shots << ',' << r.grad_cumulative_shots << '\n';
    }
    write_text_file(path, out.str());
}

std::vector<hybrid::MetricsRecord> read_metrics_csv(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open metrics file: " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("empty metrics file: " + path.string());
    }
    std::vector<hybrid::MetricsRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        hybrid::MetricsRecord r;
        char comma;
        if (!(row >> r.epoch >> comma >> r.train_loss >> comma >> r.test_loss >>
              comma >> r.train_acc >> comma >> r.test_acc >> comma >>
              r.shots_this_epoch >> comma >> r.cumulative_shots >> comma >>
              r.grad_cumulative_shots)) {
            throw std::runtime_error("malformed metrics row in " + path.string() +
                                     ": " + line);
        }
        records.push_back(r);
    }
    if (records.empty()) {
        throw std::runtime_error("metrics file has no data rows: " + path.string());
    }
    return records;
}

void write_trajectory_csv(const std::filesystem::path& path, const vqe::VqeRun& run) {
    std::ostringstream out;
    out << "iteration,energy,shots_iter,shots_cumulative\n";
    for (const vqe::TrajectoryPoint& pt : run.trajectory) {
        out << pt.iteration << ',' << format_value(pt.energy) << ',' << pt.shots_iter
            << ',' << pt.shots_cumulative << '\n';
    }
    write_text_file(path, out.str());
}

void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<RunSummary>& rows) {
    std::ostringstream out;
    out << "run_id,schedule,total_shots,final_train_loss,final_test_loss,"
           "final_train_acc,final_test_acc\n";
    for (const RunSummary& r : rows) {
        out << r.run_id << ',' << r.schedule << ',' << r.total_shots << ','
            << format_value(r.final_train_loss) << ','
            << format_value(r.final_test_loss) << ','
            << format_value(r.final_train_acc) << ','
            << format_value(r.final_test_acc) << '\n';
    }
    write_text_file(path, out.str());
}

namespace {

// One training run, written into out_dir/<run_id>/.
RunSummary execute_training_run(const RunConfig& cfg, const std::string& run_id,
                                const sched::ShotSchedule& schedule,
                                std::uint64_t seed,
                                const data::LabeledImageSet& train_set,
                                const data::LabeledImageSet& test_set) {
    const std::filesystem::path run_dir = cfg.out_dir / run_id;
    std::filesystem::create_directories(run_dir);

    hybrid::TrainConfig tc;
    tc.schedule = schedule;
    tc.exact = cfg.exact;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch_size;
    tc.adam = cfg.adam;
    tc.relu_after_fc2 = cfg.relu_after_fc2;
    tc.seed = seed;
    tc.threads = cfg.threads;

    hybrid::HybridModel model = hybrid::HybridModel::init(seed);
    sched::ShotLedger ledger;
    const std::vector<hybrid::MetricsRecord> records =
        hybrid::train(model, train_set, test_set, tc, ledger);
    write_metrics_csv(run_dir / "metrics.csv", records);

    RunSummary s;
    s.run_id = run_id;
    s.schedule = schedule.describe();
    s.total_shots = ledger.cumulative(sched::ShotCategory::Forward);
    s.final_train_loss = records.back().train_loss;
    s.final_test_loss = records.back().test_loss;
    s.final_train_acc = records.back().train_acc;
    s.final_test_acc = records.back().test_acc;
    return s;
}

void write_resolved_config(const RunConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    write_text_file(cfg.out_dir / "config.json", serialize_config(cfg));
}

}  // namespace

std::vector<RunSummary> run_train(const RunConfig& cfg) {
    cfg.validate();
    write_resolved_config(cfg);
    const auto [train_set, test_set] = resolve_dataset(cfg.dataset);
    const std::string run_id = "train_" + cfg.schedule.describe() + "_seed" +
                               std::to_string(cfg.seed);
    std::vector<RunSummary> rows{execute_training_run(
        cfg, run_id, cfg.schedule, cfg.seed, train_set, test_set)};
    write_summary_csv(cfg.out_dir / "summary.csv", rows);
    return rows;
}

std::vector<RunSummary> run_sweep(const RunConfig& cfg) {
    cfg.validate();
    write_resolved_config(cfg);
    const auto [train_set, test_set] = resolve_dataset(cfg.dataset);
    std::vector<RunSummary> rows;
    for (const sched::Shots shots : cfg.sweep_shots) {
        const auto schedule = sched::ShotSchedule::constant(shots);
        rows.push_back(execute_training_run(cfg, "sweep_shots" + std::to_string(shots),
                                            schedule, cfg.seed, train_set, test_set));
    }
    write_summary_csv(cfg.out_dir / "summary.csv", rows);
    return rows;
}

std::vector<RunSummary> run_schedule_experiment(const RunConfig& cfg) {
    cfg.validate();
    write_resolved_config(cfg);
    const auto [train_set, test_set] = resolve_dataset(cfg.dataset);
    std::vector<std::pair<std::string, sched::ShotSchedule>> grid;
    for (sched::Shots s_start = 300; s_start <= 1000; s_start += 100) {
        grid.emplace_back("sstart" + std::to_string(s_start),
                          sched::ShotSchedule::linear(s_start, 10));
    }
    for (sched::Shots slope = 10; slope <= 80; slope += 10) {
        grid.emplace_back("slope" + std::to_string(slope),
                          sched::ShotSchedule::linear(1000, slope));
    }
    grid.emplace_back("step", sched::ShotSchedule::step());

    std::vector<RunSummary> rows;
    for (const auto& [tag, schedule] : grid) {
        rows.push_back(execute_training_run(cfg, "schedule_" + tag, schedule, cfg.seed,
                                            train_set, test_set));
    }
    write_summary_csv(cfg.out_dir / "summary.csv", rows);
    return rows;
}

std::vector<RunSummary> run_init_spread(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.num_seeds < 2) {
        throw ConfigError("init-spread needs >= 2 seeds");
    }
    write_resolved_config(cfg);
    const auto [train_set, test_set] = resolve_dataset(cfg.dataset);

    std::vector<RunSummary> rows;
    std::vector<std::vector<hybrid::MetricsRecord>> all_records;
    for (int k = 0; k < cfg.num_seeds; ++k) {
        const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(k);
        const std::string run_id = "spread_seed" + std::to_string(seed);
        rows.push_back(execute_training_run(cfg, run_id, cfg.schedule, seed, train_set,
                                            test_set));
        all_records.push_back(read_metrics_csv(cfg.out_dir / run_id / "metrics.csv"));
    }

    // per-epoch min/max/mean/std across seeds, long format
    std::ostringstream out;
    out << "epoch,metric,min,max,mean,std\n";
    const std::size_t epochs = all_records.front().size();
    const char* metric_names[3] = {"loss", "train_acc", "test_acc"};
    for (std::size_t e = 0; e < epochs; ++e) {
        for (int m = 0; m < 3; ++m) {
            std::vector<double> vals;
            vals.reserve(all_records.size());
            for (const auto& recs : all_records) {
                const hybrid::MetricsRecord& r = recs[e];
                vals.push_back(m == 0 ? r.train_loss : (m == 1 ? r.train_acc : r.test_acc));
            }
            const double mn = *std::min_element(vals.begin(), vals.end());
            const double mx = *std::max_element(vals.begin(), vals.end());
            double mean = 0.0;
            for (const double v : vals) mean += v;
            mean /= static_cast<double>(vals.size());
            double var = 0.0;
            for (const double v : vals) var += (v - mean) * (v - mean);
            var /= static_cast<double>(vals.size());
            out << (e + 1) << ',' << metric_names[m] << ',' << format_value(mn) << ','
                << format_value(mx) << ',' << format_value(mean) << ','
                << format_value(std::sqrt(var)) << '\n';
        }
    }
    write_text_file(cfg.out_dir / "spread.csv", out.str());
    write_summary_csv(cfg.out_dir / "summary.csv", rows);
    return rows;
}

vqe::VqeRun run_vqe_experiment(const RunConfig& cfg) {
    cfg.validate();
    write_resolved_config(cfg);
    const vqe::PauliHamiltonian h = vqe::load_hamiltonian(cfg.vqe.hamiltonian);
    vqe::VqeConfig vc;
    vc.layers = cfg.vqe.layers;
    vc.schedule = cfg.schedule;
    vc.iterations = cfg.vqe.iterations;
    vc.exact = cfg.exact;
    vc.adam = cfg.adam;
    vc.seed = cfg.seed;
    sched::ShotLedger ledger;
    const vqe::VqeRun run =
        vqe::vqe_optimize(h, vc, ledger, cfg.vqe.reference_energy);
    const std::filesystem::path run_dir =
        cfg.out_dir / ("vqe_" + h.name + "_" + cfg.schedule.describe());
    std::filesystem::create_directories(run_dir);
    write_trajectory_csv(run_dir / "trajectory.csv", run);

    std::ostringstream summary;
    summary << "name,final_energy,reference_energy,delta_e,objective_shots,"
               "gradient_shots\n"
            << h.name << ',' << format_value(run.final_energy) << ','
            << format_value(run.reference_energy) << ',' << format_value(run.delta_e)
            << ',' << ledger.cumulative(sched::ShotCategory::Forward) << ','
            << ledger.cumulative(sched::ShotCategory::Gradient) << '\n';
    write_text_file(run_dir / "summary.csv", summary.str());
    return run;
}

void emit_plot_data(const std::vector<std::filesystem::path>& metrics_files,
                    const std::filesystem::path& out_dir) {
    struct Series {
        std::string name;
        std::vector<hybrid::MetricsRecord> records;
    };
    std::vector<Series> series;
    for (const auto& path : metrics_files) {
        // run directory name disambiguates the common "metrics.csv" filename
        std::string name = path.stem().string();
        if (name == "metrics" && path.has_parent_path()) {
            name = path.parent_path().filename().string();
        }
        series.push_back({name, read_metrics_csv(path)});
    }

    std::filesystem::create_directories(out_dir);
    const std::pair<const char*, double hybrid::MetricsRecord::*> metrics[4] = {
        {"train_loss", &hybrid::MetricsRecord::train_loss},
        {"test_loss", &hybrid::MetricsRecord::test_loss},
        {"train_acc", &hybrid::MetricsRecord::train_acc},
        {"test_acc", &hybrid::MetricsRecord::test_acc},
    };
    for (const auto& [metric_name, member] : metrics) {
        std::ostringstream out;
        out << "series,epoch,value\n";
        for (const Series& s : series) {
            for (const hybrid::MetricsRecord& r : s.records) {
                out << s.name << ',' << r.epoch << ',' << format_value(r.*member)
                    << '\n';
            }
        }
        write_text_file(out_dir / (std::string(metric_name) + ".csv"), out.str());
    }
}

}  // namespace qmlshots::harness
