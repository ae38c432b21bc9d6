#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ecgbench/cost.hpp"
#include "ecgbench/data.hpp"
#include "ecgbench/models.hpp"
#include "ecgbench/report.hpp"
#include "ecgbench/train.hpp"

namespace {

using namespace ecgbench;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInputData = 2;
constexpr int kExitRuntime = 3;

// Stage seeds derived from the master seed so every pipeline stage owns an
// independent deterministic stream.
std::uint64_t stage_seed(std::uint64_t master, std::uint64_t stage) {
    std::uint64_t z = master + stage * 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

Dataset load_source(const std::string& source, std::uint64_t master_seed) {
    if (source.rfind("synth:", 0) == 0) {
        const std::size_t n = std::stoul(source.substr(6));
        std::array<std::size_t, kNumClasses> counts;
        counts.fill(n);
        return synth_generate(counts, stage_seed(master_seed, 1));
    }
    std::string path = source;
    if (path.rfind("csv:", 0) == 0) path = path.substr(4);
    return load_csv(path);
}

struct PreparedData {
    Dataset train;
    Dataset val;
};

PreparedData run_pipeline(const RunConfig& cfg, bool verbose) {
    Dataset ds = load_source(cfg.data_source, cfg.seed);
    if (verbose) std::cerr << "loaded " << ds.size() << " beats\n";

    if (cfg.noise_sigma > 0.0) {
        ds = add_gaussian_noise(ds, NoiseSpec{cfg.noise_sigma, stage_seed(cfg.seed, 2)});
    }
    if (cfg.smote) {
        ds = smote_oversample(ds, cfg.smote_k, stage_seed(cfg.seed, 3));
    }
    // Split before scaling so scaler statistics come from the training side
    // only.
    auto [train, val] = split_train_val(ds, cfg.split);
    const ScalerParams scaler = fit_scaler(train);
    train = apply_scaler(train, scaler);
    val = apply_scaler(val, scaler);
    return PreparedData{std::move(train), std::move(val)};
}

RunArtifact run_training(const RunConfig& cfg, Model& model_out, bool verbose) {
    const PreparedData data = run_pipeline(cfg, verbose);
    const ModelFamily family = model_family_from_string(cfg.model);

    TrainHistory history;
    Model model;
    if (family == ModelFamily::Dbn) {
        model = train_dbn_model(data.train, data.val, cfg.train, DbnTrainOptions{},
                                &history);
    } else {
        model = build_model(family, cfg.train.seed);
        history = fit(model, data.train, data.val, cfg.train);
    }

    RunArtifact artifact;
    artifact.config = cfg;
    artifact.history = history;
    artifact.training_time_s = history.total_seconds;
    artifact.metrics = evaluate(model, data.val);
    artifact.metrics.training_time_s = history.total_seconds;

    artifact.total_macs =
        mac_total(model_layer_costs(model, CountMode::Exact));
    artifact.latency = measure_latency(model, data.val, 3);
    artifact.perf = make_perf_report(
        artifact.total_macs,
        artifact.latency.per_sample_min_s * static_cast<double>(data.val.size()),
        data.val.size());

    model_out = std::move(model);
    return artifact;
}

std::string artifact_path(const std::string& out_dir, const std::string& model) {
    return out_dir + "/" + model + "_artifact.json";
}

void add_run_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--data", cfg.data_source,
                    "dataset source: csv:<path> or synth:<beats-per-class>")
        ->required();
    cmd->add_option("--noise-sigma", cfg.noise_sigma,
                    "Gaussian noise stddev in normalized amplitude units");
    cmd->add_flag("--smote,!--no-smote", cfg.smote, "SMOTE class rebalancing");
    cmd->add_option("--smote-k", cfg.smote_k, "SMOTE neighbor count");
    cmd->add_option("--train-frac", cfg.split.train_fraction, "training fraction");
    cmd->add_flag("--stratified,!--no-stratified", cfg.split.stratified,
                  "stratified split");
    cmd->add_option("--epochs", cfg.train.epochs, "max training epochs");
    cmd->add_option("--lr", cfg.train.learning_rate, "learning rate");
    cmd->add_option("--batch", cfg.train.batch_size, "mini-batch size");
    cmd->add_option("--optimizer", cfg.train.optimizer, "sgd|adam")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, Optimizer>{{"sgd", Optimizer::Sgd},
                                             {"adam", Optimizer::Adam}}));
    cmd->add_option("--patience", cfg.train.patience, "early-stopping patience");
    cmd->add_option("--min-delta", cfg.train.min_delta, "early-stopping min delta");
}

void finalize_seeds(RunConfig& cfg) {
    cfg.split.seed = stage_seed(cfg.seed, 4);
    cfg.train.seed = stage_seed(cfg.seed, 5);
}

int cmd_synth(std::size_t per_class, std::uint64_t seed, const std::string& out_path) {
    std::array<std::size_t, kNumClasses> counts;
    counts.fill(per_class);
    const Dataset ds = synth_generate(counts, seed);
    save_csv(ds, out_path);
    const auto hist = ds.class_histogram();
    std::cout << "wrote " << ds.size() << " beats to " << out_path << "\n";
    std::cout << "class histogram:";
    for (std::size_t c = 0; c < kNumClasses; ++c)
        std::cout << " " << c << ":" << hist[c];
    std::cout << "\n";
    return kExitOk;
}

int cmd_train(RunConfig cfg, const std::string& out_dir, bool verbose) {
    finalize_seeds(cfg);
    std::filesystem::create_directories(out_dir);
    Model model;
    const RunArtifact artifact = run_training(cfg, model, verbose);
    save_artifact(artifact, artifact_path(out_dir, cfg.model));
    save_history_csv(artifact.history, out_dir + "/" + cfg.model + "_history.csv");
    std::cout << render_comparison_header() << "\n";
    std::cout << render_comparison_row(cfg.model, artifact.metrics, artifact.perf)
              << "\n";
    return kExitOk;
}

int cmd_bench(const std::string& models_csv, RunConfig base_cfg,
              const std::string& out_dir, bool verbose) {
    std::vector<std::string> models;
    std::stringstream ss(models_csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) models.push_back(item);
    }
    if (models.empty()) throw CLI::ValidationError("--models", "no models selected");
    for (const std::string& m : models) model_family_from_string(m);  // validate

    finalize_seeds(base_cfg);
    std::filesystem::create_directories(out_dir);

    std::vector<RunArtifact> artifacts;
    for (const std::string& name : models) {
        RunConfig cfg = base_cfg;
        cfg.model = name;
        if (verbose) std::cerr << "training " << name << "...\n";
        Model model;
        // Latency runs inside run_training; training is sequential, so the
        // timed region never shares the process with another benchmark.
        artifacts.push_back(run_training(cfg, model, verbose));
        save_artifact(artifacts.back(), artifact_path(out_dir, name));
        save_history_csv(artifacts.back().history,
                         out_dir + "/" + name + "_history.csv");
    }

    std::ostringstream table;
    table << render_comparison_header() << "\n";
    for (std::size_t i = 0; i < models.size(); ++i) {
        table << render_comparison_row(models[i], artifacts[i].metrics,
                                       artifacts[i].perf)
              << "\n";
    }
    std::cout << table.str();

    std::ofstream table_out(out_dir + "/comparison.txt");
    table_out << table.str();

    nlohmann::json combined = nlohmann::json::array();
    for (const RunArtifact& a : artifacts)
        combined.push_back(nlohmann::json::parse(artifact_to_json(a)));
    std::ofstream combined_out(out_dir + "/bench_runs.json");
    combined_out << combined.dump(2) << "\n";
    return kExitOk;
}

int cmd_macs(const std::string& model_name, const std::string& mode,
             double clock_hz, const std::string& array_spec, double efficiency,
             std::uint64_t scenario_macs, std::uint64_t seed) {
    const ModelFamily family = model_family_from_string(model_name);
    Model model = build_model(family, seed);
    // One forward pass fixes every layer's shapes for counting.
    model.forward(Tensor::zeros({kBeatSamples}));

    const bool show_paper = mode == "paper" || mode == "both";
    const bool show_exact = mode == "exact" || mode == "both";
    if (!show_paper && !show_exact) {
        throw CLI::ValidationError("--mode", "must be paper, exact, or both");
    }

    for (const CountMode count_mode :
         {CountMode::PaperFormula, CountMode::Exact}) {
        if (count_mode == CountMode::PaperFormula && !show_paper) continue;
        if (count_mode == CountMode::Exact && !show_exact) continue;
        const std::vector<LayerCost> costs = model_layer_costs(model, count_mode);
        std::cout << "mode: " << to_string(count_mode) << "\n";
        for (const LayerCost& c : costs) {
            std::cout << "  " << c.layer_id << "  kind=" << to_string(c.kind)
                      << "  macs=" << c.macs;
            if (c.non_divisible) std::cout << "  [non-divisible window]";
            std::cout << "\n";
        }
        std::cout << "  total: " << mac_total(costs) << "\n";
    }

    if (clock_hz > 0.0 && !array_spec.empty()) {
        std::uint64_t macs_per_cycle = 0;
        const auto x = array_spec.find('x');
        if (x == std::string::npos) {
            macs_per_cycle = std::stoull(array_spec);
        } else {
            macs_per_cycle =
                std::stoull(array_spec.substr(0, x)) * std::stoull(array_spec.substr(x + 1));
        }
        std::uint64_t macs = scenario_macs;
        if (macs == 0) macs = mac_total(model_layer_costs(model, CountMode::Exact));
        AcceleratorSpec spec{clock_hz, macs_per_cycle, array_spec};
        const double latency = estimate_accelerator_latency(macs, spec, efficiency);
        std::cout << "estimated accelerator latency: " << latency * 1e3 << " ms ("
                  << macs << " MACs, " << array_spec << " array @ " << clock_hz
                  << " Hz, efficiency " << efficiency << ")\n";
        std::cout << render_scenario_header() << "\n";
        ScenarioRow row;
        row.convolution_type = model_name;
        row.platform = "estimator";
        row.input_samples = kBeatSamples;
        row.num_macs = macs;
        std::ostringstream clock_text;
        clock_text << clock_hz / 1e6 << " MHz";
        row.clock = clock_text.str();
        std::cout << render_scenario_row(row) << "\n";
    }
    return kExitOk;
}

int cmd_report(const std::vector<std::string>& paths) {
    std::vector<RunArtifact> artifacts;
    for (const std::string& p : paths) artifacts.push_back(load_artifact(p));

    bool version_mismatch = false;
    for (const RunArtifact& a : artifacts)
        if (a.tool_version != artifacts.front().tool_version) version_mismatch = true;

    std::cout << render_comparison_header();
    if (version_mismatch) std::cout << "Version";
    std::cout << "\n";
    for (const RunArtifact& a : artifacts) {
        std::cout << render_comparison_row(a.config.model, a.metrics, a.perf);
        if (version_mismatch) std::cout << a.tool_version << " !version-mismatch";
        std::cout << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ECG beat-classification benchmark harness"};
    app.require_subcommand(1);

    std::uint64_t seed = 42;
    std::string out_dir = ".";
    bool verbose = false;
    app.add_option("--seed", seed, "master seed")->configurable();
    app.add_option("--out-dir", out_dir, "output directory");
    app.add_flag("--verbose", verbose, "verbose progress output");
    app.fallthrough();

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic beat CSV");
    std::size_t per_class = 100;
    std::string synth_out = "beats.csv";
    synth->add_option("--per-class", per_class, "beats per class")->required();
    synth->add_option("-o,--out", synth_out, "output CSV path");

    // train
    auto* train = app.add_subcommand("train", "train and evaluate one model");
    RunConfig train_cfg;
    train->add_option("--model", train_cfg.model, "lstm|cnn|rnn|dbn")
        ->required()
        ->check(CLI::IsMember({"lstm", "cnn", "rnn", "dbn"}));
    add_run_options(train, train_cfg);

    // bench
    auto* bench = app.add_subcommand("bench", "train and compare several models");
    std::string models_csv = "lstm,cnn,rnn,dbn";
    RunConfig bench_cfg;
    bench->add_option("--models", models_csv, "comma-separated model list");
    add_run_options(bench, bench_cfg);

    // macs
    auto* macs = app.add_subcommand("macs", "analytical MAC listing for a model");
    std::string macs_model, macs_mode = "both", array_spec;
    double clock_hz = 0.0, efficiency = 1.0;
    std::uint64_t scenario_macs = 0;
    macs->add_option("--model", macs_model, "lstm|cnn|rnn|dbn")
        ->required()
        ->check(CLI::IsMember({"lstm", "cnn", "rnn", "dbn"}));
    macs->add_option("--mode", macs_mode, "paper|exact|both");
    macs->add_option("--clock", clock_hz, "accelerator clock in Hz");
    macs->add_option("--array", array_spec, "MAC array, e.g. 8x8 or 64");
    macs->add_option("--efficiency", efficiency, "array utilization in (0,1]");
    macs->add_option("--scenario-macs", scenario_macs,
                     "override MAC count for the accelerator estimate");

    // report
    auto* report = app.add_subcommand("report", "render tables from run artifacts");
    std::vector<std::string> artifact_paths;
    report->add_option("artifacts", artifact_paths, "artifact JSON files")
        ->required()
        ->expected(-1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (synth->parsed()) {
            if (per_class == 0) {
                std::cerr << "error: --per-class must be positive\n";
                return kExitUsage;
            }
            return cmd_synth(per_class, seed, synth_out);
        }
        if (train->parsed()) {
            train_cfg.seed = seed;
            return cmd_train(train_cfg, out_dir, verbose);
        }
        if (bench->parsed()) {
            bench_cfg.seed = seed;
            return cmd_bench(models_csv, bench_cfg, out_dir, verbose);
        }
        if (macs->parsed()) {
            return cmd_macs(macs_model, macs_mode, clock_hz, array_spec, efficiency,
                            scenario_macs, seed);
        }
        if (report->parsed()) {
            return cmd_report(artifact_paths);
        }
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitInputData;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
