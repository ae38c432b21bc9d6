#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ecgbench/cost.hpp"
#include "ecgbench/data.hpp"
#include "ecgbench/train.hpp"

namespace ecgbench {

inline constexpr const char* kToolVersion = "ecgbench 0.1.0";
inline constexpr int kArtifactSchemaVersion = 1;

/// Everything needed to rerun one training run deterministically.
struct RunConfig {
    std::string model;         // lstm|cnn|rnn|dbn
    std::string data_source;   // "csv:<path>" or "synth:<per-class>"
    double noise_sigma = 0.0;
    bool smote = true;
    std::size_t smote_k = 5;
    SplitSpec split;
    TrainConfig train;
    std::uint64_t seed = 0;    // master seed; stage seeds derive from it
};

struct RunArtifact {
    int schema_version = kArtifactSchemaVersion;
    std::string tool_version = kToolVersion;
    RunConfig config;
    MetricsReport metrics;
    std::uint64_t total_macs = 0;  // exact-mode per-inference count
    TrainHistory history;
    // Wall-clock measurements, isolated so reruns can be diffed on
    // everything else.
    double training_time_s = 0.0;
    LatencyMeasurement latency;
    PerfReport perf;
};

std::string artifact_to_json(const RunArtifact& artifact);
RunArtifact artifact_from_json(const std::string& json_text);
void save_artifact(const RunArtifact& artifact, const std::string& path);
RunArtifact load_artifact(const std::string& path);

/// The eight metric columns of the model-comparison table, in order.
const std::vector<std::string>& comparison_columns();

std::string render_comparison_header();
std::string render_comparison_row(const std::string& model_name,
                                  const MetricsReport& metrics,
                                  const PerfReport& perf);

/// Accelerator-scenario row in the deployment-comparison layout; absent
/// fields render as "-".
struct ScenarioRow {
    std::optional<std::string> convolution_type;
    std::optional<std::string> platform;
    std::optional<std::uint64_t> input_samples;
    std::optional<std::string> activation;
    std::optional<std::uint64_t> num_macs;
    std::optional<std::string> clock;
    std::optional<std::string> accuracy;
    std::optional<std::string> power;
};

std::string render_scenario_header();
std::string render_scenario_row(const ScenarioRow& row);

/// Per-epoch history as a columnar file (epoch,train_loss,val_loss,seconds).
void save_history_csv(const TrainHistory& history, const std::string& path);

}  // namespace ecgbench
