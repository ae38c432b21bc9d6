#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <sstream>

#include "ecgbench/report.hpp"

using namespace ecgbench;

namespace {

RunArtifact sample_artifact() {
    RunArtifact a;
    a.config.model = "cnn";
    a.config.data_source = "synth:100";
    a.config.noise_sigma = 0.05;
    a.config.smote = true;
    a.config.smote_k = 5;
    a.config.split.seed = 11;
    a.config.train.epochs = 7;
    a.config.train.seed = 12;
    a.config.seed = 42;
    a.metrics.accuracy = 0.9625;
    a.metrics.macro_precision = 0.94;
    a.metrics.macro_recall = 0.93;
    a.metrics.macro_f1 = 0.935;
    a.metrics.param_count = 12345;
    a.metrics.confusion[0][0] = 20;
    a.metrics.confusion[1][1] = 19;
    a.metrics.confusion[1][0] = 1;
    a.total_macs = 250000;
    a.history.epochs = {{1.2, 1.1, 0.5}, {0.8, 0.9, 0.5}};
    a.history.best_epoch = 1;
    a.training_time_s = 1.0;
    a.latency.total_time_s = 0.3;
    a.latency.per_sample_mean_s = 1e-4;
    a.latency.per_sample_min_s = 9e-5;
    a.latency.repeats = 3;
    a.latency.num_samples = 100;
    a.perf = make_perf_report(a.total_macs, 9e-5 * 100, 100);
    return a;
}

}  // namespace

TEST_CASE("artifact json round trip is byte identical") {
    const RunArtifact a = sample_artifact();
    const std::string once = artifact_to_json(a);
    const RunArtifact back = artifact_from_json(once);
    const std::string twice = artifact_to_json(back);
    CHECK(once == twice);

    CHECK(back.config.model == "cnn");
    CHECK(back.config.train.epochs == 7);
    CHECK(back.metrics.accuracy == a.metrics.accuracy);
    CHECK(back.total_macs == a.total_macs);
    CHECK(back.history.epochs.size() == 2);
    CHECK(back.history.best_epoch == 1);
    CHECK(back.latency.per_sample_min_s == a.latency.per_sample_min_s);
    CHECK(back.perf.throughput_gops == a.perf.throughput_gops);
}

TEST_CASE("save and load artifact, corrupt input rejected") {
    const std::string path = "/tmp/ecgbench_artifact_test.json";
    save_artifact(sample_artifact(), path);
    const RunArtifact back = load_artifact(path);
    CHECK(back.schema_version == kArtifactSchemaVersion);
    CHECK(back.tool_version == kToolVersion);

    std::ofstream bad(path);
    bad << "{not json";
    bad.close();
    CHECK_THROWS(load_artifact(path));
    CHECK_THROWS(load_artifact("/tmp/ecgbench_no_such_artifact.json"));
}

TEST_CASE("comparison table has exactly the eight columns in order") {
    const auto& cols = comparison_columns();
    REQUIRE(cols.size() == 8);
    CHECK(cols[0] == "Accuracy");
    CHECK(cols[1] == "Precision");
    CHECK(cols[2] == "Recall");
    CHECK(cols[3] == "F1-score");
    CHECK(cols[4] == "Training time");
    CHECK(cols[5] == "Model complexity (params)");
    CHECK(cols[6] == "Throughput [GOP/s]");
    CHECK(cols[7] == "Latency");

    const std::string header = render_comparison_header();
    std::size_t pos = 0;
    for (const std::string& c : cols) {
        const std::size_t found = header.find(c, pos);
        CHECK(found != std::string::npos);
        pos = found + c.size();
    }
}

TEST_CASE("comparison row renders the metrics") {
    const RunArtifact a = sample_artifact();
    MetricsReport m = a.metrics;
    m.training_time_s = 12.5;
    const std::string line = render_comparison_row("cnn", m, a.perf);
    CHECK(line.find("cnn") == 0);
    CHECK(line.find("96.25%") != std::string::npos);
    CHECK(line.find("12.50 s") != std::string::npos);
    CHECK(line.find("12345") != std::string::npos);
}

TEST_CASE("scenario row renders missing fields as dashes") {
    ScenarioRow row;
    row.convolution_type = "1D";
    row.platform = "PYNQ Z1";
    row.input_samples = 187;
    row.num_macs = 47560;
    row.clock = "100 MHz";
    // activation, accuracy, power left absent
    const std::string line = render_scenario_row(row);
    CHECK(line.find("1D") != std::string::npos);
    CHECK(line.find("187") != std::string::npos);
    CHECK(line.find("47560") != std::string::npos);
    CHECK(line.find("-") != std::string::npos);

    const std::string header = render_scenario_header();
    CHECK(header.find("Convolution Type") != std::string::npos);
    CHECK(header.find("Num of MACs") != std::string::npos);
    CHECK(header.find("Power") != std::string::npos);
}

TEST_CASE("history csv lists one line per epoch") {
    const RunArtifact a = sample_artifact();
    const std::string path = "/tmp/ecgbench_history_test.csv";
    save_history_csv(a.history, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "epoch,train_loss,val_loss,seconds");
    std::size_t rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == a.history.epochs.size());
}
