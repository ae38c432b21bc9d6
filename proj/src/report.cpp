#include "ecgbench/report.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace ecgbench {

namespace {

using nlohmann::json;

json config_to_json(const RunConfig& c) {
    return json{{"model", c.model},
                {"data_source", c.data_source},
                {"noise_sigma", c.noise_sigma},
                {"smote", c.smote},
                {"smote_k", c.smote_k},
                {"split",
                 {{"train_fraction", c.split.train_fraction},
                  {"stratified", c.split.stratified},
                  {"seed", c.split.seed}}},
                {"train",
                 {{"epochs", c.train.epochs},
                  {"learning_rate", c.train.learning_rate},
                  {"batch_size", c.train.batch_size},
                  {"optimizer", to_string(c.train.optimizer)},
                  {"patience", c.train.patience},
                  {"min_delta", c.train.min_delta},
                  {"seed", c.train.seed}}},
                {"seed", c.seed}};
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    c.model = j.at("model").get<std::string>();
    c.data_source = j.at("data_source").get<std::string>();
    c.noise_sigma = j.at("noise_sigma").get<double>();
    c.smote = j.at("smote").get<bool>();
    c.smote_k = j.at("smote_k").get<std::size_t>();
    const json& s = j.at("split");
    c.split.train_fraction = s.at("train_fraction").get<double>();
    c.split.stratified = s.at("stratified").get<bool>();
    c.split.seed = s.at("seed").get<std::uint64_t>();
    const json& t = j.at("train");
    c.train.epochs = t.at("epochs").get<std::size_t>();
    c.train.learning_rate = t.at("learning_rate").get<double>();
    c.train.batch_size = t.at("batch_size").get<std::size_t>();
    c.train.optimizer = optimizer_from_string(t.at("optimizer").get<std::string>());
    c.train.patience = t.at("patience").get<std::size_t>();
    c.train.min_delta = t.at("min_delta").get<double>();
    c.train.seed = t.at("seed").get<std::uint64_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

json metrics_to_json(const MetricsReport& m) {
    json confusion = json::array();
    for (const auto& row : m.confusion) confusion.push_back(row);
    return json{{"accuracy", m.accuracy},
                {"macro_precision", m.macro_precision},
                {"macro_recall", m.macro_recall},
                {"macro_f1", m.macro_f1},
                {"precision", m.precision},
                {"recall", m.recall},
                {"f1", m.f1},
                {"param_count", m.param_count},
                {"confusion", confusion}};
}

MetricsReport metrics_from_json(const json& j) {
    MetricsReport m;
    m.accuracy = j.at("accuracy").get<double>();
    m.macro_precision = j.at("macro_precision").get<double>();
    m.macro_recall = j.at("macro_recall").get<double>();
    m.macro_f1 = j.at("macro_f1").get<double>();
    m.precision = j.at("precision").get<std::array<double, kNumClasses>>();
    m.recall = j.at("recall").get<std::array<double, kNumClasses>>();
    m.f1 = j.at("f1").get<std::array<double, kNumClasses>>();
    m.param_count = j.at("param_count").get<std::size_t>();
    const json& confusion = j.at("confusion");
    for (std::size_t i = 0; i < kNumClasses; ++i)
        m.confusion[i] = confusion.at(i).get<std::array<std::size_t, kNumClasses>>();
    return m;
}

}  // namespace

std::string artifact_to_json(const RunArtifact& a) {
    json history{{"best_epoch", a.history.best_epoch},
                 {"early_stopped", a.history.early_stopped},
                 {"train_loss", json::array()},
                 {"val_loss", json::array()}};
    for (const EpochStats& e : a.history.epochs) {
        history["train_loss"].push_back(e.train_loss);
        history["val_loss"].push_back(e.val_loss);
    }
    json timing{{"training_time_s", a.training_time_s},
                {"epoch_seconds", json::array()},
                {"latency",
                 {{"total_time_s", a.latency.total_time_s},
                  {"per_sample_mean_s", a.latency.per_sample_mean_s},
                  {"per_sample_min_s", a.latency.per_sample_min_s},
                  {"per_sample_stddev_s", a.latency.per_sample_stddev_s},
                  {"repeats", a.latency.repeats},
                  {"num_samples", a.latency.num_samples}}},
                {"perf",
                 {{"total_inference_time_s", a.perf.total_inference_time_s},
                  {"num_samples", a.perf.num_samples},
                  {"simulation_time_s", a.perf.simulation_time_s},
                  {"throughput_macs_per_s", a.perf.throughput_macs_per_s},
                  {"throughput_gops", a.perf.throughput_gops}}}};
    for (const EpochStats& e : a.history.epochs)
        timing["epoch_seconds"].push_back(e.seconds);

    json j{{"schema_version", a.schema_version},
           {"tool_version", a.tool_version},
           {"config", config_to_json(a.config)},
           {"metrics", metrics_to_json(a.metrics)},
           {"total_macs", a.total_macs},
           {"history", history},
           {"timing", timing}};
    return j.dump(2) + "\n";
}

RunArtifact artifact_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    RunArtifact a;
    a.schema_version = j.at("schema_version").get<int>();
    a.tool_version = j.at("tool_version").get<std::string>();
    a.config = config_from_json(j.at("config"));
    a.metrics = metrics_from_json(j.at("metrics"));
    a.total_macs = j.at("total_macs").get<std::uint64_t>();

    const json& history = j.at("history");
    a.history.best_epoch = history.at("best_epoch").get<std::size_t>();
    a.history.early_stopped = history.at("early_stopped").get<bool>();
    const json& timing = j.at("timing");
    const auto& train_loss = history.at("train_loss");
    const auto& val_loss = history.at("val_loss");
    const auto& epoch_seconds = timing.at("epoch_seconds");
    for (std::size_t i = 0; i < train_loss.size(); ++i) {
        EpochStats e;
        e.train_loss = train_loss.at(i).get<double>();
        e.val_loss = val_loss.at(i).get<double>();
        e.seconds = epoch_seconds.at(i).get<double>();
        a.history.epochs.push_back(e);
        a.history.total_seconds += e.seconds;
    }
    a.training_time_s = timing.at("training_time_s").get<double>();
    const json& lat = timing.at("latency");
    a.latency.total_time_s = lat.at("total_time_s").get<double>();
    a.latency.per_sample_mean_s = lat.at("per_sample_mean_s").get<double>();
    a.latency.per_sample_min_s = lat.at("per_sample_min_s").get<double>();
    a.latency.per_sample_stddev_s = lat.at("per_sample_stddev_s").get<double>();
    a.latency.repeats = lat.at("repeats").get<std::size_t>();
    a.latency.num_samples = lat.at("num_samples").get<std::size_t>();
    const json& perf = timing.at("perf");
    a.perf.total_macs = a.total_macs;
    a.perf.total_inference_time_s = perf.at("total_inference_time_s").get<double>();
    a.perf.num_samples = perf.at("num_samples").get<std::uint64_t>();
    a.perf.simulation_time_s = perf.at("simulation_time_s").get<double>();
    a.perf.throughput_macs_per_s = perf.at("throughput_macs_per_s").get<double>();
    a.perf.throughput_gops = perf.at("throughput_gops").get<double>();
    return a;
}

void save_artifact(const RunArtifact& artifact, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write artifact '" + path + "'");
    out << artifact_to_json(artifact);
    if (!out) throw std::runtime_error("write failure on '" + path + "'");
}

RunArtifact load_artifact(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read artifact '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return artifact_from_json(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("corrupt artifact '" + path + "': " + e.what());
    }
}

const std::vector<std::string>& comparison_columns() {
    static const std::vector<std::string> columns = {
        "Accuracy",      "Precision",
        "Recall",        "F1-score",
        "Training time", "Model complexity (params)",
        "Throughput [GOP/s]", "Latency"};
    return columns;
}

namespace {

constexpr int kModelWidth = 8;
constexpr int kColWidth = 26;

std::string pad(const std::string& s, int width) {
    std::string out = s;
    if (static_cast<int>(out.size()) < width)
        out.append(static_cast<std::size_t>(width - static_cast<int>(out.size())), ' ');
    return out;
}

std::string percent(double fraction) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << fraction * 100.0 << "%";
    return os.str();
}

}  // namespace

std::string render_comparison_header() {
    std::string line = pad("Models", kModelWidth);
    for (const std::string& c : comparison_columns()) line += pad(c, kColWidth);
    return line;
}

std::string render_comparison_row(const std::string& model_name,
                                  const MetricsReport& metrics,
                                  const PerfReport& perf) {
    std::ostringstream time_s, gops, latency;
    time_s << std::fixed << std::setprecision(2) << metrics.training_time_s << " s";
    gops << std::scientific << std::setprecision(4) << perf.throughput_gops;
    latency << std::fixed << std::setprecision(4)
            << perf.simulation_time_s * 1e3 << " ms";

    std::string line = pad(model_name, kModelWidth);
    line += pad(percent(metrics.accuracy), kColWidth);
    line += pad(percent(metrics.macro_precision), kColWidth);
    line += pad(percent(metrics.macro_recall), kColWidth);
    line += pad(percent(metrics.macro_f1), kColWidth);
    line += pad(time_s.str(), kColWidth);
    line += pad(std::to_string(metrics.param_count), kColWidth);
    line += pad(gops.str(), kColWidth);
    line += pad(latency.str(), kColWidth);
    return line;
}

namespace {
const std::vector<std::string>& scenario_columns() {
    static const std::vector<std::string> columns = {
        "Convolution Type", "Platform", "No. Input Samples", "Activation",
        "Num of MACs",      "Clock",    "Accuracy",          "Power"};
    return columns;
}

std::string opt_str(const std::optional<std::string>& v) { return v ? *v : "-"; }
std::string opt_num(const std::optional<std::uint64_t>& v) {
    return v ? std::to_string(*v) : "-";
}
}  // namespace

std::string render_scenario_header() {
    std::string line;
    for (const std::string& c : scenario_columns()) line += pad(c, 20);
    return line;
}

std::string render_scenario_row(const ScenarioRow& row) {
    std::string line;
    line += pad(opt_str(row.convolution_type), 20);
    line += pad(opt_str(row.platform), 20);
    line += pad(opt_num(row.input_samples), 20);
    line += pad(opt_str(row.activation), 20);
    line += pad(opt_num(row.num_macs), 20);
    line += pad(opt_str(row.clock), 20);
    line += pad(opt_str(row.accuracy), 20);
    line += pad(opt_str(row.power), 20);
    return line;
}

void save_history_csv(const TrainHistory& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write history '" + path + "'");
    out << "epoch,train_loss,val_loss,seconds\n";
    for (std::size_t i = 0; i < history.epochs.size(); ++i) {
        const EpochStats& e = history.epochs[i];
        out << i + 1 << ',' << std::setprecision(17) << e.train_loss << ','
            << e.val_loss << ',' << e.seconds << '\n';
    }
}

}  // namespace ecgbench
