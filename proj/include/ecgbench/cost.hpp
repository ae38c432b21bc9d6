#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecgbench/layers.hpp"

namespace ecgbench {

enum class LayerKind { Conv, Pool, Fc, Recurrent, Other };
enum class CountMode { PaperFormula, Exact };

std::string to_string(LayerKind k);
std::string to_string(CountMode m);

struct LayerCost {
    std::string layer_id;
    LayerKind kind = LayerKind::Other;
    std::uint64_t macs = 0;
    CountMode mode = CountMode::PaperFormula;
    bool non_divisible = false;  // pool window did not divide the input
};

/// MAC_Conv = F * D^2 * I^2 (square-input convention, channels ignored).
std::uint64_t mac_conv(std::uint64_t f, std::uint64_t d, std::uint64_t i);
/// MAC_Pool = I^2 / P^2, floored; `non_divisible`, when given, is set when
/// P^2 does not divide I^2.
std::uint64_t mac_pool(std::uint64_t i, std::uint64_t p, bool* non_divisible = nullptr);
/// MAC_FC = C (connection count).
std::uint64_t mac_fc(std::uint64_t connections);
/// Per-step LSTM cost: four gate products plus the three elementwise
/// products of the state update and output.
std::uint64_t mac_lstm_step(std::uint64_t hidden, std::uint64_t input);
/// Per-step vanilla RNN cost: H*(H+X).
std::uint64_t mac_rnn_step(std::uint64_t hidden, std::uint64_t input);

/// MAC_Total = sum of entries. `mixed_modes`, when given, is set when the
/// list combines paper-formula and exact entries.
std::uint64_t mac_total(const std::vector<LayerCost>& costs,
                        bool* mixed_modes = nullptr);

// Exact counters matching the instrumented forward loops (padding skips
// included).
std::uint64_t conv1d_exact_macs(std::size_t c_in, std::size_t len, std::size_t f,
                                std::size_t d, std::size_t stride, Padding padding);
std::uint64_t conv2d_exact_macs(std::size_t c_in, std::size_t h, std::size_t w,
                                std::size_t f, std::size_t d, std::size_t stride,
                                Padding padding);
std::uint64_t pool1d_exact_macs(std::size_t c, std::size_t len, std::size_t p,
                                std::size_t s);
std::uint64_t pool2d_exact_macs(std::size_t c, std::size_t h, std::size_t w,
                                std::size_t p, std::size_t s);
std::uint64_t dense_exact_macs(std::size_t in_features, std::size_t out_features);

struct PerfReport {
    std::uint64_t total_macs = 0;          // per-inference MAC count
    double total_inference_time_s = 0.0;
    std::uint64_t num_samples = 0;
    double simulation_time_s = 0.0;        // per-sample latency
    double throughput_macs_per_s = 0.0;
    double throughput_gops = 0.0;          // 1 MAC counted as 1 op
};

double simulation_time(double total_time_s, std::uint64_t num_samples);
double throughput(std::uint64_t total_macs, double latency_s);

PerfReport make_perf_report(std::uint64_t total_macs, double total_time_s,
                            std::uint64_t num_samples);

struct AcceleratorSpec {
    double clock_hz = 100e6;
    std::uint64_t macs_per_cycle = 64;
    std::string name;
};

/// Idealized roofline latency: macs / (macs_per_cycle * efficiency) cycles
/// at the given clock.
double estimate_accelerator_latency(std::uint64_t total_macs,
                                    const AcceleratorSpec& spec,
                                    double efficiency);

class Model;
struct Dataset;

struct LatencyMeasurement {
    double total_time_s = 0.0;       // sum over repeats, warm-up excluded
    double per_sample_mean_s = 0.0;
    double per_sample_min_s = 0.0;   // min over repeats; primary statistic
    double per_sample_stddev_s = 0.0;
    std::size_t repeats = 0;
    std::size_t num_samples = 0;
};

/// Times `repeats` full inference passes over the dataset on the calling
/// thread, after one untimed warm-up pass.
LatencyMeasurement measure_latency(Model& model, const Dataset& ds,
                                   std::size_t repeats);

/// Per-layer cost listing for a model; requires one forward pass to have
/// been run so layer shapes are known.
std::vector<LayerCost> model_layer_costs(const Model& model, CountMode mode);

}  // namespace ecgbench
