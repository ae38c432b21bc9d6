#include "ecgbench/cost.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "ecgbench/data.hpp"
#include "ecgbench/model.hpp"

namespace ecgbench {

std::string to_string(LayerKind k) {
    switch (k) {
        case LayerKind::Conv: return "conv";
        case LayerKind::Pool: return "pool";
        case LayerKind::Fc: return "fc";
        case LayerKind::Recurrent: return "recurrent";
        case LayerKind::Other: return "other";
    }
    return "?";
}

std::string to_string(CountMode m) {
    return m == CountMode::PaperFormula ? "paper_formula" : "exact";
}

std::uint64_t mac_conv(std::uint64_t f, std::uint64_t d, std::uint64_t i) {
    if (f == 0 || d == 0 || i == 0) {
        throw std::invalid_argument("mac_conv: arguments must be positive");
    }
    return f * d * d * i * i;
}

std::uint64_t mac_pool(std::uint64_t i, std::uint64_t p, bool* non_divisible) {
    if (i == 0 || p == 0) {
        throw std::invalid_argument("mac_pool: arguments must be positive");
    }
    if (non_divisible) *non_divisible = (i * i) % (p * p) != 0;
    return (i * i) / (p * p);
}

std::uint64_t mac_fc(std::uint64_t connections) { return connections; }

std::uint64_t mac_lstm_step(std::uint64_t hidden, std::uint64_t input) {
    return 4 * hidden * (hidden + input) + 3 * hidden;
}

std::uint64_t mac_rnn_step(std::uint64_t hidden, std::uint64_t input) {
    return hidden * (hidden + input);
}

std::uint64_t mac_total(const std::vector<LayerCost>& costs, bool* mixed_modes) {
    std::uint64_t total = 0;
    bool saw_paper = false, saw_exact = false;
    for (const LayerCost& c : costs) {
        total += c.macs;
        (c.mode == CountMode::PaperFormula ? saw_paper : saw_exact) = true;
    }
    if (mixed_modes) *mixed_modes = saw_paper && saw_exact;
    return total;
}

std::uint64_t conv1d_exact_macs(std::size_t c_in, std::size_t len, std::size_t f,
                                std::size_t d, std::size_t stride, Padding padding) {
    const std::size_t ol = conv_output_size(len, d, stride, padding);
    const std::size_t p0 = pad_before(len, d, stride, padding);
    std::uint64_t taps = 0;
    for (std::size_t j = 0; j < ol; ++j) {
        for (std::size_t m = 0; m < d; ++m) {
            const std::ptrdiff_t jj = static_cast<std::ptrdiff_t>(j * stride + m) -
                                      static_cast<std::ptrdiff_t>(p0);
            if (jj >= 0 && jj < static_cast<std::ptrdiff_t>(len)) ++taps;
        }
    }
    return taps * static_cast<std::uint64_t>(f) * c_in;
}

std::uint64_t conv2d_exact_macs(std::size_t c_in, std::size_t h, std::size_t w,
                                std::size_t f, std::size_t d, std::size_t stride,
                                Padding padding) {
    const std::size_t oh = conv_output_size(h, d, stride, padding);
    const std::size_t ow = conv_output_size(w, d, stride, padding);
    const std::size_t ph = pad_before(h, d, stride, padding);
    const std::size_t pw = pad_before(w, d, stride, padding);
    auto in_range_taps = [d, stride](std::size_t out, std::size_t pad,
                                     std::size_t extent) {
        std::uint64_t taps = 0;
        for (std::size_t j = 0; j < out; ++j)
            for (std::size_t m = 0; m < d; ++m) {
                const std::ptrdiff_t jj = static_cast<std::ptrdiff_t>(j * stride + m) -
                                          static_cast<std::ptrdiff_t>(pad);
                if (jj >= 0 && jj < static_cast<std::ptrdiff_t>(extent)) ++taps;
            }
        return taps;
    };
    // Row and column validity are independent, so taps factorize per axis.
    return in_range_taps(oh, ph, h) * in_range_taps(ow, pw, w) *
           static_cast<std::uint64_t>(f) * c_in;
}

std::uint64_t pool1d_exact_macs(std::size_t c, std::size_t len, std::size_t p,
                                std::size_t s) {
    if (p > len) throw std::invalid_argument("pool1d_exact_macs: window too large");
    return static_cast<std::uint64_t>(c) * ((len - p) / s + 1);
}

std::uint64_t pool2d_exact_macs(std::size_t c, std::size_t h, std::size_t w,
                                std::size_t p, std::size_t s) {
    if (p > h || p > w) throw std::invalid_argument("pool2d_exact_macs: window too large");
    return static_cast<std::uint64_t>(c) * ((h - p) / s + 1) * ((w - p) / s + 1);
}

std::uint64_t dense_exact_macs(std::size_t in_features, std::size_t out_features) {
    return static_cast<std::uint64_t>(in_features) * out_features;
}

double simulation_time(double total_time_s, std::uint64_t num_samples) {
    if (num_samples == 0) throw std::invalid_argument("simulation_time: zero samples");
    if (total_time_s < 0.0) throw std::invalid_argument("simulation_time: negative time");
    return total_time_s / static_cast<double>(num_samples);
}

double throughput(std::uint64_t total_macs, double latency_s) {
    if (latency_s <= 0.0) throw std::invalid_argument("throughput: latency must be positive");
    return static_cast<double>(total_macs) / latency_s;
}

PerfReport make_perf_report(std::uint64_t total_macs, double total_time_s,
                            std::uint64_t num_samples) {
    PerfReport r;
    r.total_macs = total_macs;
    r.total_inference_time_s = total_time_s;
    r.num_samples = num_samples;
    r.simulation_time_s = simulation_time(total_time_s, num_samples);
    r.throughput_macs_per_s = throughput(total_macs, r.simulation_time_s);
    r.throughput_gops = r.throughput_macs_per_s * 1e-9;
    return r;
}

double estimate_accelerator_latency(std::uint64_t total_macs,
                                    const AcceleratorSpec& spec,
                                    double efficiency) {
    if (efficiency <= 0.0 || efficiency > 1.0) {
        throw std::invalid_argument("estimate_accelerator_latency: efficiency must lie in (0,1]");
    }
    if (spec.clock_hz <= 0.0 || spec.macs_per_cycle == 0) {
        throw std::invalid_argument("estimate_accelerator_latency: bad accelerator spec");
    }
    const double cycles = static_cast<double>(total_macs) /
                          (static_cast<double>(spec.macs_per_cycle) * efficiency);
    return cycles / spec.clock_hz;
}

LatencyMeasurement measure_latency(Model& model, const Dataset& ds,
                                   std::size_t repeats) {
    if (ds.empty()) throw std::invalid_argument("measure_latency: empty dataset");
    if (repeats < 1) throw std::invalid_argument("measure_latency: repeats must be >= 1");

    std::vector<Tensor> inputs;
    inputs.reserve(ds.size());
    for (const BeatRecord& r : ds.records)
        inputs.push_back(Tensor::from_vector({r.samples.begin(), r.samples.end()}));

    volatile double sink = 0.0;  // keep the pass from being optimized away
    auto run_pass = [&] {
        for (const Tensor& x : inputs) sink = sink + model.forward(x)[0];
    };

    run_pass();  // warm-up, untimed

    using clock = std::chrono::steady_clock;
    std::vector<double> pass_times;
    pass_times.reserve(repeats);
    for (std::size_t r = 0; r < repeats; ++r) {
        const auto t0 = clock::now();
        run_pass();
        const auto t1 = clock::now();
        pass_times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }

    LatencyMeasurement m;
    m.repeats = repeats;
    m.num_samples = ds.size();
    const double n = static_cast<double>(ds.size());
    double min_pass = pass_times.front();
    for (double t : pass_times) {
        m.total_time_s += t;
        min_pass = std::min(min_pass, t);
    }
    m.per_sample_mean_s = m.total_time_s / (static_cast<double>(repeats) * n);
    m.per_sample_min_s = min_pass / n;
    double var = 0.0;
    for (double t : pass_times) {
        const double d = t / n - m.per_sample_mean_s;
        var += d * d;
    }
    m.per_sample_stddev_s = std::sqrt(var / static_cast<double>(repeats));
    return m;
}

std::vector<LayerCost> model_layer_costs(const Model& model, CountMode mode) {
    std::vector<LayerCost> out;
    for (const auto& layer : model.layers()) {
        if (layer->kind() == LayerKind::Other) continue;
        LayerCost c;
        c.layer_id = layer->name();
        c.kind = layer->kind();
        c.mode = mode;
        if (mode == CountMode::Exact) {
            c.macs = layer->exact_macs();
        } else {
            c.macs = layer->paper_macs(&c.non_divisible);
        }
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace ecgbench
