#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ecgbench/cost.hpp"
#include "ecgbench/data.hpp"
#include "ecgbench/model.hpp"
#include "ecgbench/models.hpp"

using namespace ecgbench;

TEST_CASE("mac_conv formula values") {
    CHECK(mac_conv(1, 1, 1) == 1);
    CHECK(mac_conv(2, 3, 4) == 288);
    CHECK_THROWS(mac_conv(0, 3, 4));
    CHECK_THROWS(mac_conv(2, 0, 4));
}

TEST_CASE("mac_pool formula values and floor flag") {
    bool flag = false;
    CHECK(mac_pool(8, 2, &flag) == 16);
    CHECK_FALSE(flag);
    CHECK(mac_pool(4, 4, &flag) == 1);
    CHECK_FALSE(flag);
    CHECK(mac_pool(7, 2, &flag) == 12);
    CHECK(flag);
    CHECK_THROWS(mac_pool(0, 2));
    CHECK_THROWS(mac_pool(4, 0));
}

TEST_CASE("mac_fc and recurrent step counts") {
    CHECK(mac_fc(187 * 5) == 935);
    CHECK(mac_fc(1) == 1);
    CHECK(mac_rnn_step(1, 1) == 2);
    CHECK(mac_lstm_step(1, 1) == 11);
    CHECK(10 * mac_lstm_step(4, 3) == mac_lstm_step(4, 3) * 10);
}

TEST_CASE("mac_total sums, warns on mixed modes, order-invariant") {
    CHECK(mac_total({}) == 0);
    std::vector<LayerCost> costs = {
        {"conv", LayerKind::Conv, 288, CountMode::PaperFormula, false},
        {"pool", LayerKind::Pool, 16, CountMode::PaperFormula, false},
        {"fc", LayerKind::Fc, 935, CountMode::PaperFormula, false}};
    bool mixed = true;
    CHECK(mac_total(costs, &mixed) == 1239);
    CHECK_FALSE(mixed);

    std::swap(costs[0], costs[2]);
    CHECK(mac_total(costs) == 1239);

    costs[1].mode = CountMode::Exact;
    mac_total(costs, &mixed);
    CHECK(mixed);
}

TEST_CASE("paper formulas reproduce Eq arithmetic on random configs") {
    RngStream rng(101);
    for (int trial = 0; trial < 100; ++trial) {
        const std::uint64_t f = 1 + rng.uniform_int(16);
        const std::uint64_t d = 1 + rng.uniform_int(7);
        const std::uint64_t i = 1 + rng.uniform_int(64);
        const std::uint64_t p = 1 + rng.uniform_int(8);
        const std::uint64_t c = rng.uniform_int(5000);
        CHECK(mac_conv(f, d, i) == f * d * d * i * i);
        CHECK(mac_pool(i, p) == (i * i) / (p * p));
        CHECK(mac_fc(c) == c);

        std::vector<LayerCost> costs = {
            {"a", LayerKind::Conv, mac_conv(f, d, i), CountMode::PaperFormula, false},
            {"b", LayerKind::Pool, mac_pool(i, p), CountMode::PaperFormula, false},
            {"c", LayerKind::Fc, mac_fc(c), CountMode::PaperFormula, false}};
        CHECK(mac_total(costs) == mac_conv(f, d, i) + mac_pool(i, p) + mac_fc(c));
    }
}

TEST_CASE("exact counters equal instrumented loop counts") {
    RngStream rng(103);
    int done = 0;
    while (done < 200) {
        const std::size_t kind = rng.uniform_int(4);
        std::uint64_t counted = 0;
        std::uint64_t predicted = 0;
        if (kind == 0) {  // conv1d
            const std::size_t c_in = 1 + rng.uniform_int(3);
            const std::size_t len = 4 + rng.uniform_int(40);
            const std::size_t f = 1 + rng.uniform_int(4);
            const std::size_t d = 1 + rng.uniform_int(5);
            const std::size_t stride = 1 + rng.uniform_int(3);
            const Padding padding = rng.uniform_int(2) ? Padding::Same : Padding::Valid;
            if (padding == Padding::Valid && d > len) continue;
            Conv1DLayer layer;
            layer.num_filters = f;
            layer.kernel_size = d;
            layer.stride = stride;
            layer.padding = padding;
            layer.weights = random_normal({f, c_in, d}, 0, 1, rng);
            layer.bias = Tensor::zeros({f});
            conv1d_forward(layer, random_normal({c_in, len}, 0, 1, rng), &counted);
            predicted = conv1d_exact_macs(c_in, len, f, d, stride, padding);
        } else if (kind == 1) {  // conv2d
            const std::size_t c_in = 1 + rng.uniform_int(2);
            const std::size_t h = 3 + rng.uniform_int(12);
            const std::size_t w = 3 + rng.uniform_int(12);
            const std::size_t f = 1 + rng.uniform_int(3);
            const std::size_t d = 1 + rng.uniform_int(4);
            const std::size_t stride = 1 + rng.uniform_int(2);
            const Padding padding = rng.uniform_int(2) ? Padding::Same : Padding::Valid;
            if (padding == Padding::Valid && (d > h || d > w)) continue;
            Conv2DLayer layer;
            layer.num_filters = f;
            layer.kernel_size = d;
            layer.stride = stride;
            layer.padding = padding;
            layer.weights = random_normal({f, c_in, d, d}, 0, 1, rng);
            layer.bias = Tensor::zeros({f});
            conv2d_forward(layer, random_normal({c_in, h, w}, 0, 1, rng), &counted);
            predicted = conv2d_exact_macs(c_in, h, w, f, d, stride, padding);
        } else if (kind == 2) {  // pooling
            const std::size_t c = 1 + rng.uniform_int(3);
            const std::size_t len = 4 + rng.uniform_int(40);
            const std::size_t p = 1 + rng.uniform_int(4);
            const std::size_t s = 1 + rng.uniform_int(4);
            if (p > len) continue;
            maxpool1d_forward(MaxPool1DLayer{p, s},
                              random_normal({c, len}, 0, 1, rng), &counted);
            predicted = pool1d_exact_macs(c, len, p, s);
        } else {  // dense
            const std::size_t in_f = 1 + rng.uniform_int(50);
            const std::size_t out_f = 1 + rng.uniform_int(20);
            DenseLayer layer;
            layer.weights = random_normal({out_f, in_f}, 0, 1, rng);
            layer.bias = Tensor::zeros({out_f});
            dense_forward(layer, random_normal({in_f}, 0, 1, rng), &counted);
            predicted = dense_exact_macs(in_f, out_f);
        }
        CHECK(counted == predicted);
        ++done;
    }
}

TEST_CASE("paper vs exact divergence for valid conv is the documented delta") {
    // Single channel, stride 1, valid: exact = F*D^2*(I-D+1)^2.
    const std::uint64_t f = 3, d = 5, i = 16;
    const std::uint64_t exact = conv2d_exact_macs(1, i, i, f, d, 1, Padding::Valid);
    CHECK(exact == f * d * d * (i - d + 1) * (i - d + 1));
    const std::uint64_t paper = mac_conv(f, d, i);
    CHECK(paper - exact == (i * i - (i - d + 1) * (i - d + 1)) * f * d * d);
}

TEST_CASE("simulation time and throughput") {
    CHECK(simulation_time(10.0, 100) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(simulation_time(0.0, 7) == 0.0);
    CHECK(simulation_time(3.5, 1) == 3.5);
    CHECK_THROWS(simulation_time(1.0, 0));

    CHECK(throughput(1000, 0.5) == doctest::Approx(2000.0).epsilon(1e-12));
    CHECK(throughput(2000, 0.5) == doctest::Approx(2.0 * throughput(1000, 0.5)));
    CHECK_THROWS(throughput(1000, 0.0));

    CHECK(throughput(47560, 0.014) == doctest::Approx(3.397e6).epsilon(1e-3));
}

TEST_CASE("perf report identities") {
    RngStream rng(107);
    for (int trial = 0; trial < 100; ++trial) {
        const std::uint64_t macs = 1 + rng.uniform_int(1000000);
        const double total_time = 1e-6 + rng.uniform() * 10.0;
        const std::uint64_t samples = 1 + rng.uniform_int(1000);
        const PerfReport r = make_perf_report(macs, total_time, samples);
        CHECK(std::abs(r.simulation_time_s - total_time / samples) <=
              1e-9 * std::abs(r.simulation_time_s));
        CHECK(std::abs(r.throughput_macs_per_s - macs / r.simulation_time_s) <=
              1e-9 * std::abs(r.throughput_macs_per_s));
        CHECK(r.throughput_gops == doctest::Approx(r.throughput_macs_per_s * 1e-9)
                                       .epsilon(1e-12));
    }
}

TEST_CASE("accelerator latency estimator") {
    AcceleratorSpec spec{100e6, 100, "test"};
    CHECK(estimate_accelerator_latency(1000000, spec, 1.0) == 1e-4);
    CHECK(estimate_accelerator_latency(1000000, spec, 0.5) ==
          doctest::Approx(2e-4).epsilon(1e-12));
    CHECK_THROWS(estimate_accelerator_latency(1000, spec, 0.0));
    CHECK_THROWS(estimate_accelerator_latency(1000, spec, 1.5));

    RngStream rng(109);
    for (int trial = 0; trial < 1000; ++trial) {
        AcceleratorSpec a{1e6 + rng.uniform() * 1e9, 1 + rng.uniform_int(1024), ""};
        AcceleratorSpec faster = a;
        faster.clock_hz *= 1.0 + rng.uniform();
        AcceleratorSpec wider = a;
        wider.macs_per_cycle += 1 + rng.uniform_int(64);
        const std::uint64_t macs = 1 + rng.uniform_int(10000000);
        const double base = estimate_accelerator_latency(macs, a, 1.0);
        CHECK(estimate_accelerator_latency(macs, faster, 1.0) < base);
        CHECK(estimate_accelerator_latency(macs, wider, 1.0) < base);
        CHECK(estimate_accelerator_latency(macs + 1000, a, 1.0) > base);
    }
}

TEST_CASE("measure_latency identities") {
    RngStream rng(113);
    Model model = build_cnn_model(5);
    const Dataset ds = synth_generate({2, 2, 2, 2, 2}, 3);

    const LatencyMeasurement m = measure_latency(model, ds, 5);
    CHECK(m.repeats == 5);
    CHECK(m.num_samples == ds.size());
    CHECK(m.per_sample_min_s <= m.per_sample_mean_s);
    CHECK(m.per_sample_mean_s ==
          doctest::Approx(m.total_time_s / (ds.size() * 5.0)).epsilon(1e-9));

    const LatencyMeasurement single = measure_latency(model, ds, 1);
    CHECK(single.per_sample_min_s == single.per_sample_mean_s);
    CHECK(single.per_sample_stddev_s == 0.0);

    Dataset empty;
    CHECK_THROWS(measure_latency(model, empty, 1));
}

TEST_CASE("model layer costs list both modes") {
    Model model = build_cnn_model(7);
    model.forward(Tensor::zeros({kBeatSamples}));
    const auto exact = model_layer_costs(model, CountMode::Exact);
    const auto paper = model_layer_costs(model, CountMode::PaperFormula);
    CHECK(exact.size() == paper.size());
    CHECK(mac_total(exact) > 0);
    for (const LayerCost& c : exact) CHECK(c.mode == CountMode::Exact);
    // Modes disagree for this architecture (valid convolutions).
    CHECK(mac_total(exact) != mac_total(paper));
}
