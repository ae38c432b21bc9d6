#include "ecgbench/models.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>

namespace ecgbench {

ModelFamily model_family_from_string(const std::string& name) {
    if (name == "lstm") return ModelFamily::Lstm;
    if (name == "cnn") return ModelFamily::Cnn;
    if (name == "rnn") return ModelFamily::Rnn;
    if (name == "dbn") return ModelFamily::Dbn;
    throw std::invalid_argument("unknown model family '" + name + "'");
}

std::string to_string(ModelFamily f) {
    switch (f) {
        case ModelFamily::Lstm: return "lstm";
        case ModelFamily::Cnn: return "cnn";
        case ModelFamily::Rnn: return "rnn";
        case ModelFamily::Dbn: return "dbn";
    }
    return "?";
}

// 187 = 17 * 11: sequence models read the beat as 17 steps of 11 samples.
namespace {
constexpr std::size_t kSeqSteps = 17;
constexpr std::size_t kSeqFeatures = 11;
}  // namespace

Model build_lstm_model(std::uint64_t seed) {
    RngStream rng(seed);
    Model m;
    m.add(std::make_unique<ReshapeL>(std::vector<std::size_t>{kSeqSteps, kSeqFeatures}));
    m.add(std::make_unique<LstmL>(kSeqFeatures, 32, /*return_sequences=*/true, rng));
    m.add(std::make_unique<LstmL>(32, 16, /*return_sequences=*/false, rng));
    m.add(std::make_unique<DenseL>(16, kNumClasses, Activation::Softmax, rng));
    return m;
}

Model build_cnn_model(std::uint64_t seed) {
    RngStream rng(seed);
    Model m;
    m.add(std::make_unique<ReshapeL>(std::vector<std::size_t>{1, kBeatSamples}));
    m.add(std::make_unique<Conv1DL>(1, 8, 5, 1, Padding::Valid, Activation::Relu, rng));
    m.add(std::make_unique<MaxPool1DL>(2, 2));
    m.add(std::make_unique<Conv1DL>(8, 16, 5, 1, Padding::Valid, Activation::Relu, rng));
    m.add(std::make_unique<MaxPool1DL>(2, 2));
    m.add(std::make_unique<FlattenL>());
    m.add(std::make_unique<DenseL>(16 * 43, 32, Activation::Relu, rng));
    m.add(std::make_unique<DropoutL>(0.2));
    m.add(std::make_unique<DenseL>(32, kNumClasses, Activation::Softmax, rng));
    return m;
}

Model build_rnn_model(std::uint64_t seed) {
    RngStream rng(seed);
    Model m;
    m.add(std::make_unique<ReshapeL>(std::vector<std::size_t>{kSeqSteps, kSeqFeatures}));
    m.add(std::make_unique<RnnL>(kSeqFeatures, 32, Activation::Tanh, rng));
    // Linear output head with softmax applied for class probabilities.
    m.add(std::make_unique<DenseL>(32, kNumClasses, Activation::Softmax, rng));
    return m;
}

namespace {

void append_dbn_layers(Model& m, const Dbn& dbn, bool freeze_lower) {
    for (std::size_t i = 0; i < dbn.layers.size(); ++i) {
        const Rbm& rbm = dbn.layers[i];
        const bool trainable = !freeze_lower || i + 1 == dbn.layers.size();
        // Dense view of the RBM conditional: sigmoid(b + W^T x).
        m.add(std::make_unique<DenseL>(transpose(rbm.weights), rbm.hidden_bias,
                                       Activation::Sigmoid, trainable));
    }
    m.add(std::make_unique<DenseL>(dbn.head.weights, dbn.head.bias,
                                   Activation::Softmax, /*trainable=*/true));
}

}  // namespace

Model dbn_to_model(const Dbn& dbn, bool freeze_lower) {
    Model m;
    append_dbn_layers(m, dbn, freeze_lower);
    return m;
}

namespace {

/// Per-feature affine map sending the train range to [0,1]; constant
/// features map to 0.5.
std::pair<Tensor, Tensor> minmax_affine(const Dataset& train) {
    Tensor scale_vec({kBeatSamples});
    Tensor shift_vec({kBeatSamples});
    for (std::size_t j = 0; j < kBeatSamples; ++j) {
        double lo = train.records.front().samples[j], hi = lo;
        for (const BeatRecord& r : train.records) {
            lo = std::min(lo, r.samples[j]);
            hi = std::max(hi, r.samples[j]);
        }
        if (hi > lo) {
            scale_vec.at(j) = 1.0 / (hi - lo);
            shift_vec.at(j) = -lo / (hi - lo);
        } else {
            scale_vec.at(j) = 0.0;
            shift_vec.at(j) = 0.5;
        }
    }
    return {scale_vec, shift_vec};
}

}  // namespace

Model train_dbn_model(const Dataset& train, const Dataset& val,
                      const TrainConfig& cfg, const DbnTrainOptions& options,
                      TrainHistory* history_out) {
    RngStream rng(cfg.seed);
    auto [scale_vec, shift_vec] = minmax_affine(train);

    // Pretraining data as [0,1] probabilities.
    Tensor data({train.size(), kBeatSamples});
    for (std::size_t i = 0; i < train.size(); ++i)
        for (std::size_t j = 0; j < kBeatSamples; ++j) {
            const double v =
                train.records[i].samples[j] * scale_vec.at(j) + shift_vec.at(j);
            data.at(i, j) = std::clamp(v, 0.0, 1.0);
        }

    Dbn dbn = Dbn::build(kBeatSamples, options.hidden_sizes, kNumClasses, 0.01, rng);
    pretrain_layerwise(dbn, data, options.pretrain_epochs,
                       options.pretrain_learning_rate, rng);

    Model m;
    m.add(std::make_unique<AffineL>(scale_vec, shift_vec));
    append_dbn_layers(m, dbn, /*freeze_lower=*/true);

    TrainHistory history = fit(m, train, val, cfg);
    if (history_out) *history_out = history;
    return m;
}

Model build_model(ModelFamily family, std::uint64_t seed) {
    switch (family) {
        case ModelFamily::Lstm: return build_lstm_model(seed);
        case ModelFamily::Cnn: return build_cnn_model(seed);
        case ModelFamily::Rnn: return build_rnn_model(seed);
        case ModelFamily::Dbn: {
            RngStream rng(seed);
            Dbn dbn = Dbn::build(kBeatSamples, {64, 32}, kNumClasses, 0.01, rng);
            return dbn_to_model(dbn, /*freeze_lower=*/false);
        }
    }
    throw std::logic_error("build_model: unreachable");
}

}  // namespace ecgbench
