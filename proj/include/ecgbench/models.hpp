#pragma once

#include <string>

#include "ecgbench/data.hpp"
#include "ecgbench/model.hpp"
#include "ecgbench/rbm.hpp"
#include "ecgbench/train.hpp"

namespace ecgbench {

enum class ModelFamily { Lstm, Cnn, Rnn, Dbn };

ModelFamily model_family_from_string(const std::string& name);
std::string to_string(ModelFamily f);

/// Desk-scale architectures over the 187-sample beat. The recurrent models
/// fold the beat into a [17,11] sequence; the CNN consumes it as one
/// channel of length 187.
Model build_lstm_model(std::uint64_t seed);
Model build_cnn_model(std::uint64_t seed);
Model build_rnn_model(std::uint64_t seed);

struct DbnTrainOptions {
    std::vector<std::size_t> hidden_sizes = {64, 32};
    std::size_t pretrain_epochs = 3;
    double pretrain_learning_rate = 0.05;
};

/// Converts a DBN into a sequential model: one sigmoid dense layer per RBM
/// plus the softmax head. Only the top RBM layer and the head are left
/// trainable when freeze_lower is set.
Model dbn_to_model(const Dbn& dbn, bool freeze_lower);

/// Full DBN route: min-max rescale from train statistics, layer-wise CD-1
/// pretraining, then supervised training of the head and top layer. The
/// rescale is baked into the returned model as a fixed affine front layer.
Model train_dbn_model(const Dataset& train, const Dataset& val,
                      const TrainConfig& cfg, const DbnTrainOptions& options,
                      TrainHistory* history_out);

/// Builds the untrained model for a family (DBN without pretraining, for
/// inspection and MAC listings).
Model build_model(ModelFamily family, std::uint64_t seed);

}  // namespace ecgbench
