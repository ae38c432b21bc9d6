#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecgbench/data.hpp"
#include "ecgbench/model.hpp"

namespace ecgbench {

enum class Optimizer { Sgd, Adam };

Optimizer optimizer_from_string(const std::string& name);
std::string to_string(Optimizer o);

struct TrainConfig {
    std::size_t epochs = 20;
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    Optimizer optimizer = Optimizer::Adam;
    std::size_t patience = 5;
    double min_delta = 1e-4;
    std::uint64_t seed = 0;
};

struct EpochStats {
    double train_loss = 0.0;
    double val_loss = 0.0;
    double seconds = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    std::size_t best_epoch = 0;  // 0-based index into epochs
    bool early_stopped = false;
    double total_seconds = 0.0;
};

/// Raised when training produces a non-finite loss.
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mean of -log(probability of the true class); probabilities clamped at
/// 1e-12. Rows must sum to 1 within 1e-6.
double cross_entropy_loss(const Tensor& probs, const std::vector<int>& labels);

/// Per-sample gradient accumulation over a batch: runs forward in training
/// mode, adds dLoss/dparam into the model's gradient tensors, and returns
/// the mean batch loss. Gradients are scaled by 1/batch_size.
double accumulate_batch_gradients(Model& model,
                                  const std::vector<const BeatRecord*>& batch,
                                  RngStream* dropout_rng);

/// Mini-batch training with early stopping. Stops once validation loss has
/// failed to improve by more than min_delta for patience+1 consecutive
/// epochs, restoring the best-epoch parameters.
TrainHistory fit(Model& model, const Dataset& train, const Dataset& val,
                 const TrainConfig& cfg);

struct MetricsReport {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    std::array<double, kNumClasses> precision{};
    std::array<double, kNumClasses> recall{};
    std::array<double, kNumClasses> f1{};
    double training_time_s = 0.0;
    std::size_t param_count = 0;
    std::array<std::array<std::size_t, kNumClasses>, kNumClasses> confusion{};
};

/// Argmax predictions against true labels. confusion[true][pred]; macro
/// averages treat 0/0 as 0.
MetricsReport evaluate(Model& model, const Dataset& ds);

std::size_t param_count(Model& model);

}  // namespace ecgbench
