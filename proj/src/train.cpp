#include "ecgbench/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace ecgbench {

Optimizer optimizer_from_string(const std::string& name) {
    if (name == "sgd") return Optimizer::Sgd;
    if (name == "adam") return Optimizer::Adam;
    throw std::invalid_argument("unknown optimizer '" + name + "'");
}

std::string to_string(Optimizer o) {
    return o == Optimizer::Sgd ? "sgd" : "adam";
}

double cross_entropy_loss(const Tensor& probs, const std::vector<int>& labels) {
    if (probs.rank() != 2 || probs.dim(0) != labels.size()) {
        throw std::invalid_argument("cross_entropy_loss: probs must be [N,classes]");
    }
    const std::size_t classes = probs.dim(1);
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
            throw std::invalid_argument("cross_entropy_loss: label out of range");
        }
        double row_sum = 0.0;
        for (std::size_t j = 0; j < classes; ++j) row_sum += probs.at(i, j);
        if (std::abs(row_sum - 1.0) > 1e-6) {
            throw std::invalid_argument("cross_entropy_loss: row does not sum to 1");
        }
        const double p = std::max(probs.at(i, static_cast<std::size_t>(labels[i])), 1e-12);
        total += -std::log(p);
    }
    return total / static_cast<double>(labels.size());
}

namespace {

Tensor record_features(const BeatRecord& r) {
    return Tensor::from_vector({r.samples.begin(), r.samples.end()});
}

double sample_loss(const Tensor& probs, int label) {
    const double p = std::max(probs.at(static_cast<std::size_t>(label)), 1e-12);
    return -std::log(p);
}

/// Adam/SGD update over a flat parameter list.
class OptimizerState {
public:
    OptimizerState(Optimizer kind, double lr, const std::vector<Tensor*>& params)
        : kind_(kind), lr_(lr) {
        if (kind_ == Optimizer::Adam) {
            for (Tensor* p : params) {
                m_.emplace_back(p->shape());
                v_.emplace_back(p->shape());
            }
        }
    }

    void step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads) {
        if (kind_ == Optimizer::Sgd) {
            for (std::size_t i = 0; i < params.size(); ++i)
                for (std::size_t j = 0; j < params[i]->size(); ++j)
                    (*params[i])[j] -= lr_ * (*grads[i])[j];
            return;
        }
        ++t_;
        const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            for (std::size_t j = 0; j < params[i]->size(); ++j) {
                const double g = (*grads[i])[j];
                m_[i][j] = b1 * m_[i][j] + (1.0 - b1) * g;
                v_[i][j] = b2 * v_[i][j] + (1.0 - b2) * g * g;
                (*params[i])[j] -=
                    lr_ * (m_[i][j] / bc1) / (std::sqrt(v_[i][j] / bc2) + eps);
            }
        }
    }

private:
    Optimizer kind_;
    double lr_;
    std::uint64_t t_ = 0;
    std::vector<Tensor> m_, v_;
};

}  // namespace

double accumulate_batch_gradients(Model& model,
                                  const std::vector<const BeatRecord*>& batch,
                                  RngStream* dropout_rng) {
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    for (const BeatRecord* rec : batch) {
        const Tensor probs = model.forward(record_features(*rec), true, dropout_rng);
        loss += sample_loss(probs, rec->label);
        // dL/dp for mean cross-entropy: -(1/N) * 1/p at the true class.
        Tensor grad(probs.shape());
        const std::size_t y = static_cast<std::size_t>(rec->label);
        grad.at(y) = -inv_n / std::max(probs.at(y), 1e-12);
        model.backward(grad);
    }
    return loss * inv_n;
}

namespace {

double dataset_loss(Model& model, const Dataset& ds) {
    double total = 0.0;
    for (const BeatRecord& rec : ds.records) {
        const Tensor probs = model.forward(record_features(rec));
        total += sample_loss(probs, rec.label);
    }
    return total / static_cast<double>(ds.size());
}

}  // namespace

TrainHistory fit(Model& model, const Dataset& train, const Dataset& val,
                 const TrainConfig& cfg) {
    if (train.empty() || val.empty()) {
        throw std::invalid_argument("fit: datasets must be non-empty");
    }
    if (cfg.epochs == 0 || cfg.batch_size == 0 || cfg.learning_rate <= 0.0) {
        throw std::invalid_argument("fit: bad training configuration");
    }

    RngStream shuffle_rng(cfg.seed);
    RngStream dropout_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    OptimizerState opt(cfg.optimizer, cfg.learning_rate, model.parameters());

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    TrainHistory history;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t epochs_without_improvement = 0;
    std::vector<Tensor> best_params = model.snapshot_params();

    using clock = std::chrono::steady_clock;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = clock::now();

        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.uniform_int(i)]);

        double train_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(start + cfg.batch_size, order.size());
            std::vector<const BeatRecord*> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i)
                batch.push_back(&train.records[order[i]]);
            model.zero_grads();
            train_loss += accumulate_batch_gradients(model, batch, &dropout_rng);
            ++batches;
            opt.step(model.parameters(), model.gradients());
        }
        train_loss /= static_cast<double>(batches);
        if (!std::isfinite(train_loss)) {
            throw TrainingError("fit: training loss diverged (non-finite) at epoch " +
                                std::to_string(epoch + 1));
        }

        const double val_loss = dataset_loss(model, val);
        if (!std::isfinite(val_loss)) {
            throw TrainingError("fit: validation loss diverged (non-finite) at epoch " +
                                std::to_string(epoch + 1));
        }

        const auto t1 = clock::now();
        EpochStats stats{train_loss, val_loss,
                         std::chrono::duration<double>(t1 - t0).count()};
        history.epochs.push_back(stats);
        history.total_seconds += stats.seconds;

        if (val_loss < best_val - cfg.min_delta) {
            best_val = val_loss;
            history.best_epoch = epoch;
            epochs_without_improvement = 0;
            best_params = model.snapshot_params();
        } else if (epochs_without_improvement == cfg.patience) {
            // patience+1 consecutive non-improving epochs seen.
            history.early_stopped = true;
            model.restore_params(best_params);
            break;
        } else {
            ++epochs_without_improvement;
        }
    }
    return history;
}

MetricsReport evaluate(Model& model, const Dataset& ds) {
    if (ds.empty()) throw std::invalid_argument("evaluate: empty dataset");

    MetricsReport report;
    for (const BeatRecord& rec : ds.records) {
        const Tensor probs = model.forward(record_features(rec));
        const std::size_t pred = argmax(probs);
        report.confusion[static_cast<std::size_t>(rec.label)][pred]++;
    }

    std::size_t correct = 0;
    for (std::size_t c = 0; c < kNumClasses; ++c) correct += report.confusion[c][c];
    report.accuracy = static_cast<double>(correct) / static_cast<double>(ds.size());

    for (std::size_t c = 0; c < kNumClasses; ++c) {
        std::size_t true_count = 0, pred_count = 0;
        for (std::size_t j = 0; j < kNumClasses; ++j) {
            true_count += report.confusion[c][j];
            pred_count += report.confusion[j][c];
        }
        const double tp = static_cast<double>(report.confusion[c][c]);
        report.precision[c] = pred_count ? tp / static_cast<double>(pred_count) : 0.0;
        report.recall[c] = true_count ? tp / static_cast<double>(true_count) : 0.0;
        const double pr = report.precision[c] + report.recall[c];
        report.f1[c] = pr > 0.0 ? 2.0 * report.precision[c] * report.recall[c] / pr : 0.0;
    }
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        report.macro_precision += report.precision[c];
        report.macro_recall += report.recall[c];
        report.macro_f1 += report.f1[c];
    }
    report.macro_precision /= kNumClasses;
    report.macro_recall /= kNumClasses;
    report.macro_f1 /= kNumClasses;
    report.param_count = model.param_count();
    return report;
}

std::size_t param_count(Model& model) { return model.param_count(); }

}  // namespace ecgbench
