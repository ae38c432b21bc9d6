#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ecgbench/cost.hpp"
#include "ecgbench/layers.hpp"
#include "ecgbench/recurrent.hpp"
#include "ecgbench/tensor.hpp"

namespace ecgbench {

/// A trainable layer: forward caches whatever backward needs; backward
/// accumulates parameter gradients and returns the gradient with respect
/// to the layer input. Frozen layers expose no parameters.
class Layer {
public:
    virtual ~Layer() = default;

    virtual Tensor forward(const Tensor& x, bool training, RngStream* rng) = 0;
    virtual Tensor backward(const Tensor& grad_out) = 0;

    virtual std::vector<Tensor*> params() { return {}; }
    virtual std::vector<Tensor*> grads() { return {}; }
    virtual std::string name() const = 0;
    virtual LayerKind kind() const { return LayerKind::Other; }

    /// MAC count of the last forward pass (instrumented loop count).
    virtual std::uint64_t exact_macs() const { return 0; }
    /// Literal square-input formula count; sets `non_divisible` for pooling.
    virtual std::uint64_t paper_macs(bool* non_divisible) const {
        (void)non_divisible;
        return 0;
    }

    void zero_grads();
};

class ReshapeL : public Layer {
public:
    explicit ReshapeL(std::vector<std::size_t> target) : target_(std::move(target)) {}
    Tensor forward(const Tensor& x, bool, RngStream*) override;
    Tensor backward(const Tensor& grad_out) override;
    std::string name() const override { return "reshape"; }

private:
    std::vector<std::size_t> target_;
    std::vector<std::size_t> input_shape_;
};

class FlattenL : public Layer {
public:
    Tensor forward(const Tensor& x, bool, RngStream*) override;
    Tensor backward(const Tensor& grad_out) override;
    std::string name() const override { return "flatten"; }

private:
    std::vector<std::size_t> input_shape_;
};

/// Fixed per-feature affine map y = a*x + b, never trained. Used to splice
/// normalization in front of a model.
class AffineL : public Layer {
public:
    AffineL(Tensor scale_vec, Tensor shift_vec);
    Tensor forward(const Tensor& x, bool, RngStream*) override;
    Tensor backward(const Tensor& grad_out) override;
    std::string name() const override { return "affine"; }

private:
    Tensor scale_, shift_;
};

class DenseL : public Layer {
public:
    DenseL(std::size_t in_features, std::size_t out_features, Activation activation,
           RngStream& rng, bool trainable = true);
    /// Adopts existing parameters (e.g. RBM weights).
    DenseL(Tensor weights, Tensor bias, Activation activation, bool trainable);

    Tensor forward(const Tensor& x, bool, RngStream*) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<Tensor*> params() override;
    std::vector<Tensor*> grads() override;
    std::string name() const override;
    LayerKind kind() const override { return LayerKind::Fc; }
    std::uint64_t exact_macs() const override;
    std::uint64_t paper_macs(bool*) const override;

    const Tensor& weights() const { return weights_; }
    const Tensor& bias() const { return bias_; }

private:
    Tensor weights_, bias_;
    Tensor grad_weights_, grad_bias_;
    Activation activation_;
    bool trainable_;
    Tensor input_, output_;
};

class Conv1DL : public Layer {
public:
    Conv1DL(std::size_t c_in, std::size_t filters, std::size_t kernel,
            std::size_t stride, Padding padding, Activation activation,
            RngStream& rng);

    Tensor forward(const Tensor& x, bool, RngStream*) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<Tensor*> params() override;
    std::vector<Tensor*> grads() override;
    std::string name() const override;
    LayerKind kind() const override { return LayerKind::Conv; }
    std::uint64_t exact_macs() const override { return last_macs_; }
    std::uint64_t paper_macs(bool*) const override;

private:
    Conv1DLayer layer_;
    Activation activation_;
    Tensor grad_weights_, grad_bias_;
    Tensor input_, preact_;
    std::uint64_t last_macs_ = 0;
};

class MaxPool1DL : public Layer {
public:
    MaxPool1DL(std::size_t window, std::size_t stride);

    Tensor forward(const Tensor& x, bool, RngStream*) override;
    Tensor backward(const Tensor& grad_out) override;
    std::string name() const override;
    LayerKind kind() const override { return LayerKind::Pool; }
    std::uint64_t exact_macs() const override { return last_macs_; }
    std::uint64_t paper_macs(bool* non_divisible) const override;

private:
    MaxPool1DLayer layer_;
    std::vector<std::size_t> input_shape_;
    std::vector<std::size_t> argmax_;  // flat input index per output element
    std::uint64_t last_macs_ = 0;
};

class DropoutL : public Layer {
public:
    explicit DropoutL(double rate);

    Tensor forward(const Tensor& x, bool training, RngStream* rng) override;
    Tensor backward(const Tensor& grad_out) override;
    std::string name() const override;

private:
    DropoutLayer layer_;
    Tensor mask_;  // per-element multiplier of the last training forward
    bool last_training_ = false;
};

/// Unrolled LSTM over a [T,X] input. Emits either the full hidden sequence
/// [T,H] or only the final hidden state [H].
class LstmL : public Layer {
public:
    LstmL(std::size_t input_size, std::size_t hidden_size, bool return_sequences,
          RngStream& rng);

    Tensor forward(const Tensor& x, bool, RngStream*) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<Tensor*> params() override;
    std::vector<Tensor*> grads() override;
    std::string name() const override;
    LayerKind kind() const override { return LayerKind::Recurrent; }
    std::uint64_t exact_macs() const override;
    std::uint64_t paper_macs(bool*) const override { return exact_macs(); }

    const LstmCell& cell() const { return cell_; }

private:
    LstmCell cell_;
    bool return_sequences_;
    Tensor grad_w_[4];  // forget, input, candidate, output
    Tensor grad_b_[4];
    // Cached unroll state.
    std::vector<Tensor> concat_in_;  // z_t = [h_{t-1}, x_t]
    std::vector<LstmStepTrace> traces_;
    std::size_t seq_len_ = 0;
};

/// Unrolled vanilla RNN over a [T,X] input; emits the final hidden state.
/// The linear output head lives in a following dense layer.
class RnnL : public Layer {
public:
    RnnL(std::size_t input_size, std::size_t hidden_size, Activation activation,
         RngStream& rng);

    Tensor forward(const Tensor& x, bool, RngStream*) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<Tensor*> params() override;
    std::vector<Tensor*> grads() override;
    std::string name() const override;
    LayerKind kind() const override { return LayerKind::Recurrent; }
    std::uint64_t exact_macs() const override;
    std::uint64_t paper_macs(bool*) const override { return exact_macs(); }

private:
    Tensor w_hidden_, u_input_, b_hidden_;
    Tensor grad_w_hidden_, grad_u_input_, grad_b_hidden_;
    Activation activation_;
    std::vector<Tensor> hiddens_;  // h_0 .. h_T
    std::vector<Tensor> inputs_;   // x_1 .. x_T
    std::size_t seq_len_ = 0;
};

/// Sequential stack of layers.
class Model {
public:
    Model() = default;
    Model(Model&&) = default;
    Model& operator=(Model&&) = default;

    void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

    Tensor forward(const Tensor& x, bool training = false, RngStream* rng = nullptr);
    /// Backpropagates grad wrt the model output; parameter gradients
    /// accumulate until zero_grads().
    Tensor backward(const Tensor& grad_out);

    std::vector<Tensor*> parameters();
    std::vector<Tensor*> gradients();
    void zero_grads();
    std::size_t param_count();

    std::vector<Tensor> snapshot_params();
    void restore_params(const std::vector<Tensor>& snapshot);

    const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

}  // namespace ecgbench
