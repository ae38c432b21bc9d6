#pragma once

#include <optional>
#include <vector>

#include "ecgbench/layers.hpp"
#include "ecgbench/tensor.hpp"

namespace ecgbench {

/// Bipartite energy model over binary visible/hidden units.
/// E(v,h) = -sum_ij w_ij v_i h_j - sum_i a_i v_i - sum_j b_j h_j
struct Rbm {
    std::size_t n_visible = 0;
    std::size_t n_hidden = 0;
    Tensor weights;       // [n_visible, n_hidden]
    Tensor visible_bias;  // [n_visible]
    Tensor hidden_bias;   // [n_hidden]

    static Rbm zeros(std::size_t visible, std::size_t hidden);
    static Rbm random(std::size_t visible, std::size_t hidden, double stddev,
                      RngStream& rng);
};

double energy(const Rbm& rbm, const Tensor& v, const Tensor& h);

/// Exact partition function by exhaustive enumeration; limited to
/// n_visible + n_hidden <= 20.
double partition_function(const Rbm& rbm);

double joint_probability(const Rbm& rbm, const Tensor& v, const Tensor& h);

/// p(h_j = 1 | v) = sigmoid(b_j + sum_i w_ij v_i)
Tensor hidden_given_visible(const Rbm& rbm, const Tensor& v);
/// p(v_i = 1 | h) = sigmoid(a_i + sum_j w_ij h_j)
Tensor visible_given_hidden(const Rbm& rbm, const Tensor& h);

struct Cd1Delta {
    Tensor d_weights;
    Tensor d_visible_bias;
    Tensor d_hidden_bias;
};

/// One CD-1 update. Gibbs chain v0 -> h0 (sampled) -> v1 (sampled) -> p(h1)
/// with probabilities in the final negative phase. Parameters are updated
/// in place; the applied deltas are returned. `forced_v1`, when set,
/// replaces the sampled reconstruction (test hook).
Cd1Delta cd1_update(Rbm& rbm, const Tensor& v0, double learning_rate,
                    RngStream& rng,
                    const std::optional<Tensor>& forced_v1 = std::nullopt);

/// Stack of layer-wise pretrained RBMs with a softmax classifier head.
struct Dbn {
    std::vector<Rbm> layers;
    DenseLayer head;  // softmax activation

    /// Hidden sizes chain layer to layer; head maps the top hidden size to
    /// num_classes.
    static Dbn build(std::size_t n_visible, const std::vector<std::size_t>& hidden_sizes,
                     std::size_t num_classes, double stddev, RngStream& rng);
};

/// Layer-wise CD-1 pretraining, bottom-up. data is [N, n_visible] with
/// entries in [0,1]; rows are thresholded at 0.5 before sampling.
void pretrain_layerwise(Dbn& dbn, const Tensor& data, std::size_t epochs,
                        double learning_rate, RngStream& rng);

/// Deterministic propagation of hidden probabilities through every RBM,
/// then the softmax head.
Tensor dbn_forward(const Dbn& dbn, const Tensor& x);

}  // namespace ecgbench
