#include "ecgbench/rbm.hpp"

#include <cmath>
#include <stdexcept>

namespace ecgbench {

namespace {

void require_binary(const Tensor& t, const char* what) {
    for (double x : t.data()) {
        if (x != 0.0 && x != 1.0) {
            throw std::invalid_argument(std::string(what) +
                                        ": elements must be 0 or 1");
        }
    }
}

Tensor bits_to_tensor(std::uint32_t bits, std::size_t n) {
    Tensor t({n});
    for (std::size_t i = 0; i < n; ++i) t.at(i) = (bits >> i) & 1u ? 1.0 : 0.0;
    return t;
}

constexpr std::size_t kEnumerationLimit = 20;

}  // namespace

Rbm Rbm::zeros(std::size_t visible, std::size_t hidden) {
    Rbm r;
    r.n_visible = visible;
    r.n_hidden = hidden;
    r.weights = Tensor({visible, hidden});
    r.visible_bias = Tensor({visible});
    r.hidden_bias = Tensor({hidden});
    return r;
}

Rbm Rbm::random(std::size_t visible, std::size_t hidden, double stddev,
                RngStream& rng) {
    Rbm r = zeros(visible, hidden);
    r.weights = random_normal({visible, hidden}, 0.0, stddev, rng);
    return r;
}

double energy(const Rbm& rbm, const Tensor& v, const Tensor& h) {
    if (v.shape() != std::vector<std::size_t>{rbm.n_visible} ||
        h.shape() != std::vector<std::size_t>{rbm.n_hidden}) {
        throw std::invalid_argument("energy: dimension mismatch");
    }
    require_binary(v, "energy: visible");
    require_binary(h, "energy: hidden");
    double e = 0.0;
    for (std::size_t i = 0; i < rbm.n_visible; ++i) {
        if (v.at(i) == 0.0) continue;
        for (std::size_t j = 0; j < rbm.n_hidden; ++j)
            e -= rbm.weights.at(i, j) * h.at(j);
        e -= rbm.visible_bias.at(i);
    }
    for (std::size_t j = 0; j < rbm.n_hidden; ++j)
        e -= rbm.hidden_bias.at(j) * h.at(j);
    return e;
}

double partition_function(const Rbm& rbm) {
    const std::size_t total = rbm.n_visible + rbm.n_hidden;
    if (total > kEnumerationLimit) {
        throw std::invalid_argument(
            "partition_function: instance too large for exhaustive enumeration "
            "(n_visible + n_hidden must be <= 20)");
    }
    double z = 0.0;
    for (std::uint32_t vb = 0; vb < (1u << rbm.n_visible); ++vb) {
        const Tensor v = bits_to_tensor(vb, rbm.n_visible);
        for (std::uint32_t hb = 0; hb < (1u << rbm.n_hidden); ++hb) {
            const Tensor h = bits_to_tensor(hb, rbm.n_hidden);
            z += std::exp(-energy(rbm, v, h));
        }
    }
    return z;
}

double joint_probability(const Rbm& rbm, const Tensor& v, const Tensor& h) {
    return std::exp(-energy(rbm, v, h)) / partition_function(rbm);
}

Tensor hidden_given_visible(const Rbm& rbm, const Tensor& v) {
    if (v.shape() != std::vector<std::size_t>{rbm.n_visible}) {
        throw std::invalid_argument("hidden_given_visible: dimension mismatch");
    }
    require_binary(v, "hidden_given_visible: v");
    Tensor p({rbm.n_hidden});
    for (std::size_t j = 0; j < rbm.n_hidden; ++j) {
        double act = rbm.hidden_bias.at(j);
        for (std::size_t i = 0; i < rbm.n_visible; ++i)
            act += rbm.weights.at(i, j) * v.at(i);
        p.at(j) = sigmoid(act);
    }
    return p;
}

Tensor visible_given_hidden(const Rbm& rbm, const Tensor& h) {
    if (h.shape() != std::vector<std::size_t>{rbm.n_hidden}) {
        throw std::invalid_argument("visible_given_hidden: dimension mismatch");
    }
    require_binary(h, "visible_given_hidden: h");
    Tensor p({rbm.n_visible});
    for (std::size_t i = 0; i < rbm.n_visible; ++i) {
        double act = rbm.visible_bias.at(i);
        for (std::size_t j = 0; j < rbm.n_hidden; ++j)
            act += rbm.weights.at(i, j) * h.at(j);
        p.at(i) = sigmoid(act);
    }
    return p;
}

namespace {
Tensor sample_bernoulli(const Tensor& probs, RngStream& rng) {
    Tensor s = probs;
    for (double& x : s.data()) x = rng.uniform() < x ? 1.0 : 0.0;
    return s;
}
}  // namespace

Cd1Delta cd1_update(Rbm& rbm, const Tensor& v0, double learning_rate,
                    RngStream& rng, const std::optional<Tensor>& forced_v1) {
    if (learning_rate <= 0.0) {
        throw std::invalid_argument("cd1_update: learning_rate must be positive");
    }
    require_binary(v0, "cd1_update: v0");

    const Tensor ph0 = hidden_given_visible(rbm, v0);
    const Tensor h0 = sample_bernoulli(ph0, rng);
    const Tensor pv1 = visible_given_hidden(rbm, h0);
    const Tensor v1 = forced_v1 ? *forced_v1 : sample_bernoulli(pv1, rng);
    const Tensor ph1 = hidden_given_visible(rbm, v1);

    Cd1Delta delta;
    delta.d_weights = Tensor({rbm.n_visible, rbm.n_hidden});
    for (std::size_t i = 0; i < rbm.n_visible; ++i)
        for (std::size_t j = 0; j < rbm.n_hidden; ++j)
            delta.d_weights.at(i, j) =
                learning_rate * (v0.at(i) * ph0.at(j) - v1.at(i) * ph1.at(j));
    delta.d_visible_bias = scale(subtract(v0, v1), learning_rate);
    delta.d_hidden_bias = scale(subtract(ph0, ph1), learning_rate);

    rbm.weights = add(rbm.weights, delta.d_weights);
    rbm.visible_bias = add(rbm.visible_bias, delta.d_visible_bias);
    rbm.hidden_bias = add(rbm.hidden_bias, delta.d_hidden_bias);
    return delta;
}

Dbn Dbn::build(std::size_t n_visible, const std::vector<std::size_t>& hidden_sizes,
               std::size_t num_classes, double stddev, RngStream& rng) {
    if (hidden_sizes.empty()) throw std::invalid_argument("Dbn: no hidden layers");
    Dbn dbn;
    std::size_t in = n_visible;
    for (std::size_t h : hidden_sizes) {
        dbn.layers.push_back(Rbm::random(in, h, stddev, rng));
        in = h;
    }
    dbn.head.weights = random_normal({num_classes, in}, 0.0, stddev, rng);
    dbn.head.bias = Tensor({num_classes});
    dbn.head.activation = Activation::Softmax;
    return dbn;
}

void pretrain_layerwise(Dbn& dbn, const Tensor& data, std::size_t epochs,
                        double learning_rate, RngStream& rng) {
    if (data.rank() != 2 || data.dim(1) != dbn.layers.front().n_visible) {
        throw std::invalid_argument("pretrain_layerwise: data shape mismatch");
    }
    const std::size_t n = data.dim(0);

    // Current layer's training inputs, as probabilities in [0,1].
    Tensor inputs = data;
    for (Rbm& rbm : dbn.layers) {
        if (inputs.dim(1) != rbm.n_visible) {
            throw std::invalid_argument("pretrain_layerwise: layer chain mismatch");
        }
        for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
            for (std::size_t r = 0; r < n; ++r) {
                Tensor v0 = row(inputs, r);
                for (double& x : v0.data()) x = x >= 0.5 ? 1.0 : 0.0;
                cd1_update(rbm, v0, learning_rate, rng);
            }
        }
        // Propagate hidden probabilities to feed the next layer.
        Tensor next({n, rbm.n_hidden});
        for (std::size_t r = 0; r < n; ++r) {
            Tensor v = row(inputs, r);
            for (double& x : v.data()) x = x >= 0.5 ? 1.0 : 0.0;
            const Tensor p = hidden_given_visible(rbm, v);
            for (std::size_t j = 0; j < rbm.n_hidden; ++j) next.at(r, j) = p.at(j);
        }
        inputs = next;
    }
}

Tensor dbn_forward(const Dbn& dbn, const Tensor& x) {
    if (x.shape() != std::vector<std::size_t>{dbn.layers.front().n_visible}) {
        throw std::invalid_argument("dbn_forward: input dimension mismatch");
    }
    Tensor act = x;
    for (const Rbm& rbm : dbn.layers) {
        // sigmoid(b + W^T act): the closed-form conditional applied to
        // real-valued activations.
        Tensor p({rbm.n_hidden});
        for (std::size_t j = 0; j < rbm.n_hidden; ++j) {
            double a = rbm.hidden_bias.at(j);
            for (std::size_t i = 0; i < rbm.n_visible; ++i)
                a += rbm.weights.at(i, j) * act.at(i);
            p.at(j) = sigmoid(a);
        }
        act = p;
    }
    return dense_forward(dbn.head, act);
}

}  // namespace ecgbench
