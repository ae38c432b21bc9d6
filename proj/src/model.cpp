#include "ecgbench/model.hpp"

#include <cmath>
#include <stdexcept>

namespace ecgbench {

void Layer::zero_grads() {
    for (Tensor* g : grads())
        std::fill(g->data().begin(), g->data().end(), 0.0);
}

// ---------------------------------------------------------------- ReshapeL

Tensor ReshapeL::forward(const Tensor& x, bool, RngStream*) {
    input_shape_ = x.shape();
    return reshape(x, target_);
}

Tensor ReshapeL::backward(const Tensor& grad_out) {
    return reshape(grad_out, input_shape_);
}

// ---------------------------------------------------------------- FlattenL

Tensor FlattenL::forward(const Tensor& x, bool, RngStream*) {
    input_shape_ = x.shape();
    return reshape(x, {x.size()});
}

Tensor FlattenL::backward(const Tensor& grad_out) {
    return reshape(grad_out, input_shape_);
}

// ----------------------------------------------------------------- AffineL

AffineL::AffineL(Tensor scale_vec, Tensor shift_vec)
    : scale_(std::move(scale_vec)), shift_(std::move(shift_vec)) {
    if (!scale_.same_shape(shift_)) {
        throw std::invalid_argument("AffineL: scale/shift shape mismatch");
    }
}

Tensor AffineL::forward(const Tensor& x, bool, RngStream*) {
    return add(hadamard(x, scale_), shift_);
}

Tensor AffineL::backward(const Tensor& grad_out) {
    return hadamard(grad_out, scale_);
}

// ------------------------------------------------------------------ DenseL

namespace {
Tensor glorot_uniform(std::size_t rows, std::size_t cols, std::size_t fan_in,
                      std::size_t fan_out, RngStream& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    return random_uniform({rows, cols}, -limit, limit, rng);
}
}  // namespace

DenseL::DenseL(std::size_t in_features, std::size_t out_features,
               Activation activation, RngStream& rng, bool trainable)
    : weights_(glorot_uniform(out_features, in_features, in_features, out_features, rng)),
      bias_({out_features}),
      grad_weights_({out_features, in_features}),
      grad_bias_({out_features}),
      activation_(activation),
      trainable_(trainable) {}

DenseL::DenseL(Tensor weights, Tensor bias, Activation activation, bool trainable)
    : weights_(std::move(weights)),
      bias_(std::move(bias)),
      grad_weights_(weights_.shape()),
      grad_bias_(bias_.shape()),
      activation_(activation),
      trainable_(trainable) {}

Tensor DenseL::forward(const Tensor& x, bool, RngStream*) {
    input_ = x;
    DenseLayer view{weights_, bias_, activation_};
    output_ = dense_forward(view, x);
    return output_;
}

Tensor DenseL::backward(const Tensor& grad_out) {
    const std::size_t out_n = weights_.dim(0), in_n = weights_.dim(1);
    Tensor dz({out_n});
    switch (activation_) {
        case Activation::None:
            dz = grad_out;
            break;
        case Activation::Relu:
            for (std::size_t i = 0; i < out_n; ++i)
                dz.at(i) = output_.at(i) > 0.0 ? grad_out.at(i) : 0.0;
            break;
        case Activation::Sigmoid:
            for (std::size_t i = 0; i < out_n; ++i)
                dz.at(i) = grad_out.at(i) * output_.at(i) * (1.0 - output_.at(i));
            break;
        case Activation::Tanh:
            for (std::size_t i = 0; i < out_n; ++i)
                dz.at(i) = grad_out.at(i) * (1.0 - output_.at(i) * output_.at(i));
            break;
        case Activation::Softmax: {
            // dz = diag(y) g - y (y . g)
            double dot = 0.0;
            for (std::size_t i = 0; i < out_n; ++i) dot += grad_out.at(i) * output_.at(i);
            for (std::size_t i = 0; i < out_n; ++i)
                dz.at(i) = output_.at(i) * (grad_out.at(i) - dot);
            break;
        }
    }
    if (trainable_) {
        for (std::size_t i = 0; i < out_n; ++i) {
            grad_bias_.at(i) += dz.at(i);
            for (std::size_t j = 0; j < in_n; ++j)
                grad_weights_.at(i, j) += dz.at(i) * input_.at(j);
        }
    }
    Tensor dx({in_n});
    for (std::size_t i = 0; i < out_n; ++i)
        for (std::size_t j = 0; j < in_n; ++j)
            dx.at(j) += weights_.at(i, j) * dz.at(i);
    return dx;
}

std::vector<Tensor*> DenseL::params() {
    if (!trainable_) return {};
    return {&weights_, &bias_};
}

std::vector<Tensor*> DenseL::grads() {
    if (!trainable_) return {};
    return {&grad_weights_, &grad_bias_};
}

std::string DenseL::name() const {
    return "dense(" + std::to_string(weights_.dim(1)) + "->" +
           std::to_string(weights_.dim(0)) + "," + to_string(activation_) + ")";
}

std::uint64_t DenseL::exact_macs() const {
    return dense_exact_macs(weights_.dim(1), weights_.dim(0));
}

std::uint64_t DenseL::paper_macs(bool*) const {
    return mac_fc(static_cast<std::uint64_t>(weights_.dim(0)) * weights_.dim(1));
}

// ----------------------------------------------------------------- Conv1DL

Conv1DL::Conv1DL(std::size_t c_in, std::size_t filters, std::size_t kernel,
                 std::size_t stride, Padding padding, Activation activation,
                 RngStream& rng)
    : activation_(activation) {
    if (activation != Activation::Relu && activation != Activation::None) {
        throw std::invalid_argument("Conv1DL: activation must be relu or none");
    }
    layer_.num_filters = filters;
    layer_.kernel_size = kernel;
    layer_.stride = stride;
    layer_.padding = padding;
    const double limit =
        std::sqrt(6.0 / static_cast<double>(c_in * kernel + filters * kernel));
    layer_.weights = random_uniform({filters, c_in, kernel}, -limit, limit, rng);
    layer_.bias = Tensor({filters});
    grad_weights_ = Tensor({filters, c_in, kernel});
    grad_bias_ = Tensor({filters});
}

Tensor Conv1DL::forward(const Tensor& x, bool, RngStream*) {
    input_ = x;
    last_macs_ = 0;
    preact_ = conv1d_forward(layer_, x, &last_macs_);
    return map_elementwise(preact_, activation_);
}

Tensor Conv1DL::backward(const Tensor& grad_out) {
    const std::size_t c_in = input_.dim(0), len = input_.dim(1);
    const std::size_t f = layer_.num_filters, d = layer_.kernel_size;
    const std::size_t ol = preact_.dim(1);
    const std::size_t p0 = pad_before(len, d, layer_.stride, layer_.padding);

    Tensor ds = grad_out;
    if (activation_ == Activation::Relu) {
        for (std::size_t i = 0; i < ds.size(); ++i)
            if (preact_[i] <= 0.0) ds[i] = 0.0;
    }

    Tensor dx({c_in, len});
    for (std::size_t fi = 0; fi < f; ++fi) {
        for (std::size_t j = 0; j < ol; ++j) {
            const double g = ds.at(fi, j);
            if (g == 0.0) continue;
            grad_bias_.at(fi) += g;
            for (std::size_t c = 0; c < c_in; ++c) {
                for (std::size_t m = 0; m < d; ++m) {
                    const std::ptrdiff_t jj =
                        static_cast<std::ptrdiff_t>(j * layer_.stride + m) -
                        static_cast<std::ptrdiff_t>(p0);
                    if (jj < 0 || jj >= static_cast<std::ptrdiff_t>(len)) continue;
                    const std::size_t u = static_cast<std::size_t>(jj);
                    grad_weights_.at(fi, c, m) += g * input_.at(c, u);
                    dx.at(c, u) += g * layer_.weights.at(fi, c, m);
                }
            }
        }
    }
    return dx;
}

std::vector<Tensor*> Conv1DL::params() { return {&layer_.weights, &layer_.bias}; }
std::vector<Tensor*> Conv1DL::grads() { return {&grad_weights_, &grad_bias_}; }

std::string Conv1DL::name() const {
    return "conv1d(F=" + std::to_string(layer_.num_filters) +
           ",D=" + std::to_string(layer_.kernel_size) + ")";
}

std::uint64_t Conv1DL::paper_macs(bool*) const {
    // Literal MAC_Conv = F * D^2 * I^2 with I the input length.
    return mac_conv(layer_.num_filters, layer_.kernel_size, input_.dim(1));
}

// --------------------------------------------------------------- MaxPool1DL

MaxPool1DL::MaxPool1DL(std::size_t window, std::size_t stride)
    : layer_{window, stride} {}

Tensor MaxPool1DL::forward(const Tensor& x, bool, RngStream*) {
    input_shape_ = x.shape();
    const std::size_t c = x.dim(0), len = x.dim(1);
    const std::size_t p = layer_.window, s = layer_.stride;
    if (p > len) throw std::invalid_argument("maxpool: window exceeds input extent");
    const std::size_t ol = (len - p) / s + 1;
    Tensor out({c, ol});
    argmax_.assign(c * ol, 0);
    last_macs_ = 0;
    for (std::size_t ci = 0; ci < c; ++ci) {
        for (std::size_t j = 0; j < ol; ++j) {
            std::size_t best = j * s;
            for (std::size_t m = 1; m < p; ++m)
                if (x.at(ci, j * s + m) > x.at(ci, best)) best = j * s + m;
            out.at(ci, j) = x.at(ci, best);
            argmax_[ci * ol + j] = ci * len + best;
            ++last_macs_;
        }
    }
    return out;
}

Tensor MaxPool1DL::backward(const Tensor& grad_out) {
    Tensor dx(input_shape_);
    for (std::size_t i = 0; i < grad_out.size(); ++i)
        dx[argmax_[i]] += grad_out[i];
    return dx;
}

std::string MaxPool1DL::name() const {
    return "maxpool1d(P=" + std::to_string(layer_.window) + ")";
}

std::uint64_t MaxPool1DL::paper_macs(bool* non_divisible) const {
    // Literal MAC_Pool = I^2 / P^2 with I the input length.
    return mac_pool(input_shape_[1], layer_.window, non_divisible);
}

// ----------------------------------------------------------------- DropoutL

DropoutL::DropoutL(double rate) {
    if (rate < 0.0 || rate >= 1.0) {
        throw std::invalid_argument("DropoutL: rate must lie in [0,1)");
    }
    layer_.rate = rate;
}

Tensor DropoutL::forward(const Tensor& x, bool training, RngStream* rng) {
    last_training_ = training && layer_.rate > 0.0;
    if (!last_training_) return x;
    if (!rng) throw std::invalid_argument("DropoutL: training forward needs an rng");
    const double keep = 1.0 - layer_.rate;
    mask_ = Tensor(x.shape());
    Tensor out = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double m = (rng->uniform() < layer_.rate) ? 0.0 : 1.0 / keep;
        mask_[i] = m;
        out[i] *= m;
    }
    return out;
}

Tensor DropoutL::backward(const Tensor& grad_out) {
    if (!last_training_) return grad_out;
    return hadamard(grad_out, mask_);
}

std::string DropoutL::name() const {
    return "dropout(p=" + std::to_string(layer_.rate) + ")";
}

// -------------------------------------------------------------------- LstmL

LstmL::LstmL(std::size_t input_size, std::size_t hidden_size,
             bool return_sequences, RngStream& rng)
    : cell_(LstmCell::glorot(hidden_size, input_size, rng)),
      return_sequences_(return_sequences) {
    for (int g = 0; g < 4; ++g) {
        grad_w_[g] = Tensor({hidden_size, hidden_size + input_size});
        grad_b_[g] = Tensor({hidden_size});
    }
}

Tensor LstmL::forward(const Tensor& x, bool, RngStream*) {
    if (x.rank() != 2 || x.dim(1) != cell_.input_size) {
        throw std::invalid_argument("LstmL: input must be [T," +
                                    std::to_string(cell_.input_size) + "]");
    }
    seq_len_ = x.dim(0);
    const std::size_t h_n = cell_.hidden_size;
    traces_.clear();
    concat_in_.clear();
    LstmState state = LstmState::zeros(h_n);
    Tensor seq_out({seq_len_, h_n});
    for (std::size_t t = 0; t < seq_len_; ++t) {
        const Tensor x_t = row(x, t);
        concat_in_.push_back(concat(state.h, x_t));
        LstmStepTrace trace = lstm_step_traced(cell_, state, x_t);
        state = trace.state;
        traces_.push_back(std::move(trace));
        for (std::size_t j = 0; j < h_n; ++j) seq_out.at(t, j) = state.h.at(j);
    }
    if (return_sequences_) return seq_out;
    return state.h;
}

Tensor LstmL::backward(const Tensor& grad_out) {
    const std::size_t h_n = cell_.hidden_size, x_n = cell_.input_size;
    const std::size_t z_n = h_n + x_n;

    Tensor dx_seq({seq_len_, x_n});
    Tensor dh({h_n});
    Tensor dc({h_n});
    if (!return_sequences_) dh = grad_out;

    const Tensor* ws[4] = {&cell_.w_forget, &cell_.w_input, &cell_.w_candidate,
                           &cell_.w_output};
    const Tensor zero_c({h_n});

    for (std::size_t t = seq_len_; t-- > 0;) {
        if (return_sequences_) {
            for (std::size_t j = 0; j < h_n; ++j) dh.at(j) += grad_out.at(t, j);
        }
        const LstmStepTrace& tr = traces_[t];
        const Tensor& c_prev = t > 0 ? traces_[t - 1].state.c : zero_c;
        const Tensor& z = concat_in_[t];

        Tensor da[4];  // gate pre-activation grads: f, i, cand, o
        for (auto& d : da) d = Tensor({h_n});
        for (std::size_t j = 0; j < h_n; ++j) {
            const double c_t = tr.state.c.at(j);
            const double tanh_c = std::tanh(c_t);
            const double o = tr.output_gate.at(j);
            const double f = tr.forget_gate.at(j);
            const double i = tr.input_gate.at(j);
            const double cand = tr.candidate.at(j);

            const double d_o = dh.at(j) * tanh_c;
            double d_c = dc.at(j) + dh.at(j) * o * (1.0 - tanh_c * tanh_c);

            const double d_f = d_c * c_prev.at(j);
            const double d_i = d_c * cand;
            const double d_cand = d_c * i;

            da[0].at(j) = d_f * f * (1.0 - f);
            da[1].at(j) = d_i * i * (1.0 - i);
            da[2].at(j) = d_cand * (1.0 - cand * cand);
            da[3].at(j) = d_o * o * (1.0 - o);

            dc.at(j) = d_c * f;  // carried to step t-1
        }

        Tensor dz({z_n});
        for (int g = 0; g < 4; ++g) {
            for (std::size_t j = 0; j < h_n; ++j) {
                const double a = da[g].at(j);
                if (a == 0.0) continue;
                grad_b_[g].at(j) += a;
                for (std::size_t k = 0; k < z_n; ++k) {
                    grad_w_[g].at(j, k) += a * z.at(k);
                    dz.at(k) += ws[g]->at(j, k) * a;
                }
            }
        }
        for (std::size_t j = 0; j < h_n; ++j) dh.at(j) = dz.at(j);
        for (std::size_t k = 0; k < x_n; ++k) dx_seq.at(t, k) = dz.at(h_n + k);
    }
    return dx_seq;
}

std::vector<Tensor*> LstmL::params() {
    return {&cell_.w_forget, &cell_.w_input, &cell_.w_candidate, &cell_.w_output,
            &cell_.b_forget, &cell_.b_input, &cell_.b_candidate, &cell_.b_output};
}

std::vector<Tensor*> LstmL::grads() {
    return {&grad_w_[0], &grad_w_[1], &grad_w_[2], &grad_w_[3],
            &grad_b_[0], &grad_b_[1], &grad_b_[2], &grad_b_[3]};
}

std::string LstmL::name() const {
    return "lstm(H=" + std::to_string(cell_.hidden_size) + ")";
}

std::uint64_t LstmL::exact_macs() const {
    return static_cast<std::uint64_t>(seq_len_) *
           mac_lstm_step(cell_.hidden_size, cell_.input_size);
}

// --------------------------------------------------------------------- RnnL

RnnL::RnnL(std::size_t input_size, std::size_t hidden_size, Activation activation,
           RngStream& rng)
    : w_hidden_(glorot_uniform(hidden_size, hidden_size, hidden_size, hidden_size, rng)),
      u_input_(glorot_uniform(hidden_size, input_size, input_size, hidden_size, rng)),
      b_hidden_({hidden_size}),
      grad_w_hidden_({hidden_size, hidden_size}),
      grad_u_input_({hidden_size, input_size}),
      grad_b_hidden_({hidden_size}),
      activation_(activation) {
    if (activation != Activation::Tanh && activation != Activation::Relu) {
        throw std::invalid_argument("RnnL: activation must be tanh or relu");
    }
}

Tensor RnnL::forward(const Tensor& x, bool, RngStream*) {
    if (x.rank() != 2 || x.dim(1) != u_input_.dim(1)) {
        throw std::invalid_argument("RnnL: input must be [T," +
                                    std::to_string(u_input_.dim(1)) + "]");
    }
    seq_len_ = x.dim(0);
    const std::size_t h_n = w_hidden_.dim(0);
    hiddens_.clear();
    inputs_.clear();
    hiddens_.push_back(Tensor({h_n}));
    for (std::size_t t = 0; t < seq_len_; ++t) {
        inputs_.push_back(row(x, t));
        const Tensor z = add(add(matvec(w_hidden_, hiddens_.back()),
                                 matvec(u_input_, inputs_.back())),
                             b_hidden_);
        hiddens_.push_back(map_elementwise(z, activation_));
    }
    return hiddens_.back();
}

Tensor RnnL::backward(const Tensor& grad_out) {
    const std::size_t h_n = w_hidden_.dim(0), x_n = u_input_.dim(1);
    Tensor dx_seq({seq_len_, x_n});
    Tensor dh = grad_out;
    for (std::size_t t = seq_len_; t-- > 0;) {
        const Tensor& h_t = hiddens_[t + 1];
        Tensor da({h_n});
        for (std::size_t j = 0; j < h_n; ++j) {
            da.at(j) = activation_ == Activation::Tanh
                           ? dh.at(j) * (1.0 - h_t.at(j) * h_t.at(j))
                           : (h_t.at(j) > 0.0 ? dh.at(j) : 0.0);
        }
        const Tensor& h_prev = hiddens_[t];
        const Tensor& x_t = inputs_[t];
        Tensor dh_prev({h_n});
        for (std::size_t j = 0; j < h_n; ++j) {
            const double a = da.at(j);
            grad_b_hidden_.at(j) += a;
            for (std::size_t k = 0; k < h_n; ++k) {
                grad_w_hidden_.at(j, k) += a * h_prev.at(k);
                dh_prev.at(k) += w_hidden_.at(j, k) * a;
            }
            for (std::size_t k = 0; k < x_n; ++k) {
                grad_u_input_.at(j, k) += a * x_t.at(k);
                dx_seq.at(t, k) += u_input_.at(j, k) * a;
            }
        }
        dh = dh_prev;
    }
    return dx_seq;
}

std::vector<Tensor*> RnnL::params() { return {&w_hidden_, &u_input_, &b_hidden_}; }
std::vector<Tensor*> RnnL::grads() {
    return {&grad_w_hidden_, &grad_u_input_, &grad_b_hidden_};
}

std::string RnnL::name() const {
    return "rnn(H=" + std::to_string(w_hidden_.dim(0)) + ")";
}

std::uint64_t RnnL::exact_macs() const {
    return static_cast<std::uint64_t>(seq_len_) *
           mac_rnn_step(w_hidden_.dim(0), u_input_.dim(1));
}

// -------------------------------------------------------------------- Model

Tensor Model::forward(const Tensor& x, bool training, RngStream* rng) {
    Tensor act = x;
    for (auto& layer : layers_) act = layer->forward(act, training, rng);
    return act;
}

Tensor Model::backward(const Tensor& grad_out) {
    Tensor g = grad_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
        g = (*it)->backward(g);
    return g;
}

std::vector<Tensor*> Model::parameters() {
    std::vector<Tensor*> out;
    for (auto& layer : layers_)
        for (Tensor* p : layer->params()) out.push_back(p);
    return out;
}

std::vector<Tensor*> Model::gradients() {
    std::vector<Tensor*> out;
    for (auto& layer : layers_)
        for (Tensor* g : layer->grads()) out.push_back(g);
    return out;
}

void Model::zero_grads() {
    for (auto& layer : layers_) layer->zero_grads();
}

std::size_t Model::param_count() {
    std::size_t n = 0;
    for (Tensor* p : parameters()) n += p->size();
    return n;
}

std::vector<Tensor> Model::snapshot_params() {
    std::vector<Tensor> out;
    for (Tensor* p : parameters()) out.push_back(*p);
    return out;
}

void Model::restore_params(const std::vector<Tensor>& snapshot) {
    std::vector<Tensor*> ps = parameters();
    if (ps.size() != snapshot.size()) {
        throw std::invalid_argument("Model::restore_params: snapshot mismatch");
    }
    for (std::size_t i = 0; i < ps.size(); ++i) *ps[i] = snapshot[i];
}

}  // namespace ecgbench
