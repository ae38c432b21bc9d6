#include "ecgbench/recurrent.hpp"

#include <cmath>
#include <stdexcept>

namespace ecgbench {

namespace {

Tensor glorot_matrix(std::size_t rows, std::size_t cols, RngStream& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    return random_uniform({rows, cols}, -limit, limit, rng);
}

}  // namespace

LstmCell LstmCell::zeros(std::size_t hidden, std::size_t input) {
    LstmCell c;
    c.hidden_size = hidden;
    c.input_size = input;
    const std::vector<std::size_t> wshape{hidden, hidden + input};
    c.w_forget = Tensor(wshape);
    c.w_input = Tensor(wshape);
    c.w_candidate = Tensor(wshape);
    c.w_output = Tensor(wshape);
    c.b_forget = Tensor({hidden});
    c.b_input = Tensor({hidden});
    c.b_candidate = Tensor({hidden});
    c.b_output = Tensor({hidden});
    return c;
}

LstmCell LstmCell::glorot(std::size_t hidden, std::size_t input, RngStream& rng) {
    LstmCell c = zeros(hidden, input);
    c.w_forget = glorot_matrix(hidden, hidden + input, rng);
    c.w_input = glorot_matrix(hidden, hidden + input, rng);
    c.w_candidate = glorot_matrix(hidden, hidden + input, rng);
    c.w_output = glorot_matrix(hidden, hidden + input, rng);
    return c;
}

LstmState LstmState::zeros(std::size_t hidden) {
    return LstmState{Tensor({hidden}), Tensor({hidden})};
}

LstmStepTrace lstm_step_traced(const LstmCell& cell, const LstmState& state,
                               const Tensor& x_t, const GateOverride& override) {
    const std::size_t h_n = cell.hidden_size, x_n = cell.input_size;
    if (state.h.shape() != std::vector<std::size_t>{h_n} ||
        state.c.shape() != std::vector<std::size_t>{h_n}) {
        throw std::invalid_argument("lstm_step: state dimension mismatch");
    }
    if (x_t.shape() != std::vector<std::size_t>{x_n}) {
        throw std::invalid_argument("lstm_step: input dimension mismatch");
    }

    const Tensor z = concat(state.h, x_t);  // [h_prev, x_t]
    Tensor f = map_elementwise(add(matvec(cell.w_forget, z), cell.b_forget),
                               Activation::Sigmoid);
    Tensor i = map_elementwise(add(matvec(cell.w_input, z), cell.b_input),
                               Activation::Sigmoid);
    const Tensor cand = map_elementwise(
        add(matvec(cell.w_candidate, z), cell.b_candidate), Activation::Tanh);
    const Tensor o = map_elementwise(add(matvec(cell.w_output, z), cell.b_output),
                                     Activation::Sigmoid);
    if (override.forget) f = Tensor::full({h_n}, *override.forget);
    if (override.input) i = Tensor::full({h_n}, *override.input);

    const Tensor c_new = add(hadamard(f, state.c), hadamard(i, cand));
    const Tensor h_new = hadamard(o, map_elementwise(c_new, Activation::Tanh));
    return LstmStepTrace{f, i, cand, o, LstmState{h_new, c_new}};
}

LstmState lstm_step(const LstmCell& cell, const LstmState& state,
                    const Tensor& x_t, const GateOverride& override) {
    return lstm_step_traced(cell, state, x_t, override).state;
}

Tensor lstm_sequence(const LstmCell& cell, const Tensor& x_seq,
                     const LstmState& initial) {
    if (x_seq.rank() != 2) {
        throw std::invalid_argument("lstm_sequence: input must be [T,X]");
    }
    const std::size_t t_n = x_seq.dim(0);
    Tensor out({t_n, cell.hidden_size});
    LstmState state = initial;
    for (std::size_t t = 0; t < t_n; ++t) {
        state = lstm_step(cell, state, row(x_seq, t));
        for (std::size_t j = 0; j < cell.hidden_size; ++j)
            out.at(t, j) = state.h.at(j);
    }
    return out;
}

RnnCell RnnCell::zeros(std::size_t hidden, std::size_t input, std::size_t output) {
    RnnCell c;
    c.w_hidden = Tensor({hidden, hidden});
    c.u_input = Tensor({hidden, input});
    c.b_hidden = Tensor({hidden});
    c.v_output = Tensor({output, hidden});
    c.b_output = Tensor({output});
    return c;
}

RnnCell RnnCell::glorot(std::size_t hidden, std::size_t input,
                        std::size_t output, RngStream& rng) {
    RnnCell c = zeros(hidden, input, output);
    c.w_hidden = glorot_matrix(hidden, hidden, rng);
    c.u_input = glorot_matrix(hidden, input, rng);
    c.v_output = glorot_matrix(output, hidden, rng);
    return c;
}

Tensor rnn_step(const RnnCell& cell, const Tensor& h_prev, const Tensor& x_t) {
    if (cell.activation != Activation::Tanh && cell.activation != Activation::Relu) {
        throw std::invalid_argument("rnn_step: activation must be tanh or relu");
    }
    const Tensor z = add(add(matvec(cell.w_hidden, h_prev), matvec(cell.u_input, x_t)),
                         cell.b_hidden);
    return map_elementwise(z, cell.activation);
}

Tensor rnn_output(const RnnCell& cell, const Tensor& h_t) {
    return add(matvec(cell.v_output, h_t), cell.b_output);
}

Tensor bilstm_sequence(const BiLstm& bi, const Tensor& x_seq) {
    if (x_seq.rank() != 2) {
        throw std::invalid_argument("bilstm_sequence: input must be [T,X]");
    }
    if (bi.forward_cell.input_size != bi.backward_cell.input_size) {
        throw std::invalid_argument("bilstm_sequence: cells disagree on input size");
    }
    const std::size_t t_n = x_seq.dim(0);
    const std::size_t hf = bi.forward_cell.hidden_size;
    const std::size_t hb = bi.backward_cell.hidden_size;

    const Tensor fwd = lstm_sequence(bi.forward_cell, x_seq, LstmState::zeros(hf));

    // Backward scan: fold from the last row down, storing time-aligned.
    Tensor bwd({t_n, hb});
    LstmState state = LstmState::zeros(hb);
    for (std::size_t t = t_n; t-- > 0;) {
        state = lstm_step(bi.backward_cell, state, row(x_seq, t));
        for (std::size_t j = 0; j < hb; ++j) bwd.at(t, j) = state.h.at(j);
    }

    Tensor out({t_n, hf + hb});
    for (std::size_t t = 0; t < t_n; ++t) {
        for (std::size_t j = 0; j < hf; ++j) out.at(t, j) = fwd.at(t, j);
        for (std::size_t j = 0; j < hb; ++j) out.at(t, hf + j) = bwd.at(t, j);
    }
    return out;
}

}  // namespace ecgbench
