#pragma once

#include <optional>

#include "ecgbench/tensor.hpp"

namespace ecgbench {

/// Gated cell parameters. Each gate matrix acts on the concatenation
/// [h_prev, x_t], so columns 0..H-1 multiply the hidden state and columns
/// H..H+X-1 multiply the input.
struct LstmCell {
    std::size_t hidden_size = 0;
    std::size_t input_size = 0;
    Tensor w_forget, w_input, w_candidate, w_output;  // [H, H+X]
    Tensor b_forget, b_input, b_candidate, b_output;  // [H]

    static LstmCell zeros(std::size_t hidden, std::size_t input);
    /// Glorot-uniform initialization from a seeded stream.
    static LstmCell glorot(std::size_t hidden, std::size_t input, RngStream& rng);
};

struct LstmState {
    Tensor h;  // hidden/output vector
    Tensor c;  // cell state

    static LstmState zeros(std::size_t hidden);
};

/// Test hook: replaces the computed forget/input gate activations with
/// constants (applied to every element).
struct GateOverride {
    std::optional<double> forget;
    std::optional<double> input;
};

/// Gate activations and intermediates from one step, for inspection.
struct LstmStepTrace {
    Tensor forget_gate, input_gate, candidate, output_gate;
    LstmState state;
};

LstmStepTrace lstm_step_traced(const LstmCell& cell, const LstmState& state,
                               const Tensor& x_t,
                               const GateOverride& override = {});
LstmState lstm_step(const LstmCell& cell, const LstmState& state,
                    const Tensor& x_t, const GateOverride& override = {});

/// Folds lstm_step over the rows of x_seq [T,X]; row t of the result is h_t.
Tensor lstm_sequence(const LstmCell& cell, const Tensor& x_seq,
                     const LstmState& initial);

struct RnnCell {
    Tensor w_hidden;   // [H,H]
    Tensor u_input;    // [H,X]
    Tensor b_hidden;   // [H]
    Tensor v_output;   // [Y,H]
    Tensor b_output;   // [Y]
    Activation activation = Activation::Tanh;

    static RnnCell zeros(std::size_t hidden, std::size_t input, std::size_t output);
    static RnnCell glorot(std::size_t hidden, std::size_t input,
                          std::size_t output, RngStream& rng);
};

Tensor rnn_step(const RnnCell& cell, const Tensor& h_prev, const Tensor& x_t);
/// Linear output head, no activation.
Tensor rnn_output(const RnnCell& cell, const Tensor& h_t);

struct BiLstm {
    LstmCell forward_cell;
    LstmCell backward_cell;
};

/// Row t of the result is [h_fwd_t, h_bwd_t], time-aligned: the backward
/// half at row t comes from scanning x_seq from the end down to t.
Tensor bilstm_sequence(const BiLstm& bi, const Tensor& x_seq);

}  // namespace ecgbench
