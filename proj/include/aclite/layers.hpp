#pragma once

#include "aclite/tensor.hpp"

namespace aclite {

/// Affine map y = Wx (+ b). Weight is out x in.
struct Linear {
    TensorPtr weight;
    TensorPtr bias;  // null when bias-free

    std::size_t out_dim() const { return weight->shape[0]; }
    std::size_t in_dim() const { return weight->shape[1]; }

    static Linear create(ParamStore& params, const std::string& name, std::size_t out,
                         std::size_t in, bool with_bias, std::mt19937_64& rng);

    TensorPtr apply(Tape& tape, const TensorPtr& x) const;
};

/// Fully gated GRU cell, reset gate applied to the previous hidden state
/// before the candidate:
///   z = sigmoid(W_z [x;h] + b_z)
///   r = sigmoid(W_r [x;h] + b_r)
///   hcand = tanh(W_h [x; r.h] + b_h)
///   h' = (1-z).h + z.hcand
struct GruCell {
    TensorPtr w_update, w_reset, w_cand;  // each hidden x (input+hidden)
    TensorPtr b_update, b_reset, b_cand;  // null when bias-free
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;

    static GruCell create(ParamStore& params, const std::string& name, std::size_t input,
                          std::size_t hidden, bool with_bias, std::mt19937_64& rng);

    TensorPtr step(Tape& tape, const TensorPtr& x, const TensorPtr& h_prev) const;
};

/// Token embedding table, |V| x d_w.
struct Embedding {
    TensorPtr table;

    std::size_t vocab_size() const { return table->shape[0]; }
    std::size_t width() const { return table->shape[1]; }

    static Embedding create(ParamStore& params, const std::string& name, std::size_t vocab,
                            std::size_t width, std::mt19937_64& rng);

    TensorPtr lookup(Tape& tape, std::size_t token_id) const;
};

}  // namespace aclite
