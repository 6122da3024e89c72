#include "aclite/layers.hpp"

namespace aclite {

Linear Linear::create(ParamStore& params, const std::string& name, std::size_t out, std::size_t in,
                      bool with_bias, std::mt19937_64& rng) {
    Linear layer;
    layer.weight = Tensor::zeros({out, in});
    init_uniform(*layer.weight, in, out, rng);
    params.add(name + ".weight", layer.weight);
    if (with_bias) {
        layer.bias = Tensor::zeros({out});
        params.add(name + ".bias", layer.bias);
    }
    return layer;
}

TensorPtr Linear::apply(Tape& tape, const TensorPtr& x) const {
    if (x->size() != in_dim()) {
        throw DimensionError("linear: input " + shape_str(x->shape) + " vs weight " +
                             shape_str(weight->shape));
    }
    auto col = ops::reshape(tape, x, {in_dim(), 1});
    auto y = ops::matmul(tape, weight, col);
    y = ops::reshape(tape, y, {out_dim()});
    if (bias) y = ops::add(tape, y, bias);
    return y;
}

GruCell GruCell::create(ParamStore& params, const std::string& name, std::size_t input,
                        std::size_t hidden, bool with_bias, std::mt19937_64& rng) {
    GruCell cell;
    cell.input_dim = input;
    cell.hidden_dim = hidden;
    const std::size_t in_total = input + hidden;
    auto make_w = [&](const char* gate) {
        auto w = Tensor::zeros({hidden, in_total});
        init_uniform(*w, in_total, hidden, rng);
        params.add(name + "." + gate + ".weight", w);
        return w;
    };
    cell.w_update = make_w("update");
    cell.w_reset = make_w("reset");
    cell.w_cand = make_w("cand");
    if (with_bias) {
        auto make_b = [&](const char* gate) {
            auto b = Tensor::zeros({hidden});
            params.add(name + "." + gate + ".bias", b);
            return b;
        };
        cell.b_update = make_b("update");
        cell.b_reset = make_b("reset");
        cell.b_cand = make_b("cand");
    }
    return cell;
}

TensorPtr GruCell::step(Tape& tape, const TensorPtr& x, const TensorPtr& h_prev) const {
    if (x->size() != input_dim || h_prev->size() != hidden_dim) {
        throw DimensionError("gru_step: input " + shape_str(x->shape) + ", hidden " +
                             shape_str(h_prev->shape) + " vs cell (" + std::to_string(input_dim) +
                             "," + std::to_string(hidden_dim) + ")");
    }
    auto gate = [&](const TensorPtr& w, const TensorPtr& b, const TensorPtr& in) {
        auto col = ops::reshape(tape, in, {in->size(), 1});
        auto y = ops::reshape(tape, ops::matmul(tape, w, col), {hidden_dim});
        if (b) y = ops::add(tape, y, b);
        return y;
    };
    auto xh = ops::concat(tape, {x, h_prev});
    auto z = ops::sigmoid(tape, gate(w_update, b_update, xh));
    auto r = ops::sigmoid(tape, gate(w_reset, b_reset, xh));
    auto x_rh = ops::concat(tape, {x, ops::hadamard(tape, r, h_prev)});
    auto cand = ops::tanh(tape, gate(w_cand, b_cand, x_rh));
    // h' = h_prev + z.(cand - h_prev)
    auto keep = ops::hadamard(tape, ops::add_scalar(tape, ops::scale(tape, z, -1.0), 1.0), h_prev);
    auto take = ops::hadamard(tape, z, cand);
    return ops::add(tape, keep, take);
}

Embedding Embedding::create(ParamStore& params, const std::string& name, std::size_t vocab,
                            std::size_t width, std::mt19937_64& rng) {
    Embedding emb;
    emb.table = Tensor::zeros({vocab, width});
    init_uniform(*emb.table, width, width, rng);
    params.add(name + ".table", emb.table);
    return emb;
}

TensorPtr Embedding::lookup(Tape& tape, std::size_t token_id) const {
    return ops::gather_row(tape, table, token_id);
}

}  // namespace aclite
