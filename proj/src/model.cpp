#include "aclite/model.hpp"

namespace aclite {

Wiring wiring_from_string(const std::string& s) {
    if (s == "literal") return Wiring::Literal;
    if (s == "butd-style" || s == "butd") return Wiring::ButdStyle;
    throw ConfigError("unknown wiring mode: " + s);
}

std::string wiring_to_string(Wiring w) {
    return w == Wiring::Literal ? "literal" : "butd-style";
}

CaptionModel::CaptionModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
    if (config.vocab_size < 4) throw ConfigError("vocab_size must include the 4 reserved tokens");
    std::mt19937_64 rng(seed);
    gru_attention_ = GruCell::create(params_, "gru_attention", config.attention_input_dim(),
                                     config.d_h, config.gru_bias, rng);
    embed_hidden_ = Linear::create(params_, "attn_embed_hidden", config.d_e, config.d_h,
                                   /*with_bias=*/false, rng);
    embed_visual_ = Linear::create(params_, "attn_embed_visual", config.d_e, config.d_a,
                                   /*with_bias=*/false, rng);
    omega_ = Tensor::zeros({1, config.d_e});
    init_uniform(*omega_, config.d_e, 1, rng);
    params_.add("attn_score.weight", omega_);
    gru_language_ = GruCell::create(params_, "gru_language", config.d_a, config.d_h,
                                    config.gru_bias, rng);
    output_ = Linear::create(params_, "output", config.vocab_size, config.d_h, config.output_bias, rng);
    if (config.wiring == Wiring::ButdStyle)
        embedding_ = Embedding::create(params_, "embedding", config.vocab_size, config.d_w, rng);
}

DecoderState CaptionModel::initial_state(Tape&) const {
    DecoderState state;
    state.h_attention = Tensor::zeros({config_.d_h});
    state.h_language = Tensor::zeros({config_.d_h});
    state.prev_token = kBosId;
    return state;
}

std::pair<TensorPtr, AttentionOutput> CaptionModel::attention_step(Tape& tape,
                                                                   const VisualFeatures& features,
                                                                   const DecoderState& state,
                                                                   const TensorPtr& word_vec) const {
    if (features.d_a() != config_.d_a) {
        throw DimensionError("attention_step: features d_a " + std::to_string(features.d_a()) +
                             " vs config " + std::to_string(config_.d_a));
    }
    if ((config_.wiring == Wiring::ButdStyle) != (word_vec != nullptr)) {
        throw ConfigError("attention_step: word_vec must be present iff wiring is butd-style");
    }

    TensorPtr x = config_.wiring == Wiring::ButdStyle
                      ? ops::concat(tape, {state.h_language, features.mean_pooled, word_vec})
                      : ops::concat(tape, {state.h_language, features.mean_pooled});
    auto h_att = gru_attention_.step(tape, x, state.h_attention);

    // beta[i] = omega^T ((W_h h) . (W_a a_i)), batched over all regions
    auto wh = embed_hidden_.apply(tape, h_att);                       // d_e
    auto wa = ops::matmul(tape, embed_visual_.weight, features.A);    // d_e x n_a
    auto pooled = ops::mul_col_broadcast(tape, wh, wa);               // d_e x n_a
    auto beta = ops::matmul(tape, omega_, pooled);                    // 1 x n_a
    beta = ops::reshape(tape, beta, {features.n_a()});
    auto alpha = ops::softmax(tape, beta);
    auto alpha_col = ops::reshape(tape, alpha, {features.n_a(), 1});
    auto attended = ops::reshape(tape, ops::matmul(tape, features.A, alpha_col), {config_.d_a});

    return {h_att, AttentionOutput{alpha, attended, beta}};
}

StepOutput CaptionModel::decode_step(Tape& tape, const TensorPtr& attended,
                                     const DecoderState& state, const TensorPtr& new_h_attention,
                                     const AttentionOutput& attention) const {
    auto h_lang = gru_language_.step(tape, attended, state.h_language);
    auto logits = output_.apply(tape, h_lang);
    auto probs = ops::softmax(tape, logits);
    StepOutput out;
    out.logits = logits;
    out.probs = probs;
    out.state = DecoderState{new_h_attention, h_lang, state.prev_token};
    out.attention = attention;
    return out;
}

StepOutput CaptionModel::step(Tape& tape, const VisualFeatures& features,
                              const DecoderState& state) const {
    TensorPtr word_vec;
    if (config_.wiring == Wiring::ButdStyle) {
        if (state.prev_token < 0 || static_cast<std::size_t>(state.prev_token) >= config_.vocab_size)
            throw VocabularyError("step: prev_token " + std::to_string(state.prev_token) +
                                  " outside vocabulary of size " + std::to_string(config_.vocab_size));
        word_vec = embedding_.lookup(tape, static_cast<std::size_t>(state.prev_token));
    }
    auto [h_att, attention] = attention_step(tape, features, state, word_vec);
    return decode_step(tape, attention.attended, state, h_att, attention);
}

TeacherForcedResult CaptionModel::forward_teacher_forced(Tape& tape, const VisualFeatures& features,
                                                         const std::vector<int>& gold_tokens) const {
    if (gold_tokens.size() < 2 || gold_tokens.front() != kBosId || gold_tokens.back() != kEosId)
        throw VocabularyError("teacher forcing needs BOS ... EOS token sequence");
    if (gold_tokens.size() > config_.max_len + 2)
        throw VocabularyError("token sequence longer than max_len+2");
    for (int id : gold_tokens)
        if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size)
            throw VocabularyError("token id " + std::to_string(id) + " outside vocabulary of size " +
                                  std::to_string(config_.vocab_size));

    const std::size_t T = gold_tokens.size() - 1;  // predictions: tokens[1..]
    TeacherForcedResult result;
    std::vector<TensorPtr> logit_rows;
    DecoderState state = initial_state(tape);
    for (std::size_t t = 0; t < T; ++t) {
        state.prev_token = gold_tokens[t];
        auto out = step(tape, features, state);
        logit_rows.push_back(out.logits);
        result.step_probs.push_back(out.probs);
        result.step_alphas.push_back(out.attention.alpha);
        state = out.state;
    }
    auto logits = ops::stack_rows(tape, logit_rows);
    std::vector<int> targets(gold_tokens.begin() + 1, gold_tokens.end());
    std::vector<std::uint8_t> mask(T, 1);
    result.loss = ops::cross_entropy(tape, logits, targets, mask);
    return result;
}

}  // namespace aclite
