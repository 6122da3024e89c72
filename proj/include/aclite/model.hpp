#pragma once

#include <optional>

#include "aclite/data.hpp"
#include "aclite/encoder.hpp"
#include "aclite/layers.hpp"

namespace aclite {

enum class Wiring {
    Literal,    // attention GRU input is [h_G ; a_mean], no word feedback
    ButdStyle,  // attention GRU input is [h_G ; a_mean ; word embedding]
};

Wiring wiring_from_string(const std::string& s);
std::string wiring_to_string(Wiring w);

struct ModelConfig {
    std::size_t d_a = 1024;   // region feature width
    std::size_t n_a = 196;    // region count (informational; checked at runtime)
    std::size_t d_h = 512;    // both GRU hidden sizes
    std::size_t d_e = 512;    // attention embedding dimension
    std::size_t d_w = 512;    // word embedding width (butd-style only)
    std::size_t vocab_size = 0;
    std::size_t max_len = 16;
    Wiring wiring = Wiring::ButdStyle;
    bool output_bias = true;
    bool gru_bias = true;

    std::size_t attention_input_dim() const {
        return d_h + d_a + (wiring == Wiring::ButdStyle ? d_w : 0);
    }
};

struct DecoderState {
    TensorPtr h_attention;  // d_h
    TensorPtr h_language;   // d_h
    int prev_token = kBosId;
};

struct AttentionOutput {
    TensorPtr alpha;     // n_a, nonnegative, sums to 1
    TensorPtr attended;  // d_a
    TensorPtr beta;      // n_a, pre-softmax scores
};

struct StepOutput {
    TensorPtr logits;  // |V|
    TensorPtr probs;   // |V|
    DecoderState state;
    AttentionOutput attention;
};

struct TeacherForcedResult {
    TensorPtr loss;
    std::vector<TensorPtr> step_probs;
    std::vector<TensorPtr> step_alphas;
};

/// The captioning model: attention GRU + low-rank bilinear attention +
/// language GRU + output projection (+ word embedding in butd-style wiring).
class CaptionModel {
public:
    CaptionModel(const ModelConfig& config, std::uint64_t seed);

    const ModelConfig& config() const { return config_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    DecoderState initial_state(Tape& tape) const;

    /// One attention pass: advances the attention GRU and produces the
    /// attended feature. word_vec must be present iff wiring is butd-style.
    std::pair<TensorPtr, AttentionOutput> attention_step(Tape& tape, const VisualFeatures& features,
                                                         const DecoderState& state,
                                                         const TensorPtr& word_vec) const;

    /// Language GRU + output projection on an attended feature.
    StepOutput decode_step(Tape& tape, const TensorPtr& attended, const DecoderState& state,
                           const TensorPtr& new_h_attention, const AttentionOutput& attention) const;

    /// Full step: attention then decode, with word embedding lookup handled
    /// per the wiring mode. prev_token comes from state.
    StepOutput step(Tape& tape, const VisualFeatures& features, const DecoderState& state) const;

    TeacherForcedResult forward_teacher_forced(Tape& tape, const VisualFeatures& features,
                                               const std::vector<int>& gold_tokens) const;

    const Embedding& embedding() const { return embedding_; }

private:
    ModelConfig config_;
    ParamStore params_;
    GruCell gru_attention_;
    GruCell gru_language_;
    Linear embed_hidden_;   // d_e x d_h, bias-free
    Linear embed_visual_;   // d_e x d_a, bias-free
    TensorPtr omega_;       // d_e, bilinear score vector
    Linear output_;         // |V| x d_h
    Embedding embedding_;   // |V| x d_w (butd-style only; empty table otherwise)
};

}  // namespace aclite
