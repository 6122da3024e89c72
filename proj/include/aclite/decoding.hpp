#pragma once

#include <random>

#include "aclite/model.hpp"

namespace aclite {

struct BeamHypothesis {
    std::vector<int> tokens;  // interior tokens followed by EOS when finished
    double log_prob = 0.0;
    DecoderState state;
    bool finished = false;
};

/// Argmax decoding; stops at EOS or max_len interior tokens. Ties break
/// toward the lowest token id. Returned sequence excludes BOS and EOS.
std::vector<int> greedy_decode(const CaptionModel& model, const VisualFeatures& features,
                               std::size_t max_len = 16);

/// Standard beam search over summed log-softmax scores, no length
/// normalization. Finished hypotheses stay in the pool and compete with
/// active ones. Ties break toward the lexicographically smaller sequence.
std::vector<BeamHypothesis> beam_decode(const CaptionModel& model, const VisualFeatures& features,
                                        std::size_t beam_size, std::size_t max_len = 16);

struct SampleResult {
    std::vector<int> tokens;  // interior tokens (EOS excluded)
    std::vector<double> step_log_probs;  // ln p of each drawn token, incl. EOS if drawn
    std::vector<int> drawn;              // every drawn token, incl. EOS if drawn
};

/// Multinomial sampling from the per-step distribution.
SampleResult sample_decode(const CaptionModel& model, const VisualFeatures& features,
                           std::size_t max_len, std::mt19937_64& rng);

double sequence_log_prob(const CaptionModel& model, const VisualFeatures& features,
                         const std::vector<int>& interior_tokens, std::size_t max_len = 16);

}  // namespace aclite
