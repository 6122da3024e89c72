#include "aclite/decoding.hpp"

#include <algorithm>
#include <cmath>

namespace aclite {

namespace {

// Stable per-token log-probabilities from a logits vector.
std::vector<double> log_softmax_values(const TensorPtr& logits) {
    const std::size_t n = logits->size();
    double mx = logits->data[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, logits->data[i]);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z += std::exp(logits->data[i] - mx);
    const double lse = mx + std::log(z);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = logits->data[i] - lse;
    return out;
}

}  // namespace

std::vector<int> greedy_decode(const CaptionModel& model, const VisualFeatures& features,
                               std::size_t max_len) {
    Tape tape;
    tape.grad_enabled = false;
    std::vector<int> tokens;
    DecoderState state = model.initial_state(tape);
    for (std::size_t t = 0; t < max_len; ++t) {
        auto out = model.step(tape, features, state);
        std::size_t best = 0;
        for (std::size_t i = 1; i < out.probs->size(); ++i)
            if (out.probs->data[i] > out.probs->data[best]) best = i;
        if (static_cast<int>(best) == kEosId) break;
        tokens.push_back(static_cast<int>(best));
        state = out.state;
        state.prev_token = static_cast<int>(best);
    }
    return tokens;
}

std::vector<BeamHypothesis> beam_decode(const CaptionModel& model, const VisualFeatures& features,
                                        std::size_t beam_size, std::size_t max_len) {
    if (beam_size < 1) throw ConfigError("beam_decode: beam_size must be >= 1");
    Tape tape;
    tape.grad_enabled = false;

    auto better = [](const BeamHypothesis& a, const BeamHypothesis& b) {
        if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
        return a.tokens < b.tokens;
    };

    BeamHypothesis root;
    root.state = model.initial_state(tape);
    std::vector<BeamHypothesis> beam = {root};

    for (std::size_t depth = 0; depth < max_len; ++depth) {
        bool any_active = false;
        std::vector<BeamHypothesis> candidates;
        for (const auto& hyp : beam) {
            if (hyp.finished || hyp.tokens.size() >= max_len) {
                candidates.push_back(hyp);
                continue;
            }
            any_active = true;
            DecoderState state = hyp.state;
            state.prev_token = hyp.tokens.empty() ? kBosId : hyp.tokens.back();
            auto out = model.step(tape, features, state);
            const auto logp = log_softmax_values(out.logits);
            for (std::size_t tok = 0; tok < logp.size(); ++tok) {
                BeamHypothesis next;
                next.tokens = hyp.tokens;
                next.log_prob = hyp.log_prob + logp[tok];
                next.state = out.state;
                if (static_cast<int>(tok) == kEosId) {
                    next.finished = true;
                    next.tokens.push_back(kEosId);
                } else {
                    next.tokens.push_back(static_cast<int>(tok));
                }
                candidates.push_back(std::move(next));
            }
        }
        if (!any_active) break;
        std::sort(candidates.begin(), candidates.end(), better);
        if (candidates.size() > beam_size) candidates.resize(beam_size);
        beam = std::move(candidates);
    }
    std::sort(beam.begin(), beam.end(), better);
    return beam;
}

SampleResult sample_decode(const CaptionModel& model, const VisualFeatures& features,
                           std::size_t max_len, std::mt19937_64& rng) {
    Tape tape;
    tape.grad_enabled = false;
    SampleResult result;
    DecoderState state = model.initial_state(tape);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t t = 0; t < max_len; ++t) {
        auto out = model.step(tape, features, state);
        const double u = unit(rng);
        double acc = 0.0;
        std::size_t drawn = out.probs->size() - 1;
        for (std::size_t i = 0; i < out.probs->size(); ++i) {
            acc += out.probs->data[i];
            if (u < acc) {
                drawn = i;
                break;
            }
        }
        const auto logp = log_softmax_values(out.logits);
        result.drawn.push_back(static_cast<int>(drawn));
        result.step_log_probs.push_back(logp[drawn]);
        if (static_cast<int>(drawn) == kEosId) break;
        result.tokens.push_back(static_cast<int>(drawn));
        state = out.state;
        state.prev_token = static_cast<int>(drawn);
    }
    return result;
}

double sequence_log_prob(const CaptionModel& model, const VisualFeatures& features,
                         const std::vector<int>& interior_tokens, std::size_t max_len) {
    Tape tape;
    tape.grad_enabled = false;
    double total = 0.0;
    DecoderState state = model.initial_state(tape);
    for (std::size_t t = 0; t < interior_tokens.size(); ++t) {
        state.prev_token = t == 0 ? kBosId : interior_tokens[t - 1];
        auto out = model.step(tape, features, state);
        total += log_softmax_values(out.logits)[static_cast<std::size_t>(interior_tokens[t])];
        state = out.state;
    }
    if (interior_tokens.size() < max_len) {
        state.prev_token = interior_tokens.empty() ? kBosId : interior_tokens.back();
        auto out = model.step(tape, features, state);
        total += log_softmax_values(out.logits)[kEosId];
    }
    return total;
}

}  // namespace aclite
