#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "aclite/data.hpp"
#include "aclite/decoding.hpp"
#include "aclite/metrics.hpp"
#include "aclite/model.hpp"

namespace aclite {

struct TrainConfig {
    double learning_rate = 5e-4;
    std::size_t epochs = 30;
    std::size_t batch_size = 50;
    std::size_t max_len = 16;
    std::uint64_t seed = 0;
    Wiring wiring = Wiring::ButdStyle;
};

struct TrainExample {
    VisualFeatures features;
    std::vector<int> tokens;           // BOS ... EOS
    std::vector<metrics::TokenSeq> references;  // for SCST rewards
};

struct EpochLog {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
};

/// Cross-entropy training with teacher forcing. Seeded Fisher-Yates shuffle
/// per epoch; the last partial batch is kept.
std::vector<EpochLog> train_xe(CaptionModel& model, std::vector<TrainExample>& dataset,
                               const TrainConfig& config, AdamState& adam);

/// Reward for SCST: CIDEr-D of one hypothesis against one image's
/// references, IDF frozen at construction.
using RewardFn = std::function<double(const std::vector<int>& tokens,
                                      const std::vector<metrics::TokenSeq>& references)>;

RewardFn make_cider_reward(const metrics::CiderIdf& idf, const Vocabulary& vocab);

struct ScstStats {
    double mean_sample_reward = 0.0;
    double mean_baseline_reward = 0.0;
};

/// One self-critical step over a batch: sample vs greedy baseline, loss
/// -(r_sample - r_greedy) * sum log p(sampled), Adam update.
ScstStats scst_step(CaptionModel& model, const std::vector<TrainExample*>& batch,
                    const RewardFn& reward, AdamState& adam, std::size_t max_len,
                    std::mt19937_64& rng);

void save_checkpoint(const ParamStore& params, const std::string& path,
                     const std::string& meta_json);
/// Loads tensors into the store by name; shapes must match exactly.
std::string load_checkpoint(ParamStore& params, const std::string& path);

}  // namespace aclite
