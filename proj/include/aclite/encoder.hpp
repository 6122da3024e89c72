#pragma once

#include <string>
#include <vector>

#include "aclite/tensor.hpp"

namespace aclite {

/// Raw d_a x n_h x n_w encoder output, channel-major.
struct FeatureMap {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> values;  // index (c*height + y)*width + x

    double at(std::size_t c, std::size_t y, std::size_t x) const {
        return values[(c * height + y) * width + x];
    }
    double& at(std::size_t c, std::size_t y, std::size_t x) {
        return values[(c * height + y) * width + x];
    }
};

/// Flattened region features A (d_a x n_a) plus the mean-pooled vector.
struct VisualFeatures {
    TensorPtr A;            // d_a x n_a
    TensorPtr mean_pooled;  // d_a
    std::size_t d_a() const { return A->shape[0]; }
    std::size_t n_a() const { return A->shape[1]; }
};

/// Average pooling over near-equal rectangular bins; bin i of t bins over
/// extent N spans [floor(i*N/t), floor((i+1)*N/t)).
FeatureMap adaptive_pool(const FeatureMap& map, std::size_t target_h, std::size_t target_w);

/// Column i of A is the channel fiber at spatial position i (row-major over
/// height then width).
VisualFeatures flatten(const FeatureMap& map);

/// Same flattening but through the tape, for end-to-end training of the tiny
/// CNN provider. Input tensor shape is {d_a, n_h, n_w}.
VisualFeatures flatten_on_tape(Tape& tape, const TensorPtr& map);

void save_features(const FeatureMap& map, const std::string& path);
FeatureMap load_features(const std::string& path);

/// Small trainable conv stack standing in for a pretrained backbone:
/// three 3x3 stride-2 tanh conv layers ending at d_a channels.
struct TinyCnn {
    std::vector<TensorPtr> weights;  // per layer, oc x ic x 3 x 3
    std::vector<TensorPtr> biases;
    std::size_t out_channels = 0;

    static TinyCnn create(ParamStore& params, std::size_t out_channels, std::mt19937_64& rng);

    /// image: {3, H, W} with H, W divisible by 8; returns {d_a, H/8, W/8}.
    TensorPtr forward(Tape& tape, const TensorPtr& image) const;
};

}  // namespace aclite
