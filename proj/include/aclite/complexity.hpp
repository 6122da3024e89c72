#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aclite/model.hpp"

namespace aclite {

enum class FlopConvention { Mac, TwoMac };

FlopConvention convention_from_string(const std::string& s);
std::string convention_to_string(FlopConvention c);

struct LayerCost {
    std::string name;
    std::uint64_t params = 0;
    std::uint64_t flops_per_invocation = 0;  // MACs under the Mac convention
    std::uint64_t invocations = 1;           // per caption
};

struct ComponentCost {
    std::string name;
    std::uint64_t params = 0;
    std::uint64_t flops = 0;
};

struct EncoderCostEntry {
    std::string name;
    double mflops = 0.0;   // at 224x224 input
    double params_m = 0.0;
    std::string provenance;
};

const std::vector<EncoderCostEntry>& encoder_cost_table();
const EncoderCostEntry& lookup_encoder(const std::string& name);

struct ComplexityReport {
    std::string encoder_name;  // table entry, "tiny-cnn", or "none"
    std::string convention;
    std::size_t seq_len = 0;
    std::vector<LayerCost> layers;  // non-encoder layers
    ComponentCost encoder;
    ComponentCost attention;
    ComponentCost decoder;
    double total_mflops = 0.0;
    double total_params_m = 0.0;
    double non_encoder_mflops = 0.0;
    std::uint64_t non_encoder_params = 0;

    std::string to_json() const;
};

/// MAC cost of one GRU step: three gate mat-vecs plus the elementwise blend.
std::uint64_t gru_step_macs(std::size_t input, std::size_t hidden);
std::uint64_t attention_step_macs(const ModelConfig& config);
std::uint64_t decoder_step_macs(const ModelConfig& config);
std::uint64_t non_encoder_step_macs(const ModelConfig& config);

/// Exact per-tensor parameter counts from the configuration alone.
std::vector<LayerCost> count_params(const ModelConfig& config);
std::uint64_t total_param_count(const ModelConfig& config);

/// Full report. encoder_name may be a cost-table entry, "tiny-cnn" (direct
/// count at the given image extent), or "none".
ComplexityReport count_flops(const ModelConfig& config, std::size_t seq_len,
                             FlopConvention convention, const std::string& encoder_name = "none",
                             std::size_t image_hw = 32);

/// Markdown table, one row per report (encoder variants).
std::string render_table(const std::vector<ComplexityReport>& reports);

/// Reference costs reported for the full-scale AC-Lite configuration, for
/// side-by-side comparison in reports.
struct PublishedCosts {
    double total_mflops = 1097.575;
    double total_params_m = 25.65;
};

}  // namespace aclite
