#include "aclite/complexity.hpp"

#include <sstream>

#include <json.hpp>

namespace aclite {

FlopConvention convention_from_string(const std::string& s) {
    if (s == "mac") return FlopConvention::Mac;
    if (s == "2mac") return FlopConvention::TwoMac;
    throw ConfigError("unknown FLOPs convention: " + s + " (expected mac or 2mac)");
}

std::string convention_to_string(FlopConvention c) {
    return c == FlopConvention::Mac ? "mac" : "2mac";
}

const std::vector<EncoderCostEntry>& encoder_cost_table() {
    static const std::vector<EncoderCostEntry> table = {
        {"ShuffleNetV2x0.5", 41.0, 1.4, "Ma et al., ShuffleNet V2, ECCV 2018"},
        {"MobileNetV3_Small", 56.0, 2.5, "Howard et al., Searching for MobileNetV3, ICCV 2019"},
        {"MobileNetV1x0.25", 41.0, 0.5, "Howard et al., MobileNets, arXiv 2017"},
        {"ShuffleNetV2x1.0", 146.0, 2.3, "Ma et al., ShuffleNet V2, ECCV 2018"},
        {"MobileNetV3_Large", 219.0, 5.4, "Howard et al., Searching for MobileNetV3, ICCV 2019"},
        {"ShuffleNetV2x1.5", 299.0, 3.5, "Ma et al., ShuffleNet V2, ECCV 2018"},
        {"EfficientNetB0", 390.0, 5.3, "Tan & Le, EfficientNet, ICML 2019"},
        {"ShuffleNetV2x2.0", 591.0, 7.4, "Ma et al., ShuffleNet V2, ECCV 2018"},
        {"EfficientNetB1", 700.0, 7.8, "Tan & Le, EfficientNet, ICML 2019"},
        {"ResNet101", 7800.0, 44.5, "He et al., Deep Residual Learning, CVPR 2016"},
    };
    return table;
}

const EncoderCostEntry& lookup_encoder(const std::string& name) {
    for (const auto& e : encoder_cost_table())
        if (e.name == name) return e;
    throw ConfigError("unknown encoder backbone: " + name);
}

std::uint64_t gru_step_macs(std::size_t input, std::size_t hidden) {
    const std::uint64_t gates = 3ull * hidden * (input + hidden);
    const std::uint64_t blend = 4ull * hidden;  // r.h, (1-z) scale, (1-z).h, z.cand
    return gates + blend;
}

std::uint64_t attention_step_macs(const ModelConfig& c) {
    std::uint64_t macs = gru_step_macs(c.attention_input_dim(), c.d_h);
    macs += static_cast<std::uint64_t>(c.d_e) * c.d_h;        // W_e^h h
    macs += static_cast<std::uint64_t>(c.d_e) * c.d_a * c.n_a;  // W_e^a A
    macs += static_cast<std::uint64_t>(c.d_e) * c.n_a;        // elementwise pooling
    macs += static_cast<std::uint64_t>(c.d_e) * c.n_a;        // score dot products
    macs += static_cast<std::uint64_t>(c.d_a) * c.n_a;        // weighted feature sum
    return macs;
}

std::uint64_t decoder_step_macs(const ModelConfig& c) {
    return gru_step_macs(c.d_a, c.d_h) + static_cast<std::uint64_t>(c.vocab_size) * c.d_h;
}

std::uint64_t non_encoder_step_macs(const ModelConfig& c) {
    return attention_step_macs(c) + decoder_step_macs(c);
}

namespace {

std::uint64_t gru_params(std::size_t input, std::size_t hidden, bool bias) {
    return 3ull * (hidden * (input + hidden) + (bias ? hidden : 0));
}

}  // namespace

std::vector<LayerCost> count_params(const ModelConfig& c) {
    if (c.vocab_size == 0 || c.d_a == 0 || c.d_h == 0 || c.d_e == 0)
        throw ConfigError("count_params: incomplete configuration");
    std::vector<LayerCost> layers;
    const std::size_t in_a = c.attention_input_dim();
    layers.push_back({"gru_attention", gru_params(in_a, c.d_h, c.gru_bias),
                      gru_step_macs(in_a, c.d_h), c.max_len});
    layers.push_back({"attn_embed_hidden", static_cast<std::uint64_t>(c.d_e) * c.d_h,
                      static_cast<std::uint64_t>(c.d_e) * c.d_h, c.max_len});
    layers.push_back({"attn_embed_visual", static_cast<std::uint64_t>(c.d_e) * c.d_a,
                      static_cast<std::uint64_t>(c.d_e) * c.d_a * c.n_a, c.max_len});
    layers.push_back({"attn_score", static_cast<std::uint64_t>(c.d_e),
                      2ull * c.d_e * c.n_a + static_cast<std::uint64_t>(c.d_a) * c.n_a, c.max_len});
    if (c.wiring == Wiring::ButdStyle)
        layers.push_back({"embedding", static_cast<std::uint64_t>(c.vocab_size) * c.d_w, 0, c.max_len});
    layers.push_back({"gru_language", gru_params(c.d_a, c.d_h, c.gru_bias),
                      gru_step_macs(c.d_a, c.d_h), c.max_len});
    layers.push_back({"output",
                      static_cast<std::uint64_t>(c.vocab_size) * c.d_h +
                          (c.output_bias ? c.vocab_size : 0),
                      static_cast<std::uint64_t>(c.vocab_size) * c.d_h, c.max_len});
    return layers;
}

std::uint64_t total_param_count(const ModelConfig& c) {
    std::uint64_t total = 0;
    for (const auto& l : count_params(c)) total += l.params;
    return total;
}

ComplexityReport count_flops(const ModelConfig& config, std::size_t seq_len,
                             FlopConvention convention, const std::string& encoder_name,
                             std::size_t image_hw) {
    ComplexityReport report;
    report.encoder_name = encoder_name;
    report.convention = convention_to_string(convention);
    report.seq_len = seq_len;
    report.layers = count_params(config);
    for (auto& l : report.layers) l.invocations = seq_len;

    const double factor = convention == FlopConvention::TwoMac ? 2.0 : 1.0;

    const std::uint64_t attn_macs = attention_step_macs(config) * seq_len;
    const std::uint64_t dec_macs = decoder_step_macs(config) * seq_len;
    std::uint64_t attn_params = gru_params(config.attention_input_dim(), config.d_h, config.gru_bias) +
                                static_cast<std::uint64_t>(config.d_e) * config.d_h +
                                static_cast<std::uint64_t>(config.d_e) * config.d_a + config.d_e;
    if (config.wiring == Wiring::ButdStyle)
        attn_params += static_cast<std::uint64_t>(config.vocab_size) * config.d_w;
    const std::uint64_t dec_params =
        gru_params(config.d_a, config.d_h, config.gru_bias) +
        static_cast<std::uint64_t>(config.vocab_size) * config.d_h +
        (config.output_bias ? config.vocab_size : 0);

    report.attention = {"attention", attn_params, attn_macs};
    report.decoder = {"decoder", dec_params, dec_macs};

    double encoder_mflops = 0.0;
    double encoder_params_m = 0.0;
    if (encoder_name == "none") {
        // no encoder contribution
    } else if (encoder_name == "tiny-cnn") {
        // direct count of the three 3x3 stride-2 conv layers
        const std::size_t widths[4] = {3, 8, 16, config.d_a};
        std::size_t hw = image_hw;
        std::uint64_t macs = 0;
        std::uint64_t params = 0;
        for (std::size_t layer = 0; layer < 3; ++layer) {
            hw = (hw + 2 - 3) / 2 + 1;
            macs += static_cast<std::uint64_t>(widths[layer + 1]) * hw * hw * widths[layer] * 9;
            params += static_cast<std::uint64_t>(widths[layer + 1]) * widths[layer] * 9 +
                      widths[layer + 1];
        }
        encoder_mflops = static_cast<double>(macs) * factor / 1e6;
        encoder_params_m = static_cast<double>(params) / 1e6;
        report.encoder = {"tiny-cnn", params, macs};
    } else {
        const auto& entry = lookup_encoder(encoder_name);
        // published costs are conventional FLOPs figures; carried through as-is
        encoder_mflops = entry.mflops;
        encoder_params_m = entry.params_m;
        report.encoder = {entry.name, static_cast<std::uint64_t>(entry.params_m * 1e6),
                          static_cast<std::uint64_t>(entry.mflops * 1e6)};
    }

    report.non_encoder_mflops = static_cast<double>(attn_macs + dec_macs) * factor / 1e6;
    report.non_encoder_params = attn_params + dec_params;
    report.total_mflops = report.non_encoder_mflops + encoder_mflops;
    report.total_params_m =
        static_cast<double>(report.non_encoder_params) / 1e6 + encoder_params_m;
    return report;
}

std::string ComplexityReport::to_json() const {
    nlohmann::json j;
    j["encoder"] = encoder_name;
    j["convention"] = convention;
    j["seq_len"] = seq_len;
    j["components"] = nlohmann::json::array();
    for (const auto* comp : {&encoder, &attention, &decoder}) {
        if (comp->name.empty()) continue;
        j["components"].push_back(
            {{"name", comp->name}, {"params", comp->params}, {"flops", comp->flops}});
    }
    j["layers"] = nlohmann::json::array();
    for (const auto& l : layers)
        j["layers"].push_back({{"name", l.name},
                               {"params", l.params},
                               {"flops_per_invocation", l.flops_per_invocation},
                               {"invocations", l.invocations}});
    j["non_encoder_mflops"] = non_encoder_mflops;
    j["non_encoder_params"] = non_encoder_params;
    j["total_mflops"] = total_mflops;
    j["total_params_m"] = total_params_m;
    return j.dump(2);
}

std::string render_table(const std::vector<ComplexityReport>& reports) {
    if (reports.empty()) throw ConfigError("render_table: no reports");
    std::ostringstream os;
    os << "| Encoder | Encoder MFLOPs | Non-encoder MFLOPs | Total MFLOPs | Total Param (M) |\n";
    os << "|---|---|---|---|---|\n";
    for (const auto& r : reports) {
        const double enc_mflops = r.total_mflops - r.non_encoder_mflops;
        os << "| " << r.encoder_name << " | " << enc_mflops << " | " << r.non_encoder_mflops
           << " | " << r.total_mflops << " | " << r.total_params_m << " |\n";
    }
    return os.str();
}

}  // namespace aclite
