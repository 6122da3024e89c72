#include "aclite/encoder.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace aclite {

FeatureMap adaptive_pool(const FeatureMap& map, std::size_t target_h, std::size_t target_w) {
    if (target_h == 0 || target_w == 0 || target_h > map.height || target_w > map.width) {
        throw DimensionError("adaptive_pool: target " + std::to_string(target_h) + "x" +
                             std::to_string(target_w) + " vs source " + std::to_string(map.height) +
                             "x" + std::to_string(map.width));
    }
    FeatureMap out;
    out.channels = map.channels;
    out.height = target_h;
    out.width = target_w;
    out.values.assign(map.channels * target_h * target_w, 0.0);
    for (std::size_t c = 0; c < map.channels; ++c)
        for (std::size_t by = 0; by < target_h; ++by) {
            const std::size_t y0 = by * map.height / target_h;
            const std::size_t y1 = (by + 1) * map.height / target_h;
            for (std::size_t bx = 0; bx < target_w; ++bx) {
                const std::size_t x0 = bx * map.width / target_w;
                const std::size_t x1 = (bx + 1) * map.width / target_w;
                double acc = 0.0;
                for (std::size_t y = y0; y < y1; ++y)
                    for (std::size_t x = x0; x < x1; ++x) acc += map.at(c, y, x);
                out.at(c, by, bx) = acc / static_cast<double>((y1 - y0) * (x1 - x0));
            }
        }
    return out;
}

VisualFeatures flatten(const FeatureMap& map) {
    const std::size_t n_a = map.height * map.width;
    VisualFeatures vf;
    vf.A = Tensor::zeros({map.channels, n_a});
    for (std::size_t c = 0; c < map.channels; ++c)
        for (std::size_t y = 0; y < map.height; ++y)
            for (std::size_t x = 0; x < map.width; ++x)
                vf.A->data[c * n_a + y * map.width + x] = map.at(c, y, x);
    vf.mean_pooled = Tensor::zeros({map.channels});
    for (std::size_t c = 0; c < map.channels; ++c) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n_a; ++i) acc += vf.A->data[c * n_a + i];
        vf.mean_pooled->data[c] = acc / static_cast<double>(n_a);
    }
    return vf;
}

VisualFeatures flatten_on_tape(Tape& tape, const TensorPtr& map) {
    if (map->shape.size() != 3) throw DimensionError("flatten_on_tape: need 3-D map, got " + shape_str(map->shape));
    const std::size_t d_a = map->shape[0];
    const std::size_t n_a = map->shape[1] * map->shape[2];
    VisualFeatures vf;
    vf.A = ops::reshape(tape, map, {d_a, n_a});
    vf.mean_pooled = ops::mean_over_columns(tape, vf.A);
    return vf;
}

namespace {

constexpr char kFeatureMagic[4] = {'A', 'C', 'L', 'F'};
constexpr std::uint32_t kFeatureVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32(std::ostream& os, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(os, bits);
}

float read_f32(std::istream& is) {
    std::uint32_t bits = read_u32(is);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

}  // namespace

void save_features(const FeatureMap& map, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    os.write(kFeatureMagic, 4);
    write_u32(os, kFeatureVersion);
    write_u32(os, static_cast<std::uint32_t>(map.channels));
    write_u32(os, static_cast<std::uint32_t>(map.height));
    write_u32(os, static_cast<std::uint32_t>(map.width));
    for (double v : map.values) write_f32(os, static_cast<float>(v));
    if (!os) throw FormatError("write failed for " + path);
}

FeatureMap load_features(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kFeatureMagic, 4) != 0)
        throw FormatError(path + ": bad magic at byte offset 0");
    const std::uint32_t version = read_u32(is);
    if (version != kFeatureVersion)
        throw FormatError(path + ": unsupported version " + std::to_string(version) +
                          " at byte offset 4");
    FeatureMap map;
    map.channels = read_u32(is);
    map.height = read_u32(is);
    map.width = read_u32(is);
    if (!is || map.channels == 0 || map.height == 0 || map.width == 0 ||
        map.channels > (1u << 20) || map.height > (1u << 16) || map.width > (1u << 16))
        throw FormatError(path + ": bad extents at byte offset 8");
    map.values.resize(map.channels * map.height * map.width);
    for (double& v : map.values) v = read_f32(is);
    if (!is) throw FormatError(path + ": truncated payload at byte offset 20");
    return map;
}

TinyCnn TinyCnn::create(ParamStore& params, std::size_t out_channels, std::mt19937_64& rng) {
    TinyCnn cnn;
    cnn.out_channels = out_channels;
    const std::size_t widths[4] = {3, 8, 16, out_channels};
    for (std::size_t layer = 0; layer < 3; ++layer) {
        const std::size_t ic = widths[layer], oc = widths[layer + 1];
        auto w = Tensor::zeros({oc, ic, 3, 3});
        init_uniform(*w, ic * 9, oc * 9, rng);
        params.add("tiny_cnn.conv" + std::to_string(layer) + ".weight", w);
        auto b = Tensor::zeros({oc});
        params.add("tiny_cnn.conv" + std::to_string(layer) + ".bias", b);
        cnn.weights.push_back(w);
        cnn.biases.push_back(b);
    }
    return cnn;
}

TensorPtr TinyCnn::forward(Tape& tape, const TensorPtr& image) const {
    if (image->shape.size() != 3 || image->shape[0] != 3 || image->shape[1] % 8 != 0 ||
        image->shape[2] % 8 != 0) {
        throw DimensionError("tiny_cnn: need 3xHxW image with H,W divisible by 8, got " +
                             shape_str(image->shape));
    }
    TensorPtr x = image;
    for (std::size_t layer = 0; layer < weights.size(); ++layer) {
        x = ops::conv2d(tape, x, weights[layer], biases[layer], /*stride=*/2, /*pad=*/1);
        x = ops::tanh(tape, x);
    }
    return x;
}

}  // namespace aclite
