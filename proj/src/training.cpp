#include "aclite/training.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace aclite {

namespace {

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

void write_u16(std::ostream& os, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    os.write(reinterpret_cast<const char*>(b), 2);
}

std::uint16_t read_u16(std::istream& is) {
    unsigned char b[2];
    is.read(reinterpret_cast<char*>(b), 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

void write_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

constexpr char kCheckpointMagic[4] = {'A', 'C', 'L', 'C'};

}  // namespace

std::vector<EpochLog> train_xe(CaptionModel& model, std::vector<TrainExample>& dataset,
                               const TrainConfig& config, AdamState& adam) {
    if (dataset.empty()) throw ConfigError("train_xe: empty dataset");
    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<EpochLog> log;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        // seeded Fisher-Yates
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = rng() % i;
            std::swap(order[i - 1], order[j]);
        }
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            Tape tape;
            TensorPtr batch_loss;
            for (std::size_t k = start; k < end; ++k) {
                auto& ex = dataset[order[k]];
                auto result = model.forward_teacher_forced(tape, ex.features, ex.tokens);
                loss_sum += result.loss->data[0];
                auto scaled = ops::scale(tape, result.loss, 1.0 / static_cast<double>(end - start));
                batch_loss = batch_loss ? ops::add(tape, batch_loss, scaled) : scaled;
            }
            tape.backward(batch_loss);
            adam_step(model.params(), adam);
        }
        log.push_back({epoch, loss_sum / static_cast<double>(dataset.size())});
    }
    return log;
}

RewardFn make_cider_reward(const metrics::CiderIdf& idf, const Vocabulary& vocab) {
    return [&idf, &vocab](const std::vector<int>& tokens,
                          const std::vector<metrics::TokenSeq>& references) {
        metrics::TokenSeq hyp;
        for (int id : tokens)
            if (id >= 4) hyp.push_back(vocab.token(id));
        return idf.score_single(hyp, references);
    };
}

ScstStats scst_step(CaptionModel& model, const std::vector<TrainExample*>& batch,
                    const RewardFn& reward, AdamState& adam, std::size_t max_len,
                    std::mt19937_64& rng) {
    if (batch.empty()) throw ConfigError("scst_step: empty batch");
    ScstStats stats;
    Tape tape;
    TensorPtr total_loss;
    std::size_t contributing = 0;
    for (TrainExample* ex : batch) {
        if (ex->references.empty()) throw MetricError("scst_step: example without references");
        auto sample = sample_decode(model, ex->features, max_len, rng);
        auto baseline = greedy_decode(model, ex->features, max_len);
        const double r_sample = reward(sample.tokens, ex->references);
        const double r_baseline = reward(baseline, ex->references);
        stats.mean_sample_reward += r_sample;
        stats.mean_baseline_reward += r_baseline;
        const double advantage = r_sample - r_baseline;
        if (advantage == 0.0) continue;  // exactly zero gradient

        // Taped re-run over the sampled sequence; the drawn tokens are both
        // the teacher-forced inputs and the targets.
        const std::size_t T = sample.drawn.size();
        std::vector<TensorPtr> logit_rows;
        DecoderState state = model.initial_state(tape);
        for (std::size_t t = 0; t < T; ++t) {
            state.prev_token = t == 0 ? kBosId : sample.drawn[t - 1];
            auto out = model.step(tape, ex->features, state);
            logit_rows.push_back(out.logits);
            state = out.state;
        }
        auto logits = ops::stack_rows(tape, logit_rows);
        std::vector<std::uint8_t> mask(T, 1);
        auto mean_nll = ops::cross_entropy(tape, logits, sample.drawn, mask);
        // loss = advantage * sum nll = -(r_s - r_b) * sum log p
        auto contrib = ops::scale(tape, mean_nll, advantage * static_cast<double>(T));
        total_loss = total_loss ? ops::add(tape, total_loss, contrib) : contrib;
        ++contributing;
    }
    stats.mean_sample_reward /= static_cast<double>(batch.size());
    stats.mean_baseline_reward /= static_cast<double>(batch.size());
    if (total_loss) {
        auto scaled = ops::scale(tape, total_loss, 1.0 / static_cast<double>(batch.size()));
        tape.backward(scaled);
        adam_step(model.params(), adam);
    }
    return stats;
}

void save_checkpoint(const ParamStore& params, const std::string& path,
                     const std::string& meta_json) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    os.write(kCheckpointMagic, 4);
    write_u32(os, 1);  // version
    write_u32(os, static_cast<std::uint32_t>(params.items().size()));
    for (const auto& [name, t] : params.items()) {
        write_u16(os, static_cast<std::uint16_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        os.put(static_cast<char>(t->shape.size()));
        for (std::size_t e : t->shape) write_u32(os, static_cast<std::uint32_t>(e));
        for (double v : t->data) write_f64(os, v);
    }
    if (!os) throw FormatError("write failed for " + path);
    if (!meta_json.empty()) {
        std::ofstream meta(path + ".meta.json", std::ios::binary);
        meta << meta_json;
    }
}

std::string load_checkpoint(ParamStore& params, const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw FormatError(path + ": bad magic");
    const std::uint32_t version = read_u32(is);
    if (version != 1) throw FormatError(path + ": unsupported version " + std::to_string(version));
    const std::uint32_t count = read_u32(is);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint16_t name_len = read_u16(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        const int rank = is.get();
        std::vector<std::size_t> shape;
        for (int r = 0; r < rank; ++r) shape.push_back(read_u32(is));
        if (!is) throw FormatError(path + ": truncated tensor header");
        auto t = params.get(name);
        if (t->shape != shape)
            throw FormatError(path + ": shape mismatch for " + name + ": file " + shape_str(shape) +
                              " vs model " + shape_str(t->shape));
        for (double& v : t->data) v = read_f64(is);
    }
    if (!is) throw FormatError(path + ": truncated payload");
    std::ifstream meta(path + ".meta.json", std::ios::binary);
    if (!meta) return "";
    std::string json((std::istreambuf_iterator<char>(meta)), std::istreambuf_iterator<char>());
    return json;
}

}  // namespace aclite
