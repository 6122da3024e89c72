// Command-line front end: data preparation, training, decoding, evaluation,
// and the complexity profiler, all behind one binary.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

#include "aclite/complexity.hpp"
#include "aclite/training.hpp"

using namespace aclite;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct Options {
    std::string config_file;
    std::string manifest;
    std::string vocab_path;
    std::string checkpoint;
    std::string init_checkpoint;
    std::string out;
    std::string features;
    std::string mode = "xe";
    std::string wiring = "butd";
    std::string convention = "mac";
    std::string encoder = "none";
    std::size_t d_h = 512, d_e = 512, d_w = 512;
    std::size_t max_len = 16;
    std::size_t epochs = 30;
    std::size_t batch_size = 50;
    std::size_t beam = 0;
    bool greedy = false;
    bool desk = false;
    bool table = false;
    double learning_rate = 5e-4;
    std::uint64_t seed = 0;
    std::size_t min_count = 5;
    std::size_t n_images = 50;
    std::size_t seq_len = 16;
};

// Config-file keys mirror the long flags; explicitly passed flags win.
void apply_config_file(Options& opt, CLI::App& cmd) {
    if (opt.config_file.empty()) return;
    std::ifstream is(opt.config_file);
    if (!is) throw FormatError("cannot open config file " + opt.config_file);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(opt.config_file + ": " + e.what());
    }
    auto seen = [&](const std::string& flag) {
        auto* o = cmd.get_option_no_throw("--" + flag);
        return o != nullptr && o->count() > 0;
    };
    for (auto& [key, value] : j.items()) {
        if (key == "d_h" && !seen("d-h")) opt.d_h = value.get<std::size_t>();
        else if (key == "d_e" && !seen("d-e")) opt.d_e = value.get<std::size_t>();
        else if (key == "d_w" && !seen("d-w")) opt.d_w = value.get<std::size_t>();
        else if (key == "max_len" && !seen("max-len")) opt.max_len = value.get<std::size_t>();
        else if (key == "epochs" && !seen("epochs")) opt.epochs = value.get<std::size_t>();
        else if (key == "batch_size" && !seen("batch")) opt.batch_size = value.get<std::size_t>();
        else if (key == "learning_rate" && !seen("lr")) opt.learning_rate = value.get<double>();
        else if (key == "seed" && !seen("seed")) opt.seed = value.get<std::uint64_t>();
        else if (key == "wiring" && !seen("wiring")) opt.wiring = value.get<std::string>();
        else if (key == "beam" && !seen("beam")) opt.beam = value.get<std::size_t>();
        else if (key == "min_count" && !seen("min-count")) opt.min_count = value.get<std::size_t>();
        else if (key == "convention" && !seen("convention")) opt.convention = value.get<std::string>();
        else if (key == "d_h" || key == "d_e" || key == "d_w" || key == "max_len" ||
                 key == "epochs" || key == "batch_size" || key == "learning_rate" ||
                 key == "seed" || key == "wiring" || key == "beam" || key == "min_count" ||
                 key == "convention") {
            // known key overridden by a flag
        } else {
            throw ConfigError("unknown config key: " + key);
        }
    }
}

void apply_desk_profile(Options& opt) {
    if (!opt.desk) return;
    opt.d_h = 32;
    opt.d_e = 16;
    opt.d_w = 16;
}

std::vector<std::vector<std::string>> manifest_token_lists(const DatasetManifest& manifest,
                                                           const std::string& split) {
    std::vector<std::vector<std::string>> corpus;
    for (const auto& img : manifest.images) {
        if (!split.empty() && img.split != split) continue;
        for (const auto& cap : img.captions) corpus.push_back(tokenize(cap));
    }
    return corpus;
}

struct LoadedExample {
    TrainExample example;
    std::string id;
};

std::vector<LoadedExample> load_examples(const DatasetManifest& manifest,
                                         const fs::path& manifest_dir, const Vocabulary& vocab,
                                         const std::string& split, std::size_t max_len) {
    std::vector<LoadedExample> out;
    for (const auto& img : manifest.images) {
        if (!split.empty() && img.split != split) continue;
        if (img.features.empty())
            throw FormatError("image " + img.id + " has no feature file");
        if (img.captions.empty()) throw FormatError("image " + img.id + " has no captions");
        LoadedExample le;
        le.id = img.id;
        le.example.features = flatten(load_features((manifest_dir / img.features).string()));
        le.example.tokens = vocab.encode(tokenize(img.captions[0]), max_len);
        for (const auto& cap : img.captions) le.example.references.push_back(tokenize(cap));
        out.push_back(std::move(le));
    }
    if (out.empty()) throw FormatError("no images in split '" + split + "'");
    return out;
}

nlohmann::json model_meta(const ModelConfig& c) {
    return {{"d_a", c.d_a},   {"n_a", c.n_a},          {"d_h", c.d_h},
            {"d_e", c.d_e},   {"d_w", c.d_w},          {"vocab_size", c.vocab_size},
            {"max_len", c.max_len}, {"wiring", wiring_to_string(c.wiring)}};
}

ModelConfig config_from_meta(const std::string& meta_json, const std::string& path) {
    if (meta_json.empty())
        throw FormatError("checkpoint " + path + " has no metadata sidecar");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(meta_json);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ".meta.json: " + e.what());
    }
    ModelConfig c;
    c.d_a = j.at("d_a").get<std::size_t>();
    c.n_a = j.at("n_a").get<std::size_t>();
    c.d_h = j.at("d_h").get<std::size_t>();
    c.d_e = j.at("d_e").get<std::size_t>();
    c.d_w = j.at("d_w").get<std::size_t>();
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.max_len = j.at("max_len").get<std::size_t>();
    c.wiring = wiring_from_string(j.at("wiring").get<std::string>());
    return c;
}

int cmd_build_vocab(const Options& opt) {
    auto manifest = DatasetManifest::load(opt.manifest);
    auto corpus = manifest_token_lists(manifest, "train");
    if (corpus.empty()) corpus = manifest_token_lists(manifest, "");
    auto vocab = Vocabulary::build(corpus, opt.min_count);
    vocab.save(opt.out);
    std::cerr << "wrote vocabulary of " << vocab.size() << " tokens to " << opt.out << "\n";
    return kExitOk;
}

int cmd_gen_toy(const Options& opt) {
    ToyGrammar grammar;
    auto manifest = generate_toy_corpus(opt.seed, opt.n_images, grammar, opt.out);
    std::cerr << "generated " << manifest.images.size() << " toy images under " << opt.out << "\n";
    return kExitOk;
}

int cmd_train(const Options& opt) {
    auto manifest = DatasetManifest::load(opt.manifest);
    const fs::path manifest_dir = fs::path(opt.manifest).parent_path();
    auto vocab = Vocabulary::load(opt.vocab_path);
    auto loaded = load_examples(manifest, manifest_dir, vocab, "train", opt.max_len);

    ModelConfig config;
    config.d_a = loaded[0].example.features.d_a();
    config.n_a = loaded[0].example.features.n_a();
    config.d_h = opt.d_h;
    config.d_e = opt.d_e;
    config.d_w = opt.d_w;
    config.vocab_size = vocab.size();
    config.max_len = opt.max_len;
    config.wiring = wiring_from_string(opt.wiring);

    CaptionModel model(config, opt.seed);
    if (!opt.init_checkpoint.empty()) {
        auto meta = load_checkpoint(model.params(), opt.init_checkpoint);
        if (!meta.empty()) config = config_from_meta(meta, opt.init_checkpoint);
    }

    std::vector<TrainExample> dataset;
    for (auto& le : loaded) dataset.push_back(std::move(le.example));

    AdamState adam;
    adam.learning_rate = opt.learning_rate;

    if (opt.mode == "xe") {
        TrainConfig tc;
        tc.learning_rate = opt.learning_rate;
        tc.epochs = opt.epochs;
        tc.batch_size = opt.batch_size;
        tc.max_len = opt.max_len;
        tc.seed = opt.seed;
        tc.wiring = config.wiring;
        auto log = train_xe(model, dataset, tc, adam);
        for (const auto& entry : log)
            std::cerr << "epoch " << entry.epoch << " mean loss " << entry.mean_loss << "\n";
    } else if (opt.mode == "scst") {
        std::vector<std::vector<metrics::TokenSeq>> refs;
        for (const auto& ex : dataset) refs.push_back(ex.references);
        auto idf = metrics::CiderIdf::build(refs);
        auto reward = make_cider_reward(idf, vocab);
        std::mt19937_64 rng(opt.seed);
        for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
            double sample_r = 0.0, baseline_r = 0.0;
            std::size_t batches = 0;
            for (std::size_t start = 0; start < dataset.size(); start += opt.batch_size) {
                const std::size_t end = std::min(dataset.size(), start + opt.batch_size);
                std::vector<TrainExample*> batch;
                for (std::size_t i = start; i < end; ++i) batch.push_back(&dataset[i]);
                auto stats = scst_step(model, batch, reward, adam, opt.max_len, rng);
                sample_r += stats.mean_sample_reward;
                baseline_r += stats.mean_baseline_reward;
                ++batches;
            }
            std::cerr << "epoch " << epoch << " sample reward " << sample_r / batches
                      << " baseline " << baseline_r / batches << "\n";
        }
    } else {
        throw ConfigError("unknown training mode: " + opt.mode + " (expected xe or scst)");
    }

    save_checkpoint(model.params(), opt.out, model_meta(config).dump(2));
    std::cerr << "wrote checkpoint " << opt.out << "\n";
    return kExitOk;
}

std::pair<CaptionModel, ModelConfig> load_model(const std::string& checkpoint_path) {
    // shapes come from the metadata sidecar; values from the checkpoint body
    std::ifstream meta(checkpoint_path + ".meta.json", std::ios::binary);
    if (!meta) throw FormatError("checkpoint " + checkpoint_path + " has no metadata sidecar");
    std::string meta_json((std::istreambuf_iterator<char>(meta)), {});
    auto config = config_from_meta(meta_json, checkpoint_path);
    CaptionModel model(config, 0);
    load_checkpoint(model.params(), checkpoint_path);
    return {std::move(model), config};
}

int cmd_caption(const Options& opt) {
    if (opt.greedy && opt.beam > 1)
        throw ConfigError("--greedy and --beam are mutually exclusive");
    auto [model, config] = load_model(opt.checkpoint);
    auto vocab = Vocabulary::load(opt.vocab_path);
    if (vocab.size() != config.vocab_size)
        throw ConfigError("vocabulary size " + std::to_string(vocab.size()) +
                          " does not match checkpoint (" + std::to_string(config.vocab_size) + ")");
    auto vf = flatten(load_features(opt.features));

    std::vector<int> tokens;
    if (opt.greedy || opt.beam <= 1) {
        tokens = greedy_decode(model, vf, config.max_len);
    } else {
        auto beams = beam_decode(model, vf, opt.beam, config.max_len);
        tokens = beams[0].tokens;
        if (!tokens.empty() && tokens.back() == kEosId) tokens.pop_back();
    }
    std::cout << vocab.decode(tokens) << "\n";
    return kExitOk;
}

int cmd_evaluate(const Options& opt) {
    auto [model, config] = load_model(opt.checkpoint);
    auto vocab = Vocabulary::load(opt.vocab_path);
    auto manifest = DatasetManifest::load(opt.manifest);
    const fs::path manifest_dir = fs::path(opt.manifest).parent_path();
    std::string split = "test";
    bool has_test = false;
    for (const auto& img : manifest.images) has_test = has_test || img.split == "test";
    if (!has_test) split.clear();  // fall back to the whole manifest
    auto loaded = load_examples(manifest, manifest_dir, vocab, split, config.max_len);

    const std::size_t beam = opt.beam == 0 ? 3 : opt.beam;
    metrics::EvalCorpus corpus;
    for (const auto& le : loaded) {
        std::vector<int> tokens;
        if (beam <= 1) {
            tokens = greedy_decode(model, le.example.features, config.max_len);
        } else {
            auto beams = beam_decode(model, le.example.features, beam, config.max_len);
            tokens = beams[0].tokens;
            if (!tokens.empty() && tokens.back() == kEosId) tokens.pop_back();
        }
        metrics::EvalEntry entry;
        entry.hypothesis = tokenize(vocab.decode(tokens));
        entry.references = le.example.references;
        corpus.push_back(std::move(entry));
    }

    auto bleu_scores = metrics::bleu(corpus, true);
    nlohmann::json report = {
        {"n_images", corpus.size()},
        {"bleu", {bleu_scores[0], bleu_scores[1], bleu_scores[2], bleu_scores[3]}},
        {"cider", metrics::cider(corpus)},
        {"beam_size", beam},
        {"checkpoint", opt.checkpoint},
    };
    const std::string text = report.dump(2);
    if (!opt.out.empty()) {
        std::ofstream os(opt.out, std::ios::binary);
        os << text << "\n";
    }
    std::cout << text << "\n";
    return kExitOk;
}

int cmd_profile(const Options& opt) {
    ModelConfig config;
    config.d_h = opt.d_h;
    config.d_e = opt.d_e;
    config.d_w = opt.d_w;
    config.vocab_size = 12912;
    config.max_len = opt.max_len;
    config.wiring = wiring_from_string(opt.wiring);
    const auto convention = convention_from_string(opt.convention);

    if (opt.table || opt.encoder == "all") {
        std::vector<ComplexityReport> reports;
        for (const auto& entry : encoder_cost_table())
            reports.push_back(count_flops(config, opt.seq_len, convention, entry.name));
        std::cout << render_table(reports);
        PublishedCosts published;
        std::cerr << "reference totals for the full-scale configuration: "
                  << published.total_mflops << " MFLOPs, " << published.total_params_m
                  << "M params; derived totals above come from the op-level count and can "
                     "differ where the reference used a different encoder accounting.\n";
        return kExitOk;
    }
    auto report = count_flops(config, opt.seq_len, convention, opt.encoder);
    std::cout << report.to_json() << "\n";
    return kExitOk;
}

int cmd_selftest() {
    std::cerr << "selftest: gradients... ";
    {
        ModelConfig config;
        config.d_a = 4;
        config.n_a = 3;
        config.d_h = 4;
        config.d_e = 3;
        config.d_w = 3;
        config.vocab_size = 7;
        CaptionModel model(config, 5);
        std::mt19937_64 rng(9);
        FeatureMap map;
        map.channels = 4;
        map.height = 1;
        map.width = 3;
        map.values.resize(12);
        std::uniform_real_distribution<double> dist(-1, 1);
        for (double& v : map.values) v = dist(rng);
        auto vf = flatten(map);
        std::vector<int> gold = {kBosId, 4, 5, kEosId};

        auto forward = [&] {
            Tape t;
            t.grad_enabled = false;
            return model.forward_teacher_forced(t, vf, gold).loss->data[0];
        };
        model.params().zero_grads();
        Tape tape;
        auto loss = model.forward_teacher_forced(tape, vf, gold).loss;
        tape.backward(loss);
        const double h = 1e-5;
        for (auto& [name, p] : model.params().items()) {
            for (std::size_t i = 0; i < p->size(); ++i) {
                const double saved = p->data[i];
                p->data[i] = saved + h;
                const double up = forward();
                p->data[i] = saved - h;
                const double down = forward();
                p->data[i] = saved;
                const double numeric = (up - down) / (2 * h);
                const double analytic = p->grad[i];
                const double scale =
                    std::max({std::abs(numeric), std::abs(analytic), 1e-6});
                if (std::abs(numeric - analytic) / scale > 1e-4) {
                    std::cerr << "FAIL at " << name << "[" << i << "]\n";
                    return kExitNumeric;
                }
            }
        }
    }
    std::cerr << "ok\n" << "selftest: attention simplex... ";
    {
        ModelConfig config;
        config.d_a = 5;
        config.n_a = 4;
        config.d_h = 4;
        config.d_e = 3;
        config.d_w = 3;
        config.vocab_size = 7;
        std::mt19937_64 rng(21);
        for (int trial = 0; trial < 50; ++trial) {
            CaptionModel model(config, rng());
            FeatureMap map;
            map.channels = 5;
            map.height = 1;
            map.width = 4;
            map.values.resize(20);
            std::uniform_real_distribution<double> dist(-1, 1);
            for (double& v : map.values) v = dist(rng);
            auto vf = flatten(map);
            Tape tape;
            tape.grad_enabled = false;
            auto state = model.initial_state(tape);
            auto out = model.step(tape, vf, state);
            double sum = 0.0;
            for (double a : out.attention.alpha->data) sum += a;
            if (std::abs(sum - 1.0) > 1e-9) {
                std::cerr << "FAIL (sum " << sum << ")\n";
                return kExitNumeric;
            }
        }
    }
    std::cerr << "ok\n" << "selftest: metric oracles... ";
    {
        using namespace metrics;
        EvalCorpus identity = {{{"a", "b", "c", "d"}, {{"a", "b", "c", "d"}}}};
        auto scores = bleu(identity);
        if (std::abs(scores[0] - 100.0) > 1e-9) {
            std::cerr << "FAIL (bleu identity)\n";
            return kExitNumeric;
        }
        EvalCorpus disjoint = {
            {{"a", "b", "c", "d", "e"}, {{"a", "b", "c", "d", "e"}}},
            {{"v", "w", "x", "y", "z"}, {{"v", "w", "x", "y", "z"}}},
        };
        if (std::abs(cider(disjoint) - 10.0) > 1e-9) {
            std::cerr << "FAIL (cider disjoint)\n";
            return kExitNumeric;
        }
    }
    std::cerr << "ok\n" << "selftest: parameter counts... ";
    {
        ModelConfig config;
        config.d_a = 6;
        config.n_a = 3;
        config.d_h = 5;
        config.d_e = 4;
        config.d_w = 4;
        config.vocab_size = 11;
        CaptionModel model(config, 3);
        if (total_param_count(config) != model.params().total_scalars()) {
            std::cerr << "FAIL (count mismatch)\n";
            return kExitNumeric;
        }
    }
    std::cerr << "ok\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AC-Lite image captioning toolkit"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", opt.config_file, "JSON config file (flags override)");
        cmd->add_option("--seed", opt.seed, "RNG seed");
    };
    auto add_model_flags = [&](CLI::App* cmd) {
        cmd->add_option("--d-h", opt.d_h, "GRU hidden size");
        cmd->add_option("--d-e", opt.d_e, "attention embedding size");
        cmd->add_option("--d-w", opt.d_w, "word embedding size");
        cmd->add_option("--max-len", opt.max_len, "maximum caption length");
        cmd->add_option("--wiring", opt.wiring, "attention wiring: butd or literal");
        cmd->add_flag("--desk", opt.desk, "small desk-scale model profile");
    };

    auto* build_vocab = app.add_subcommand("build-vocab", "build a vocabulary from a manifest");
    build_vocab->add_option("--manifest", opt.manifest, "dataset manifest")->required();
    build_vocab->add_option("--out", opt.out, "output vocabulary file")->required();
    build_vocab->add_option("--min-count", opt.min_count, "keep tokens with count > this");
    add_common(build_vocab);

    auto* gen_toy = app.add_subcommand("gen-toy", "generate the synthetic toy corpus");
    gen_toy->add_option("--out", opt.out, "output directory")->required();
    gen_toy->add_option("--n", opt.n_images, "number of images");
    add_common(gen_toy);

    auto* train = app.add_subcommand("train", "train a captioning model");
    train->add_option("--manifest", opt.manifest, "dataset manifest")->required();
    train->add_option("--vocab", opt.vocab_path, "vocabulary file")->required();
    train->add_option("--out", opt.out, "output checkpoint path")->required();
    train->add_option("--mode", opt.mode, "xe or scst");
    train->add_option("--init", opt.init_checkpoint, "initial checkpoint (scst warm start)");
    train->add_option("--epochs", opt.epochs, "training epochs");
    train->add_option("--batch", opt.batch_size, "batch size");
    train->add_option("--lr", opt.learning_rate, "Adam learning rate");
    add_model_flags(train);
    add_common(train);

    auto* caption = app.add_subcommand("caption", "caption one feature file");
    caption->add_option("--features", opt.features, "feature file")->required();
    caption->add_option("--checkpoint", opt.checkpoint, "model checkpoint")->required();
    caption->add_option("--vocab", opt.vocab_path, "vocabulary file")->required();
    caption->add_option("--beam", opt.beam, "beam size (1 = greedy)");
    caption->add_flag("--greedy", opt.greedy, "greedy decoding");
    add_common(caption);

    auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint on a manifest");
    evaluate->add_option("--manifest", opt.manifest, "dataset manifest")->required();
    evaluate->add_option("--checkpoint", opt.checkpoint, "model checkpoint")->required();
    evaluate->add_option("--vocab", opt.vocab_path, "vocabulary file")->required();
    evaluate->add_option("--beam", opt.beam, "beam size (default 3)");
    evaluate->add_option("--out", opt.out, "metrics JSON output path");
    add_common(evaluate);

    auto* profile = app.add_subcommand("profile", "parameter and FLOPs report");
    profile->add_option("--convention", opt.convention, "mac or 2mac");
    profile->add_option("--encoder", opt.encoder, "backbone name, tiny-cnn, none, or all");
    profile->add_option("--seq-len", opt.seq_len, "decoded sequence length");
    profile->add_flag("--table", opt.table, "markdown table over all backbones");
    add_model_flags(profile);
    add_common(profile);

    app.add_subcommand("selftest", "run built-in numeric checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        auto* active = app.get_subcommands().front();
        apply_config_file(opt, *active);
        apply_desk_profile(opt);
        const std::string name = active->get_name();
        if (name == "build-vocab") return cmd_build_vocab(opt);
        if (name == "gen-toy") return cmd_gen_toy(opt);
        if (name == "train") return cmd_train(opt);
        if (name == "caption") return cmd_caption(opt);
        if (name == "evaluate") return cmd_evaluate(opt);
        if (name == "profile") return cmd_profile(opt);
        if (name == "selftest") return cmd_selftest();
        throw ConfigError("unknown command " + name);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const OptimizerError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericError& e) {
        std::cerr << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::runtime_error& e) {
        // format, encoding, vocabulary, metric, and dimension problems are
        // all data-shaped failures
        std::cerr << e.what() << "\n";
        return kExitData;
    }
}
