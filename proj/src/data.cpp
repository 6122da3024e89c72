#include "aclite/data.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

namespace aclite {

namespace {

std::vector<char32_t> decode_utf8(const std::string& text) {
    std::vector<char32_t> out;
    std::size_t i = 0;
    const auto* s = reinterpret_cast<const unsigned char*>(text.data());
    const std::size_t n = text.size();
    while (i < n) {
        const unsigned char c = s[i];
        char32_t cp;
        std::size_t len;
        if (c < 0x80) {
            cp = c;
            len = 1;
        } else if ((c & 0xE0) == 0xC0) {
            cp = c & 0x1F;
            len = 2;
        } else if ((c & 0xF0) == 0xE0) {
            cp = c & 0x0F;
            len = 3;
        } else if ((c & 0xF8) == 0xF0) {
            cp = c & 0x07;
            len = 4;
        } else {
            throw EncodingError("invalid UTF-8 lead byte at offset " + std::to_string(i));
        }
        if (i + len > n) throw EncodingError("truncated UTF-8 sequence at offset " + std::to_string(i));
        for (std::size_t k = 1; k < len; ++k) {
            if ((s[i + k] & 0xC0) != 0x80)
                throw EncodingError("invalid UTF-8 continuation at offset " + std::to_string(i + k));
            cp = (cp << 6) | (s[i + k] & 0x3F);
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// NFC composition restricted to the Bengali-script pairs that occur in
// Assamese text; everything else passes through unchanged.
void compose_nfc(std::vector<char32_t>& cps) {
    std::vector<char32_t> out;
    out.reserve(cps.size());
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (i + 1 < cps.size() && cps[i] == 0x09C7) {
            if (cps[i + 1] == 0x09BE) {
                out.push_back(0x09CB);  // O
                ++i;
                continue;
            }
            if (cps[i + 1] == 0x09D7) {
                out.push_back(0x09CC);  // AU
                ++i;
                continue;
            }
        }
        out.push_back(cps[i]);
    }
    cps = std::move(out);
}

bool is_whitespace(char32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
        case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return (cp >= 0x2000 && cp <= 0x200A);
    }
}

bool is_punctuation(char32_t cp) {
    if (cp < 0x80) {
        const char c = static_cast<char>(cp);
        return std::ispunct(static_cast<unsigned char>(c)) != 0;
    }
    switch (cp) {
        case 0x2013:  // en dash
        case 0x2014:  // em dash
        case 0x2018: case 0x2019:  // curly single quotes
        case 0x201C: case 0x201D:  // curly double quotes
        case 0x2026:  // ellipsis
        case 0x05C0:  // Hebrew paseq (vertical bar lookalike)
        case 0x0964:  // danda
        case 0x0965:  // double danda
            return true;
        default:
            return false;
    }
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
    auto cps = decode_utf8(text);
    compose_nfc(cps);
    std::vector<std::string> tokens;
    std::string current;
    for (char32_t cp : cps) {
        if (is_whitespace(cp)) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else if (!is_punctuation(cp)) {
            append_utf8(current, cp);
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& corpus,
                             std::size_t min_occurrences) {
    std::map<std::string, std::size_t> counts;
    for (const auto& caption : corpus)
        for (const auto& tok : caption) ++counts[tok];

    std::vector<std::pair<std::string, std::size_t>> kept;
    for (const auto& [tok, count] : counts)
        if (count > min_occurrences) kept.emplace_back(tok, count);
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary vocab;
    vocab.tokens_ = {"<pad>", "<bos>", "<eos>", "<unk>"};
    for (const auto& [tok, count] : kept) vocab.tokens_.push_back(tok);
    return vocab;
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
        throw VocabularyError("id " + std::to_string(id) + " outside vocabulary of size " +
                              std::to_string(tokens_.size()));
    return tokens_[static_cast<std::size_t>(id)];
}

int Vocabulary::id_of(const std::string& token) const {
    for (std::size_t i = 0; i < tokens_.size(); ++i)
        if (tokens_[i] == token) return static_cast<int>(i);
    return kUnkId;
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens, std::size_t max_len) const {
    std::vector<int> ids;
    ids.push_back(kBosId);
    for (std::size_t i = 0; i < tokens.size() && i < max_len; ++i) ids.push_back(id_of(tokens[i]));
    ids.push_back(kEosId);
    return ids;
}

std::string Vocabulary::decode(const std::vector<int>& ids) const {
    std::string out;
    for (int id : ids) {
        const std::string& tok = token(id);
        if (id < 4) continue;  // control tokens
        if (!out.empty()) out += ' ';
        out += tok;
    }
    return out;
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    for (const auto& tok : tokens_) os << tok << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path);
    Vocabulary vocab;
    std::string line;
    while (std::getline(is, line)) vocab.tokens_.push_back(line);
    const std::vector<std::string> reserved = {"<pad>", "<bos>", "<eos>", "<unk>"};
    if (vocab.tokens_.size() < 4 ||
        !std::equal(reserved.begin(), reserved.end(), vocab.tokens_.begin()))
        throw FormatError(path + ": first four lines must be the reserved tokens");
    return vocab;
}

void DatasetManifest::save(const std::string& path) const {
    nlohmann::json j;
    j["images"] = nlohmann::json::array();
    for (const auto& img : images) {
        nlohmann::json e;
        e["id"] = img.id;
        e["split"] = img.split;
        e["features"] = img.features.empty() ? nlohmann::json() : nlohmann::json(img.features);
        e["image"] = img.image.empty() ? nlohmann::json() : nlohmann::json(img.image);
        e["captions"] = img.captions;
        j["images"].push_back(e);
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    os << j.dump(2) << '\n';
}

DatasetManifest DatasetManifest::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    DatasetManifest manifest;
    if (!j.contains("images") || !j["images"].is_array())
        throw FormatError(path + ": missing images array");
    for (const auto& e : j["images"]) {
        ManifestImage img;
        img.id = e.at("id").get<std::string>();
        img.split = e.at("split").get<std::string>();
        if (img.split != "train" && img.split != "val" && img.split != "test")
            throw FormatError(path + ": bad split '" + img.split + "' for image " + img.id);
        if (e.contains("features") && !e["features"].is_null())
            img.features = e["features"].get<std::string>();
        if (e.contains("image") && !e["image"].is_null()) img.image = e["image"].get<std::string>();
        for (const auto& c : e.at("captions")) img.captions.push_back(c.get<std::string>());
        for (const auto& other : manifest.images)
            if (other.id == img.id) throw FormatError(path + ": duplicate image id " + img.id);
        manifest.images.push_back(std::move(img));
    }
    return manifest;
}

DatasetManifest generate_toy_corpus(std::uint64_t seed, std::size_t n_images,
                                    const ToyGrammar& grammar, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "features");
    std::mt19937_64 rng(seed);
    DatasetManifest manifest;
    const std::size_t n_a = grammar.n_h * grammar.n_w;
    for (std::size_t i = 0; i < n_images; ++i) {
        const std::size_t color = rng() % grammar.colors.size();
        const std::size_t shape = rng() % grammar.shapes.size();
        const std::size_t bg = rng() % grammar.backgrounds.size();

        FeatureMap map;
        map.channels = grammar.d_a;
        map.height = grammar.n_h;
        map.width = grammar.n_w;
        map.values.assign(grammar.d_a * n_a, 0.0);
        // One-hot attribute blocks, identical across spatial positions.
        for (std::size_t pos = 0; pos < n_a; ++pos) {
            map.values[color * n_a + pos] = 1.0;
            map.values[(grammar.colors.size() + shape) * n_a + pos] = 1.0;
            map.values[(grammar.colors.size() + grammar.shapes.size() + bg) * n_a + pos] = 1.0;
        }

        char name[32];
        std::snprintf(name, sizeof(name), "img_%04zu", i);
        const std::string feat_rel = std::string("features/") + name + ".aclf";
        save_features(map, (fs::path(out_dir) / feat_rel).string());

        ManifestImage img;
        img.id = name;
        img.features = feat_rel;
        const std::size_t train_end = std::max<std::size_t>(1, n_images * 8 / 10);
        const std::size_t val_end = std::max(train_end + 1, n_images * 9 / 10);
        img.split = i < train_end ? "train" : (i < val_end && i < n_images - 1 ? "val" : "test");
        if (n_images < 3) img.split = "train";
        img.captions = {grammar.colors[color] + " " + grammar.shapes[shape] + " on " +
                        grammar.backgrounds[bg]};
        manifest.images.push_back(std::move(img));
    }
    manifest.save((fs::path(out_dir) / "manifest.json").string());
    return manifest;
}

}  // namespace aclite
