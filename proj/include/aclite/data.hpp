#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aclite/encoder.hpp"
#include "aclite/errors.hpp"

namespace aclite {

constexpr int kPadId = 0;
constexpr int kBosId = 1;
constexpr int kEosId = 2;
constexpr int kUnkId = 3;

/// NFC-normalizes, strips punctuation (ASCII plus danda/double danda and
/// common typographic marks), and splits on Unicode whitespace.
std::vector<std::string> tokenize(const std::string& text);

class Vocabulary {
public:
    /// Token kept iff its corpus count strictly exceeds min_occurrences.
    static Vocabulary build(const std::vector<std::vector<std::string>>& corpus,
                            std::size_t min_occurrences = 5);

    std::size_t size() const { return tokens_.size(); }
    const std::string& token(int id) const;
    int id_of(const std::string& token) const;  // kUnkId when absent

    std::vector<int> encode(const std::vector<std::string>& tokens, std::size_t max_len = 16) const;
    std::string decode(const std::vector<int>& ids) const;

    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path);

    const std::vector<std::string>& tokens() const { return tokens_; }

private:
    std::vector<std::string> tokens_;
};

struct ManifestImage {
    std::string id;
    std::string split;     // train | val | test
    std::string features;  // path, empty when absent
    std::string image;     // path, empty when absent
    std::vector<std::string> captions;
};

struct DatasetManifest {
    std::vector<ManifestImage> images;

    void save(const std::string& path) const;
    static DatasetManifest load(const std::string& path);
};

struct ToyGrammar {
    std::vector<std::string> colors = {"red", "green", "blue"};
    std::vector<std::string> shapes = {"cube", "ball", "cone"};
    std::vector<std::string> backgrounds = {"grass"};
    std::size_t d_a = 16;
    std::size_t n_h = 2;
    std::size_t n_w = 2;
};

/// Seeded synthetic corpus: each image gets a (color, shape, background)
/// triple; the caption is "<color> <shape> on <background>" and the feature
/// map deterministically encodes the triple so the mapping is learnable.
DatasetManifest generate_toy_corpus(std::uint64_t seed, std::size_t n_images,
                                    const ToyGrammar& grammar, const std::string& out_dir);

}  // namespace aclite
