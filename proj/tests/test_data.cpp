#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "aclite/data.hpp"

using namespace aclite;

TEST_CASE("tokenize basics") {
    CHECK(tokenize("").empty());
    CHECK(tokenize("a b  c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(tokenize("hello, world!") == std::vector<std::string>{"hello", "world"});
    CHECK(tokenize("  leading and trailing  ") == std::vector<std::string>{"leading", "and", "trailing"});
}

TEST_CASE("tokenize strips the danda without merging adjacent words") {
    // "এজন মানুহ।" -- trailing danda is dropped, words survive
    const std::string sentence = "এজন মানুহ।";
    auto tokens = tokenize(sentence);
    REQUIRE(tokens.size() == 2);
    CHECK(tokens[0] == "এজন");
    CHECK(tokens[1] == "মানুহ");

    // danda embedded between words still separates nothing: it simply vanishes
    auto joined = tokenize("ক।খ");
    REQUIRE(joined.size() == 1);
    CHECK(joined[0] == "কখ");
}

TEST_CASE("tokenize applies NFC composition for Bengali-script vowel signs") {
    // E (09C7) + AA sign (09BE) composes to O sign (09CB)
    auto tokens = tokenize("কো");
    REQUIRE(tokens.size() == 1);
    CHECK(tokens[0] == "কো");
}

TEST_CASE("tokenize rejects invalid UTF-8") {
    std::string bad = "ab";
    bad.push_back(static_cast<char>(0xFF));
    CHECK_THROWS_AS(tokenize(bad), EncodingError);
}

TEST_CASE("build_vocab boundary of the more-than-five rule") {
    std::vector<std::vector<std::string>> corpus;
    for (int i = 0; i < 6; ++i) corpus.push_back({"x"});
    for (int i = 0; i < 5; ++i) corpus.push_back({"y"});
    auto vocab = Vocabulary::build(corpus, 5);
    CHECK(vocab.size() == 5);  // 4 reserved + x
    CHECK(vocab.id_of("x") == 4);
    CHECK(vocab.id_of("y") == kUnkId);

    auto all = Vocabulary::build(corpus, 0);
    CHECK(all.size() == 6);
}

TEST_CASE("build_vocab ordering and determinism under permutation") {
    std::vector<std::vector<std::string>> corpus = {
        {"b", "a", "c"}, {"a", "c"}, {"c"}, {"a"}, {"b"}};
    auto v1 = Vocabulary::build(corpus, 0);
    std::reverse(corpus.begin(), corpus.end());
    auto v2 = Vocabulary::build(corpus, 0);
    CHECK(v1.tokens() == v2.tokens());
    // counts: a=3, c=3, b=2; tie a<c by code point
    CHECK(v1.token(4) == "a");
    CHECK(v1.token(5) == "c");
    CHECK(v1.token(6) == "b");
}

TEST_CASE("build_vocab engineered size") {
    std::vector<std::vector<std::string>> corpus;
    for (int t = 0; t < 20; ++t) {
        std::string tok = "tok" + std::to_string(t);
        for (int i = 0; i < 6; ++i) corpus.push_back({tok});
    }
    corpus.push_back({"rare"});
    auto vocab = Vocabulary::build(corpus, 5);
    CHECK(vocab.size() == 24);
}

TEST_CASE("encode truncates, wraps, and maps OOV to UNK") {
    std::vector<std::vector<std::string>> corpus = {{"a", "b"}};
    auto vocab = Vocabulary::build(corpus, 0);

    std::vector<std::string> tokens;
    for (int i = 0; i < 20; ++i) tokens.push_back("a");
    auto ids = vocab.encode(tokens, 16);
    CHECK(ids.size() == 18);
    CHECK(ids.front() == kBosId);
    CHECK(ids.back() == kEosId);

    auto oov = vocab.encode({"zzz", "qqq"}, 16);
    CHECK(oov == std::vector<int>{kBosId, kUnkId, kUnkId, kEosId});

    // round trip modulo punctuation/whitespace
    auto rt = vocab.decode(vocab.encode({"a", "b"}, 16));
    CHECK(rt == "a b");

    // encode . decode . encode == encode
    auto ids2 = vocab.encode(tokenize(vocab.decode(ids)), 16);
    CHECK(ids2 == ids);

    CHECK_THROWS_AS(vocab.decode({99}), VocabularyError);
}

TEST_CASE("vocabulary file round trip with fixed reserved header") {
    std::vector<std::vector<std::string>> corpus = {{"x", "y", "x"}};
    auto vocab = Vocabulary::build(corpus, 0);
    const auto path = (std::filesystem::temp_directory_path() / "aclite_vocab_test.txt").string();
    vocab.save(path);

    std::ifstream is(path);
    std::string line;
    std::getline(is, line);
    CHECK(line == "<pad>");

    auto loaded = Vocabulary::load(path);
    CHECK(loaded.tokens() == vocab.tokens());
    std::remove(path.c_str());
}

TEST_CASE("manifest round trip and validation") {
    const auto dir = std::filesystem::temp_directory_path() / "aclite_manifest_test";
    std::filesystem::create_directories(dir);
    DatasetManifest manifest;
    manifest.images.push_back({"img1", "train", "f1.aclf", "", {"a cat"}});
    manifest.images.push_back({"img2", "test", "", "raw.img", {"a dog", "another dog"}});
    const auto path = (dir / "manifest.json").string();
    manifest.save(path);
    auto loaded = DatasetManifest::load(path);
    REQUIRE(loaded.images.size() == 2);
    CHECK(loaded.images[0].features == "f1.aclf");
    CHECK(loaded.images[1].captions.size() == 2);

    // duplicate ids rejected
    manifest.images.push_back({"img1", "val", "", "", {"dup"}});
    manifest.save(path);
    CHECK_THROWS_WITH_AS(DatasetManifest::load(path), doctest::Contains("duplicate"), FormatError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("toy corpus is seeded-deterministic with the expected caption classes") {
    const auto dir1 = std::filesystem::temp_directory_path() / "aclite_toy1";
    const auto dir2 = std::filesystem::temp_directory_path() / "aclite_toy2";
    ToyGrammar grammar;
    auto m1 = generate_toy_corpus(99, 40, grammar, dir1.string());
    auto m2 = generate_toy_corpus(99, 40, grammar, dir2.string());

    std::ifstream f1(dir1 / "manifest.json"), f2(dir2 / "manifest.json");
    std::string b1((std::istreambuf_iterator<char>(f1)), {});
    std::string b2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(b1 == b2);

    std::vector<std::string> distinct;
    for (const auto& img : m1.images) {
        if (std::find(distinct.begin(), distinct.end(), img.captions[0]) == distinct.end())
            distinct.push_back(img.captions[0]);
    }
    CHECK(distinct.size() <= 9);
    CHECK(distinct.size() >= 8);  // 40 draws over 9 classes covers nearly all

    // features are a deterministic function of the caption
    auto feat1 = load_features((dir1 / m1.images[0].features).string());
    auto feat2 = load_features((dir2 / m2.images[0].features).string());
    CHECK(feat1.values == feat2.values);
    std::filesystem::remove_all(dir1);
    std::filesystem::remove_all(dir2);
}

TEST_CASE("toy corpus captions never emit ids outside the vocabulary") {
    const auto dir = std::filesystem::temp_directory_path() / "aclite_toy3";
    ToyGrammar grammar;
    auto manifest = generate_toy_corpus(7, 60, grammar, dir.string());
    std::vector<std::vector<std::string>> corpus;
    for (const auto& img : manifest.images) corpus.push_back(tokenize(img.captions[0]));
    auto vocab = Vocabulary::build(corpus, 5);
    for (const auto& caption : corpus) {
        auto ids = vocab.encode(caption, 16);
        for (int id : ids) {
            CHECK(id >= 0);
            CHECK(static_cast<std::size_t>(id) < vocab.size());
        }
    }
    std::filesystem::remove_all(dir);
}
