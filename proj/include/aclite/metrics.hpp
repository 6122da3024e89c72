#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "aclite/errors.hpp"

namespace aclite {
namespace metrics {

using TokenSeq = std::vector<std::string>;

struct EvalEntry {
    TokenSeq hypothesis;
    std::vector<TokenSeq> references;
};

using EvalCorpus = std::vector<EvalEntry>;

/// Corpus-level BLEU-1..4 on the 0-100 scale. Modified n-gram precision with
/// clipping against per-reference maxima, geometric mean over orders 1..n,
/// brevity penalty from summed closest-reference lengths. Unsmoothed by
/// default: a zero precision at any order zeroes that score.
std::array<double, 4> bleu(const EvalCorpus& corpus, bool plus_one_smoothing = false);

/// CIDEr-D document frequencies, frozen over a reference corpus. Document
/// frequency of an n-gram is the number of images whose reference set
/// contains it.
class CiderIdf {
public:
    static CiderIdf build(const std::vector<std::vector<TokenSeq>>& reference_sets);

    std::size_t num_images() const { return num_images_; }
    double log_idf(int n, const std::string& gram) const;

    /// CIDEr-D of a single hypothesis against one image's references,
    /// on the x10 scale.
    double score_single(const TokenSeq& hypothesis, const std::vector<TokenSeq>& references) const;

private:
    std::size_t num_images_ = 0;
    std::array<std::map<std::string, std::size_t>, 4> doc_freq_;
};

/// Corpus CIDEr-D with IDF computed from the corpus' own references.
double cider(const EvalCorpus& corpus);

}  // namespace metrics
}  // namespace aclite
