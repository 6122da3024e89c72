#include "aclite/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace aclite {
namespace metrics {

namespace {

constexpr double kCiderSigma = 6.0;

// n-grams joined with a separator that cannot appear inside a token stream.
std::map<std::string, std::size_t> ngram_counts(const TokenSeq& seq, int n) {
    std::map<std::string, std::size_t> counts;
    if (static_cast<int>(seq.size()) < n) return counts;
    for (std::size_t i = 0; i + n <= seq.size(); ++i) {
        std::string key = seq[i];
        for (int k = 1; k < n; ++k) {
            key += '\x1f';
            key += seq[i + k];
        }
        ++counts[key];
    }
    return counts;
}

}  // namespace

std::array<double, 4> bleu(const EvalCorpus& corpus, bool plus_one_smoothing) {
    if (corpus.empty()) throw MetricError("bleu: empty corpus");
    std::array<double, 4> clipped_total{};
    std::array<double, 4> hyp_total{};
    double hyp_len = 0.0;
    double ref_len = 0.0;

    for (const auto& entry : corpus) {
        if (entry.references.empty()) throw MetricError("bleu: entry without references");
        hyp_len += static_cast<double>(entry.hypothesis.size());
        // closest reference length; ties resolved toward the shorter
        std::size_t closest = entry.references[0].size();
        for (const auto& ref : entry.references) {
            const auto d = [&](std::size_t len) {
                return len > entry.hypothesis.size() ? len - entry.hypothesis.size()
                                                     : entry.hypothesis.size() - len;
            };
            if (d(ref.size()) < d(closest) || (d(ref.size()) == d(closest) && ref.size() < closest))
                closest = ref.size();
        }
        ref_len += static_cast<double>(closest);

        for (int n = 1; n <= 4; ++n) {
            auto hyp_counts = ngram_counts(entry.hypothesis, n);
            std::map<std::string, std::size_t> max_ref;
            for (const auto& ref : entry.references)
                for (const auto& [gram, c] : ngram_counts(ref, n))
                    max_ref[gram] = std::max(max_ref[gram], c);
            for (const auto& [gram, c] : hyp_counts) {
                hyp_total[n - 1] += static_cast<double>(c);
                auto it = max_ref.find(gram);
                if (it != max_ref.end())
                    clipped_total[n - 1] += static_cast<double>(std::min(c, it->second));
            }
        }
    }

    const double bp = hyp_len >= ref_len || hyp_len == 0.0
                          ? 1.0
                          : std::exp(1.0 - ref_len / hyp_len);
    std::array<double, 4> scores{};
    double log_sum = 0.0;
    bool zero = false;
    for (int n = 1; n <= 4; ++n) {
        double num = clipped_total[n - 1];
        double den = hyp_total[n - 1];
        if (plus_one_smoothing && n > 1) {
            num += 1.0;
            den += 1.0;
        }
        if (num <= 0.0 || den <= 0.0) {
            zero = true;
        } else {
            log_sum += std::log(num / den);
        }
        scores[n - 1] = zero ? 0.0 : bp * std::exp(log_sum / n) * 100.0;
    }
    return scores;
}

CiderIdf CiderIdf::build(const std::vector<std::vector<TokenSeq>>& reference_sets) {
    if (reference_sets.empty()) throw MetricError("cider: empty reference corpus");
    CiderIdf idf;
    idf.num_images_ = reference_sets.size();
    for (const auto& refs : reference_sets) {
        if (refs.empty()) throw MetricError("cider: image without references");
        for (int n = 1; n <= 4; ++n) {
            std::map<std::string, std::size_t> seen;
            for (const auto& ref : refs)
                for (const auto& [gram, c] : ngram_counts(ref, n)) seen[gram] = 1;
            for (const auto& [gram, one] : seen) ++idf.doc_freq_[n - 1][gram];
        }
    }
    return idf;
}

double CiderIdf::log_idf(int n, const std::string& gram) const {
    const auto& table = doc_freq_[n - 1];
    auto it = table.find(gram);
    const double df = it == table.end() ? 1.0 : std::max<double>(1.0, static_cast<double>(it->second));
    return std::log(static_cast<double>(num_images_)) - std::log(df);
}

double CiderIdf::score_single(const TokenSeq& hypothesis,
                              const std::vector<TokenSeq>& references) const {
    if (references.empty()) throw MetricError("cider: no references for image");
    double score = 0.0;
    for (int n = 1; n <= 4; ++n) {
        auto hyp_counts = ngram_counts(hypothesis, n);
        double hyp_norm_sq = 0.0;
        for (const auto& [gram, c] : hyp_counts) {
            const double w = static_cast<double>(c) * log_idf(n, gram);
            hyp_norm_sq += w * w;
        }
        const double hyp_norm = std::sqrt(hyp_norm_sq);

        double order_score = 0.0;
        for (const auto& ref : references) {
            auto ref_counts = ngram_counts(ref, n);
            double ref_norm_sq = 0.0;
            for (const auto& [gram, c] : ref_counts) {
                const double w = static_cast<double>(c) * log_idf(n, gram);
                ref_norm_sq += w * w;
            }
            const double ref_norm = std::sqrt(ref_norm_sq);

            // clipped TF-IDF inner product (the D variant's count clipping)
            double dot = 0.0;
            for (const auto& [gram, c] : hyp_counts) {
                auto it = ref_counts.find(gram);
                if (it == ref_counts.end()) continue;
                const double idf = log_idf(n, gram);
                dot += std::min(static_cast<double>(c), static_cast<double>(it->second)) * idf *
                       static_cast<double>(it->second) * idf;
            }
            double sim = 0.0;
            if (hyp_norm > 0.0 && ref_norm > 0.0) sim = dot / (hyp_norm * ref_norm);
            const double delta =
                static_cast<double>(hypothesis.size()) - static_cast<double>(ref.size());
            sim *= std::exp(-(delta * delta) / (2.0 * kCiderSigma * kCiderSigma));
            order_score += sim;
        }
        score += 0.25 * order_score / static_cast<double>(references.size());
    }
    return score * 10.0;
}

double cider(const EvalCorpus& corpus) {
    if (corpus.empty()) throw MetricError("cider: empty corpus");
    std::vector<std::vector<TokenSeq>> refs;
    refs.reserve(corpus.size());
    for (const auto& entry : corpus) refs.push_back(entry.references);
    auto idf = CiderIdf::build(refs);
    double total = 0.0;
    for (const auto& entry : corpus) total += idf.score_single(entry.hypothesis, entry.references);
    return total / static_cast<double>(corpus.size());
}

}  // namespace metrics
}  // namespace aclite
