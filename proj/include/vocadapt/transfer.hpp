#pragma once

// Initialization of a new vocabulary's embedding matrix from a source model's
// matrix.
//
//  * wechsel: each target token becomes the softmax(similarity / tau)
//    weighted mean of the source rows of its k most similar source tokens.
//  * focus:   tokens shared by both vocabularies keep their source row; every
//    other target token is the sparsemax-weighted mean of the shared tokens'
//    rows, weights taken from similarities in the target-side space only.
//  * random:  i.i.d. normal rows.
//
// Target tokens without a usable common-space vector go through the
// configured fallback. Special tokens are matched by name and never take part
// in similarity search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "vocadapt/canonical.hpp"
#include "vocadapt/common_space.hpp"
#include "vocadapt/embedding.hpp"
#include "vocadapt/error.hpp"
#include "vocadapt/hash.hpp"
#include "vocadapt/parallel.hpp"
#include "vocadapt/sparsemax.hpp"

namespace vocadapt::transfer {

enum class Method { wechsel, focus, random };
enum class Fallback { matched_moments, error };

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::wechsel: return "wechsel";
        case Method::focus: return "focus";
        case Method::random: return "random";
    }
    return "?";
}

inline Method parse_method(std::string_view s) {
    if (s == "wechsel") return Method::wechsel;
    if (s == "focus") return Method::focus;
    if (s == "random") return Method::random;
    throw ConfigError("unknown transfer method: " + std::string(s));
}

struct TransferConfig {
    Method method = Method::wechsel;
    std::size_t k = 10;
    double temperature = 0.1;
    bool tied = false;
    std::uint64_t seed = 0;
    Fallback fallback = Fallback::matched_moments;
    MarkerScheme source_scheme = MarkerScheme::sentencepiece();
    MarkerScheme target_scheme = MarkerScheme::sentencepiece();
    // Moments of the random baseline.
    double random_mean = 0.0;
    double random_std = 0.02;
    unsigned threads = 1;

    void validate() const {
        if (k < 1) throw ConfigError("k must be >= 1");
        if (!(temperature > 0.0) || !std::isfinite(temperature)) throw ConfigError("temperature must be positive");
        if (!(random_std >= 0.0)) throw ConfigError("random_std must be non-negative");
    }
};

enum class RowOrigin : std::uint8_t { transferred, copied, special, fallback, random };

struct SourceWeight {
    std::uint32_t source;
    double weight;

    bool operator==(const SourceWeight&) const = default;
};

// Per target row: the source rows it combines. Empty for fallback and random
// rows.
struct TransferWeights {
    std::vector<std::vector<SourceWeight>> rows;

    bool operator==(const TransferWeights&) const = default;
};

struct TransferReport {
    Method method = Method::wechsel;
    std::size_t target_size = 0;
    std::size_t source_size = 0;
    std::size_t overlap_size = 0;
    std::size_t transferred = 0;
    std::size_t specials_copied = 0;
    std::size_t fallback_count = 0;
    // wechsel: mean similarity of the chosen nearest neighbour.
    double mean_top_similarity = 0.0;
    // focus: mean number of overlap tokens with nonzero weight.
    double mean_support = 0.0;
};

struct TransferResult {
    EmbeddingMatrix embedding;
    TransferWeights weights;
    TransferReport report;
    std::vector<RowOrigin> origin;
};

inline double cosine_similarity(std::span<const float> u, std::span<const float> v) {
    if (u.size() != v.size()) throw DataError("cosine_similarity: dimension mismatch");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += static_cast<double>(u[i]) * v[i];
        nu += static_cast<double>(u[i]) * u[i];
        nv += static_cast<double>(v[i]) * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw DataError("cosine_similarity: zero-norm vector");
    return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

inline EmbeddingMatrix random_init(std::vector<std::string> vocab, std::size_t dim, std::uint64_t seed, double mean,
                                   double stddev) {
    if (dim == 0) throw ConfigError("random_init: dim must be positive");
    if (!(stddev >= 0.0)) throw ConfigError("random_init: std must be non-negative");
    EmbeddingMatrix m(std::move(vocab), dim);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        std::mt19937_64 rng(derive_seed(seed, i));
        for (float& v : m.row(i)) v = static_cast<float>(mean + stddev * standard_normal(rng));
    }
    return m;
}

// Output projection for a model that shares input and output weights. Empty
// when the configuration is untied.
inline std::optional<EmbeddingMatrix> apply_tied(const TransferResult& result, const TransferConfig& cfg,
                                                 std::optional<std::pair<std::size_t, std::size_t>> expected_shape = {}) {
    if (!cfg.tied) return std::nullopt;
    if (expected_shape && (expected_shape->first != result.embedding.rows() ||
                           expected_shape->second != result.embedding.dim()))
        throw DataError("tied output layer shape " + std::to_string(expected_shape->first) + "x" +
                        std::to_string(expected_shape->second) + " does not match embedding " +
                        std::to_string(result.embedding.rows()) + "x" + std::to_string(result.embedding.dim()));
    return result.embedding;
}

namespace detail {

// Unit-normalized rows of a common space; nullopt for absent or zero rows.
struct NormalizedSpace {
    std::size_t dim = 0;
    std::vector<double> data;
    std::vector<bool> usable;

    explicit NormalizedSpace(const space::CommonSpaceBuild& b) : dim(b.dim), data(b.vocab.size() * b.dim, 0.0) {
        usable.assign(b.vocab.size(), false);
        for (std::size_t i = 0; i < b.vocab.size(); ++i) {
            auto v = b.vector(i);
            if (!v) continue;
            double n = 0.0;
            for (float x : *v) n += static_cast<double>(x) * x;
            if (n == 0.0) continue;
            n = std::sqrt(n);
            for (std::size_t d = 0; d < dim; ++d) data[i * dim + d] = (*v)[d] / n;
            usable[i] = true;
        }
    }

    double dot(std::size_t i, const NormalizedSpace& other, std::size_t j) const {
        double s = 0.0;
        const double* a = data.data() + i * dim;
        const double* b = other.data.data() + j * dim;
        for (std::size_t d = 0; d < dim; ++d) s += a[d] * b[d];
        return std::clamp(s, -1.0, 1.0);
    }
};

struct Moments {
    std::vector<double> mean, stddev;
};

inline Moments column_moments(const EmbeddingMatrix& m) {
    Moments mo{std::vector<double>(m.dim(), 0.0), std::vector<double>(m.dim(), 0.0)};
    if (m.rows() == 0) return mo;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t d = 0; d < m.dim(); ++d) mo.mean[d] += m.row(i)[d];
    for (double& v : mo.mean) v /= static_cast<double>(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t d = 0; d < m.dim(); ++d) {
            const double c = m.row(i)[d] - mo.mean[d];
            mo.stddev[d] += c * c;
        }
    for (double& v : mo.stddev) v = std::sqrt(v / static_cast<double>(m.rows()));
    return mo;
}

inline void combine_rows(const EmbeddingMatrix& src, const std::vector<SourceWeight>& weights, std::span<float> out) {
    std::vector<double> acc(src.dim(), 0.0);
    for (const auto& sw : weights) {
        const auto r = src.row(sw.source);
        for (std::size_t d = 0; d < src.dim(); ++d) acc[d] += sw.weight * r[d];
    }
    for (std::size_t d = 0; d < src.dim(); ++d) out[d] = static_cast<float>(acc[d]);
}

class Initializer {
public:
    Initializer(const EmbeddingMatrix& src, const std::vector<std::string>& target_vocab, const TransferConfig& cfg)
        : src_(src), cfg_(cfg), moments_(column_moments(src)) {
        result_.embedding = EmbeddingMatrix(target_vocab, src.dim());
        result_.weights.rows.assign(target_vocab.size(), {});
        result_.origin.assign(target_vocab.size(), RowOrigin::fallback);
        result_.report.method = cfg.method;
        result_.report.target_size = target_vocab.size();
        result_.report.source_size = src.rows();
        for (std::uint32_t i = 0; i < src.rows(); ++i)
            if (is_special_token(src.vocab()[i])) source_specials_.emplace(src.vocab()[i], i);
    }

    // Copies a special token's row by name; false if the source lacks it.
    bool copy_special(std::size_t t) {
        auto it = source_specials_.find(result_.embedding.vocab()[t]);
        if (it == source_specials_.end()) return false;
        set_weights(t, {{it->second, 1.0}}, RowOrigin::special);
        return true;
    }

    void set_weights(std::size_t t, std::vector<SourceWeight> w, RowOrigin origin) {
        if (w.size() == 1 && w.front().weight == 1.0) {
            auto r = src_.row(w.front().source);
            std::copy(r.begin(), r.end(), result_.embedding.row(t).begin());
        } else {
            combine_rows(src_, w, result_.embedding.row(t));
        }
        result_.weights.rows[t] = std::move(w);
        result_.origin[t] = origin;
    }

    void fallback(std::size_t t) {
        if (cfg_.fallback == Fallback::error)
            throw DataError("no common-space vector for target token '" + result_.embedding.vocab()[t] +
                            "' and fallback policy is 'error'");
        std::mt19937_64 rng(derive_seed(cfg_.seed, t));
        auto row = result_.embedding.row(t);
        for (std::size_t d = 0; d < row.size(); ++d)
            row[d] = static_cast<float>(moments_.mean[d] + moments_.stddev[d] * standard_normal(rng));
        result_.weights.rows[t].clear();
        result_.origin[t] = RowOrigin::fallback;
    }

    TransferResult finish() {
        auto& r = result_.report;
        for (auto o : result_.origin) {
            if (o == RowOrigin::fallback) ++r.fallback_count;
            if (o == RowOrigin::special) ++r.specials_copied;
            if (o == RowOrigin::transferred) ++r.transferred;
        }
        return std::move(result_);
    }

    TransferResult& result() { return result_; }

private:
    const EmbeddingMatrix& src_;
    const TransferConfig& cfg_;
    Moments moments_;
    TransferResult result_;
    std::unordered_map<std::string, std::uint32_t> source_specials_;
};

}  // namespace detail

inline TransferResult wechsel_transfer(const EmbeddingMatrix& src, const space::CommonSpaceBuild& source_space,
                                       const space::CommonSpaceBuild& target_space, const TransferConfig& cfg) {
    cfg.validate();
    if (source_space.vocab != src.vocab())
        throw DataError("wechsel: source common space is not aligned with the source embedding vocabulary");
    if (source_space.dim != target_space.dim)
        throw DataError("wechsel: common-space dimensions differ (" + std::to_string(source_space.dim) + " vs " +
                        std::to_string(target_space.dim) + ")");
    const detail::NormalizedSpace ws(source_space), wt(target_space);
    std::vector<std::uint32_t> candidates;
    for (std::uint32_t y = 0; y < src.rows(); ++y)
        if (ws.usable[y] && !is_special_token(src.vocab()[y])) candidates.push_back(y);
    if (candidates.empty()) throw DataError("wechsel: no source token has a common-space vector");

    const auto& tvocab = target_space.vocab;
    detail::Initializer init(src, tvocab, cfg);
    std::vector<double> top_sim(tvocab.size(), 0.0);
    std::vector<char> needs_fallback(tvocab.size(), 0);
    parallel_for(tvocab.size(), cfg.threads, [&](std::size_t x) {
        if (is_special_token(tvocab[x])) {
            if (!init.copy_special(x)) needs_fallback[x] = 1;
            return;
        }
        if (!wt.usable[x]) {
            needs_fallback[x] = 1;
            return;
        }
        std::vector<std::pair<double, std::uint32_t>> scored;
        scored.reserve(candidates.size());
        for (auto y : candidates) scored.emplace_back(wt.dot(x, ws, y), y);
        const std::size_t k = std::min(cfg.k, scored.size());
        auto better = [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; };
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(), better);
        scored.resize(k);
        const double peak = scored.front().first / cfg.temperature;
        double z = 0.0;
        std::vector<SourceWeight> w;
        w.reserve(k);
        for (const auto& [s, y] : scored) {
            const double e = std::exp(s / cfg.temperature - peak);
            w.push_back({y, e});
            z += e;
        }
        for (auto& sw : w) sw.weight /= z;
        top_sim[x] = scored.front().first;
        init.set_weights(x, std::move(w), RowOrigin::transferred);
    });
    for (std::size_t x = 0; x < tvocab.size(); ++x)
        if (needs_fallback[x]) init.fallback(x);
    auto result = init.finish();
    double acc = 0.0;
    for (std::size_t x = 0; x < tvocab.size(); ++x)
        if (result.origin[x] == RowOrigin::transferred) acc += top_sim[x];
    if (result.report.transferred) result.report.mean_top_similarity = acc / static_cast<double>(result.report.transferred);
    return result;
}

inline TransferResult focus_transfer(const EmbeddingMatrix& src, const space::CommonSpaceBuild& target_space,
                                     const TransferConfig& cfg) {
    cfg.validate();
    std::unordered_map<std::string, std::uint32_t> source_by_canonical;
    for (std::uint32_t y = 0; y < src.rows(); ++y) {
        if (is_special_token(src.vocab()[y])) continue;
        source_by_canonical.emplace(canonicalize_token(src.vocab()[y], cfg.source_scheme), y);
    }
    const auto& tvocab = target_space.vocab;
    std::vector<std::int64_t> overlap_source(tvocab.size(), -1);
    std::size_t overlap = 0;
    for (std::size_t t = 0; t < tvocab.size(); ++t) {
        if (is_special_token(tvocab[t])) continue;
        auto it = source_by_canonical.find(canonicalize_token(tvocab[t], cfg.target_scheme));
        if (it != source_by_canonical.end()) {
            overlap_source[t] = it->second;
            ++overlap;
        }
    }
    if (overlap == 0)
        throw DataError("focus: source and target vocabularies share no tokens after canonicalization (source marker " +
                        cfg.source_scheme.describe() + ", target marker " + cfg.target_scheme.describe() +
                        ", canonical marker '" + std::string(kCanonicalMarker) + "')");

    const detail::NormalizedSpace wt(target_space);
    // Overlap tokens that can be compared in the target space.
    std::vector<std::size_t> anchors;
    for (std::size_t t = 0; t < tvocab.size(); ++t)
        if (overlap_source[t] >= 0 && wt.usable[t]) anchors.push_back(t);

    detail::Initializer init(src, tvocab, cfg);
    std::vector<char> needs_fallback(tvocab.size(), 0);
    std::vector<std::size_t> support(tvocab.size(), 0);
    parallel_for(tvocab.size(), cfg.threads, [&](std::size_t a) {
        if (is_special_token(tvocab[a])) {
            if (!init.copy_special(a)) needs_fallback[a] = 1;
            return;
        }
        if (overlap_source[a] >= 0) {
            init.set_weights(a, {{static_cast<std::uint32_t>(overlap_source[a]), 1.0}}, RowOrigin::copied);
            return;
        }
        if (!wt.usable[a] || anchors.empty()) {
            needs_fallback[a] = 1;
            return;
        }
        std::vector<double> scores(anchors.size());
        for (std::size_t j = 0; j < anchors.size(); ++j) scores[j] = wt.dot(a, wt, anchors[j]);
        const auto weights = sparsemax(scores);
        std::vector<SourceWeight> w;
        for (std::size_t j = 0; j < anchors.size(); ++j)
            if (weights[j] > 0.0) w.push_back({static_cast<std::uint32_t>(overlap_source[anchors[j]]), weights[j]});
        std::sort(w.begin(), w.end(), [](const auto& l, const auto& r) {
            return l.weight != r.weight ? l.weight > r.weight : l.source < r.source;
        });
        support[a] = w.size();
        init.set_weights(a, std::move(w), RowOrigin::transferred);
    });
    for (std::size_t t = 0; t < tvocab.size(); ++t)
        if (needs_fallback[t]) init.fallback(t);
    auto result = init.finish();
    result.report.overlap_size = overlap;
    std::size_t total_support = 0;
    for (auto s : support) total_support += s;
    if (result.report.transferred)
        result.report.mean_support = static_cast<double>(total_support) / static_cast<double>(result.report.transferred);
    return result;
}

inline TransferResult random_transfer(const EmbeddingMatrix& src, const std::vector<std::string>& target_vocab,
                                      const TransferConfig& cfg) {
    cfg.validate();
    TransferResult r;
    r.embedding = random_init(target_vocab, src.dim(), cfg.seed, cfg.random_mean, cfg.random_std);
    r.weights.rows.assign(target_vocab.size(), {});
    r.origin.assign(target_vocab.size(), RowOrigin::random);
    r.report.method = Method::random;
    r.report.target_size = target_vocab.size();
    r.report.source_size = src.rows();
    return r;
}

// Number of target tokens whose canonical form appears in the source
// vocabulary (specials excluded).
inline std::size_t overlap_size(const std::vector<std::string>& source_vocab, const std::vector<std::string>& target_vocab,
                                const MarkerScheme& source_scheme, const MarkerScheme& target_scheme) {
    std::unordered_set<std::string> src;
    for (const auto& s : source_vocab)
        if (!is_special_token(s)) src.insert(canonicalize_token(s, source_scheme));
    std::size_t n = 0;
    for (const auto& t : target_vocab)
        if (!is_special_token(t) && src.contains(canonicalize_token(t, target_scheme))) ++n;
    return n;
}

}  // namespace vocadapt::transfer
