#pragma once

// Builds the shared space in which source and target tokens are compared:
// either a lookup into externally trained word vectors or the mean of an
// auxiliary model's input embeddings over its own tokenization of the token.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vocadapt/bpe.hpp"
#include "vocadapt/canonical.hpp"
#include "vocadapt/embedding.hpp"
#include "vocadapt/error.hpp"
#include "vocadapt/parallel.hpp"

namespace vocadapt::space {

struct AuxiliaryEncoder {
    bpe::TokenizerModel tokenizer;
    EmbeddingMatrix embedding;

    AuxiliaryEncoder(bpe::TokenizerModel t, EmbeddingMatrix e) : tokenizer(std::move(t)), embedding(std::move(e)) {
        if (embedding.rows() != tokenizer.size())
            throw DataError("auxiliary embedding has " + std::to_string(embedding.rows()) + " rows for a vocabulary of " +
                            std::to_string(tokenizer.size()));
    }
};

// Mean of the auxiliary rows of the token's pieces. Word-initial tokens
// (canonical marker) are encoded with the boundary marker, others as
// word-internal fragments. Special tokens are left out of the mean.
inline std::vector<float> subword_mean_embed(const AuxiliaryEncoder& aux, std::string_view canonical_token) {
    if (canonical_token.empty()) throw DataError("subword_mean_embed: empty token");
    const bool initial = is_word_initial(canonical_token);
    const auto ids = aux.tokenizer.encode_piece(strip_canonical_marker(canonical_token), initial);
    const std::size_t dim = aux.embedding.dim();
    std::vector<double> acc(dim, 0.0);
    std::size_t k = 0;
    for (auto id : ids) {
        if (aux.tokenizer.kind(id) == bpe::TokenKind::special) continue;
        const auto r = aux.embedding.row(id);
        for (std::size_t d = 0; d < dim; ++d) acc[d] += r[d];
        ++k;
    }
    if (k == 0) throw DataError("subword_mean_embed: auxiliary tokenizer produced no tokens for '" +
                                std::string(canonical_token) + "'");
    std::vector<float> out(dim);
    for (std::size_t d = 0; d < dim; ++d) out[d] = static_cast<float>(acc[d] / static_cast<double>(k));
    return out;
}

class SpaceProvider {
public:
    virtual ~SpaceProvider() = default;
    virtual std::size_t dim() const = 0;
    // nullopt when the provider has no representation for the token.
    virtual std::optional<std::vector<float>> embed(const std::string& canonical_token) const = 0;
};

// Looks a token up by its canonical form first, then by its surface form,
// so both word-vector files and previously built spaces can be used.
class WordVectorProvider final : public SpaceProvider {
public:
    explicit WordVectorProvider(const WordVectorTable& table) : table_(table) {}
    std::size_t dim() const override { return table_.dim(); }
    std::optional<std::vector<float>> embed(const std::string& canonical_token) const override {
        auto hit = table_.find(canonical_token);
        if (!hit) {
            const std::string surface(strip_canonical_marker(canonical_token));
            if (surface.empty()) return std::nullopt;
            hit = table_.find(surface);
        }
        if (!hit) return std::nullopt;
        return std::vector<float>(hit->begin(), hit->end());
    }

private:
    const WordVectorTable& table_;
};

class SubwordMeanProvider final : public SpaceProvider {
public:
    explicit SubwordMeanProvider(const AuxiliaryEncoder& aux) : aux_(aux) {}
    std::size_t dim() const override { return aux_.embedding.dim(); }
    std::optional<std::vector<float>> embed(const std::string& canonical_token) const override {
        if (canonical_token.empty()) return std::nullopt;
        try {
            return subword_mean_embed(aux_, canonical_token);
        } catch (const DataError&) {
            return std::nullopt;
        }
    }

private:
    const AuxiliaryEncoder& aux_;
};

// Common-space vectors for one vocabulary. Rows follow vocabulary order;
// rows of missing tokens are zero and flagged absent.
struct CommonSpaceBuild {
    std::vector<std::string> vocab;
    std::vector<std::string> canonical;
    std::size_t dim = 0;
    std::vector<float> data;
    std::vector<bool> present;
    std::vector<std::string> missing;

    std::optional<std::span<const float>> vector(std::size_t i) const {
        if (!present.at(i)) return std::nullopt;
        return std::span<const float>(data.data() + i * dim, dim);
    }

    std::size_t embedded_count() const { return vocab.size() - missing.size(); }

    // Embedded rows only, keyed by canonical token.
    EmbeddingMatrix embedded_matrix() const {
        std::vector<std::string> names;
        std::vector<float> values;
        for (std::size_t i = 0; i < vocab.size(); ++i) {
            if (!present[i]) continue;
            names.push_back(canonical[i]);
            values.insert(values.end(), data.begin() + static_cast<std::ptrdiff_t>(i * dim),
                          data.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
        }
        return EmbeddingMatrix(std::move(names), dim, std::move(values));
    }

    bool operator==(const CommonSpaceBuild&) const = default;
};

inline CommonSpaceBuild build_common_space(const std::vector<std::string>& vocab, const SpaceProvider& provider,
                                           const MarkerScheme& scheme, unsigned threads = 1) {
    if (vocab.empty()) throw DataError("build_common_space: empty vocabulary");
    if (provider.dim() == 0) throw DataError("build_common_space: provider has dimension 0");
    CommonSpaceBuild b;
    b.vocab = vocab;
    b.dim = provider.dim();
    b.canonical.resize(vocab.size());
    b.data.assign(vocab.size() * b.dim, 0.0f);
    b.present.assign(vocab.size(), false);
    std::vector<char> ok(vocab.size(), 0);
    parallel_for(vocab.size(), threads, [&](std::size_t i) {
        b.canonical[i] = canonicalize_token(vocab[i], scheme);
        auto v = provider.embed(b.canonical[i]);
        if (!v) return;
        if (v->size() != b.dim) throw DataError("provider returned a vector of the wrong dimension");
        std::copy(v->begin(), v->end(), b.data.begin() + static_cast<std::ptrdiff_t>(i * b.dim));
        ok[i] = 1;
    });
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        b.present[i] = ok[i] != 0;
        if (!ok[i]) b.missing.push_back(vocab[i]);
    }
    return b;
}

}  // namespace vocadapt::space
