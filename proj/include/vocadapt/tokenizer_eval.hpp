#pragma once

// Vocabulary quality metrics: per-word fertility histogram, share of words
// split into several tokens, lexicon coverage of the vocabulary, and corpus
// token accounting under two tokenizers.

#include <array>
#include <numeric>
#include <ranges>
#include <string>
#include <string_view>
#include <unordered_set>

#include "vocadapt/bpe.hpp"
#include "vocadapt/error.hpp"
#include "vocadapt/parallel.hpp"

namespace vocadapt::tokeval {

inline constexpr std::size_t kFertilityBuckets = 10;

struct FertilityHistogram {
    // buckets[i] counts words encoded with i+1 tokens; the last bucket pools
    // 10 or more.
    std::array<std::uint64_t, kFertilityBuckets> buckets{};
    std::uint64_t total_words = 0;

    void add(std::size_t tokens) {
        const std::size_t b = tokens == 0 ? 0 : std::min(tokens, kFertilityBuckets) - 1;
        ++buckets[b];
        ++total_words;
    }

    FertilityHistogram& operator+=(const FertilityHistogram& o) {
        for (std::size_t i = 0; i < kFertilityBuckets; ++i) buckets[i] += o.buckets[i];
        total_words += o.total_words;
        return *this;
    }

    bool operator==(const FertilityHistogram&) const = default;
};

// Each word is encoded on its own (with the word-boundary marker).
template <std::ranges::input_range Words>
    requires std::convertible_to<std::ranges::range_reference_t<Words>, std::string_view>
FertilityHistogram fertility_histogram(const bpe::TokenizerModel& model, const Words& words) {
    FertilityHistogram h;
    for (const auto& w : words) h.add(model.count_tokens(std::string_view(w)));
    if (h.total_words == 0) throw DataError("fertility_histogram: empty corpus");
    return h;
}

// Histogram over every whitespace word of a set of documents.
inline FertilityHistogram fertility_over_texts(const bpe::TokenizerModel& model,
                                               const std::vector<std::string>& texts, unsigned threads = 1) {
    std::vector<FertilityHistogram> parts(texts.size());
    parallel_for(texts.size(), threads, [&](std::size_t i) {
        for (auto w : unicode::split_whitespace(texts[i])) parts[i].add(model.count_tokens(w));
    });
    FertilityHistogram total;
    for (const auto& p : parts) total += p;
    if (total.total_words == 0) throw DataError("fertility_histogram: empty corpus");
    return total;
}

inline double multi_token_rate(const FertilityHistogram& h) {
    if (h.total_words == 0) throw DataError("multi_token_rate: histogram has no words");
    return static_cast<double>(h.total_words - h.buckets[0]) / static_cast<double>(h.total_words);
}

struct LexiconCoverage {
    std::uint64_t vocab_size = 0;
    std::uint64_t in_lexicon = 0;
    double fraction = 0.0;
};

// Surface form of a vocabulary entry: the leading word marker is dropped.
inline std::string surface_form(std::string_view piece) {
    if (piece.starts_with(bpe::kWordMarker)) piece.remove_prefix(bpe::kWordMarker.size());
    return std::string(piece);
}

// Counts ordinary vocabulary entries (specials and byte tokens excluded from
// both sides) whose surface form is a lexicon entry.
inline LexiconCoverage lexicon_coverage(const bpe::TokenizerModel& model,
                                        const std::unordered_set<std::string>& lexicon, bool fold_case = false) {
    if (lexicon.empty()) throw DataError("lexicon_coverage: empty lexicon");
    std::unordered_set<std::string> folded;
    if (fold_case)
        for (const auto& w : lexicon) folded.insert(unicode::lowercase(w));
    const auto& lookup = fold_case ? folded : lexicon;
    LexiconCoverage c;
    for (bpe::TokenId id = 0; id < model.size(); ++id) {
        if (model.kind(id) != bpe::TokenKind::normal) continue;
        ++c.vocab_size;
        std::string form = surface_form(model.token(id));
        if (fold_case) form = unicode::lowercase(form);
        if (!form.empty() && lookup.contains(form)) ++c.in_lexicon;
    }
    c.fraction = c.vocab_size ? static_cast<double>(c.in_lexicon) / static_cast<double>(c.vocab_size) : 0.0;
    return c;
}

struct TokenCountReport {
    std::uint64_t count_a = 0;
    std::uint64_t count_b = 0;
    double ratio = 0.0;
};

inline TokenCountReport token_ratio(std::uint64_t count_a, std::uint64_t count_b) {
    if (count_b == 0) throw DataError("token ratio undefined: second tokenizer produced no tokens");
    return {count_a, count_b, static_cast<double>(count_a) / static_cast<double>(count_b)};
}

inline TokenCountReport corpus_token_report(const std::vector<std::string>& texts, const bpe::TokenizerModel& a,
                                            const bpe::TokenizerModel& b, unsigned threads = 1) {
    if (texts.empty()) throw DataError("corpus_token_report: empty corpus");
    std::vector<std::uint64_t> ca(texts.size()), cb(texts.size());
    parallel_for(texts.size(), threads, [&](std::size_t i) {
        ca[i] = a.count_tokens(texts[i]);
        cb[i] = b.count_tokens(texts[i]);
    });
    return token_ratio(std::accumulate(ca.begin(), ca.end(), std::uint64_t{0}),
                       std::accumulate(cb.begin(), cb.end(), std::uint64_t{0}));
}

}  // namespace vocadapt::tokeval
