#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "helpers.hpp"

using namespace vocadapt;
using namespace vocadapt::tokeval;
using bpe::TokenizerModel;

namespace {

const std::string M = std::string(bpe::kWordMarker);

std::vector<std::string> with_specials(std::vector<std::string> rest) {
    std::vector<std::string> v(bpe::kSpecials.begin(), bpe::kSpecials.end());
    v.insert(v.end(), rest.begin(), rest.end());
    return v;
}

TokenizerModel hand_model() {
    return TokenizerModel::from_parts(with_specials({M, "a", "b", "c", M + "a"}), {{M, "a"}}, false);
}

}  // namespace

TEST(Fertility, SingleTokenWord) {
    const auto m = TokenizerModel::from_parts(with_specials({M, "a", M + "a", M + "aa"}), {{M, "a"}, {M + "a", "a"}}, false);
    const auto h = fertility_histogram(m, std::vector<std::string>{"aa"});
    EXPECT_EQ(h.buckets[0], 1u);
    EXPECT_EQ(h.total_words, 1u);
    EXPECT_EQ(multi_token_rate(h), 0.0);
}

TEST(Fertility, HandCountedHistogram) {
    const auto m = hand_model();
    const std::vector<std::string> words = {"a", "a", "b", "c", "bc", "bbbbbbbbb"};
    const auto h = fertility_histogram(m, words);
    const std::array<std::uint64_t, 10> expect = {2, 2, 1, 0, 0, 0, 0, 0, 0, 1};
    EXPECT_EQ(h.buckets, expect);
    EXPECT_NEAR(multi_token_rate(h), 4.0 / 6.0, 1e-15);
}

TEST(Fertility, LongWordsPoolIntoLastBucket) {
    const auto m = hand_model();
    const auto h = fertility_histogram(m, std::vector<std::string>{"bbbbbbbbbbb"});  // 12 tokens
    EXPECT_EQ(h.buckets[9], 1u);
}

TEST(Fertility, EmptyCorpusRejected) {
    EXPECT_THROW(fertility_histogram(hand_model(), std::vector<std::string>{}), DataError);
    EXPECT_THROW(multi_token_rate(FertilityHistogram{}), DataError);
}

TEST(Fertility, HalfRate) {
    FertilityHistogram h;
    h.add(1);
    h.add(2);
    EXPECT_EQ(multi_token_rate(h), 0.5);
}

TEST(Fertility, BucketsSumToWordsAndThreadsAgree) {
    const auto& m = testing_support::fixture_tokenizer(1000);
    const auto texts = testing_support::fixture_texts("corpus_sl");
    const auto a = fertility_over_texts(m, texts, 1);
    const auto b = fertility_over_texts(m, texts, 8);
    EXPECT_EQ(a, b);
    EXPECT_EQ(std::accumulate(a.buckets.begin(), a.buckets.end(), std::uint64_t{0}), a.total_words);
    const double r = multi_token_rate(a);
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
}

TEST(Fertility, MultiTokenRateNonIncreasingInVocabSize) {
    const auto texts = testing_support::fixture_texts("corpus_sl");
    double prev = 2.0;
    for (std::size_t size : {1000u, 2000u, 4000u}) {
        const double r = multi_token_rate(fertility_over_texts(testing_support::fixture_tokenizer(size), texts, 4));
        EXPECT_LE(r, prev) << "vocab " << size;
        prev = r;
    }
}

TEST(Lexicon, CountsSurfaceForms) {
    const auto m = TokenizerModel::from_parts(with_specials({"a", "b", "cd"}), {}, false);
    const auto c = lexicon_coverage(m, {"a", "cd", "e"});
    EXPECT_EQ(c.vocab_size, 3u);
    EXPECT_EQ(c.in_lexicon, 2u);
    EXPECT_NEAR(c.fraction, 2.0 / 3.0, 1e-15);
}

TEST(Lexicon, SupersetGivesFullCoverage) {
    const auto m = TokenizerModel::from_parts(with_specials({"a", "b", M + "cd"}), {}, false);
    EXPECT_EQ(lexicon_coverage(m, {"a", "b", "cd", "zz"}).fraction, 1.0);
}

TEST(Lexicon, SpecialsAndBytesExcluded) {
    const auto m = TokenizerModel::from_parts(with_specials({"a"}), {}, false);
    const auto c = lexicon_coverage(m, {"<s>", "<unk>", "a"});
    EXPECT_EQ(c.vocab_size, 1u);
    EXPECT_EQ(c.in_lexicon, 1u);
    const auto& real = testing_support::fixture_tokenizer(1000);
    const auto r = lexicon_coverage(real, {"<0x41>", "<s>"});
    EXPECT_EQ(r.in_lexicon, 0u);
    EXPECT_EQ(r.vocab_size, real.size() - 4 - 256);
}

TEST(Lexicon, CaseFoldIsOptional) {
    const auto m = TokenizerModel::from_parts(with_specials({"Hiša"}), {}, false);
    EXPECT_EQ(lexicon_coverage(m, {"hiša"}).in_lexicon, 0u);
    EXPECT_EQ(lexicon_coverage(m, {"hiša"}, true).in_lexicon, 1u);
}

TEST(Lexicon, AgreesWithMembershipScan) {
    const auto& m = testing_support::fixture_tokenizer(2000);
    std::unordered_set<std::string> lex;
    std::istringstream text(vocadapt::read_file(testing_support::fixtures() / "lexicon_sl.txt"));
    for (std::string w; std::getline(text, w);)
        if (!w.empty()) lex.insert(w);
    std::uint64_t considered = 0, hits = 0;
    for (const auto& t : m.vocab()) {
        if (bpe::is_special_name(t) || bpe::is_byte_name(t)) continue;
        ++considered;
        std::string s = t;
        if (s.rfind(M, 0) == 0) s = s.substr(M.size());
        for (const auto& w : lex)
            if (w == s) ++hits;
    }
    const auto c = lexicon_coverage(m, lex);
    EXPECT_EQ(c.vocab_size, considered);
    EXPECT_EQ(c.in_lexicon, hits);
    EXPECT_GT(hits, 0u);
}

TEST(Lexicon, EmptyLexiconRejected) { EXPECT_THROW(lexicon_coverage(hand_model(), {}), DataError); }

TEST(TokenRatio, Metafida) { EXPECT_NEAR(token_ratio(6'590'000'000, 3'350'000'000).ratio, 1.967, 5e-4); }

TEST(TokenRatio, SameModelGivesOne) {
    const auto& m = testing_support::fixture_tokenizer(1000);
    const auto r = corpus_token_report(testing_support::fixture_texts("corpus_sl"), m, m, 4);
    EXPECT_EQ(r.ratio, 1.0);
    EXPECT_EQ(r.count_a, r.count_b);
}

TEST(TokenRatio, ZeroDenominatorRejected) { EXPECT_THROW(token_ratio(5, 0), DataError); }

namespace {

struct Row {
    const char* corpus;
    const char* language;
    double opt, slovene;
};

// Table 1 of the GaMS report, billions of tokens.
const std::vector<Row> kTable1 = {
    {"Metafida", "sl", 6.59, 3.35}, {"KAS", "sl", 3.61, 1.66},      {"Trendi", "sl", 1.4, 0.68},
    {"mC4", "sl", 5.5, 2.88},       {"MaCoCu", "sl", 4.68, 2.34},   {"CC100", "sl", 0.54, 0.29},
    {"Riznica", "hr", 0.21, 0.11},  {"HrNews", "hr", 4.16, 2.14},   {"MaCoCu", "cbs", 15.65, 8.63},
    {"Wikipedia", "en", 4.7, 5.61}, {"CC-News", "en", 0.4, 0.46},
};

}  // namespace

TEST(TokenRatio, TableOneRowsSumToTotals) {
    double opt = 0, sl = 0;
    for (const auto& r : kTable1) {
        opt += r.opt;
        sl += r.slovene;
    }
    // Each row is rounded to 0.01 B, so the sum can drift by up to half a
    // unit per row.
    const double slack = 0.005 * static_cast<double>(kTable1.size());
    EXPECT_NEAR(opt, 47.44, slack);
    EXPECT_NEAR(sl, 28.13, slack);
}

TEST(TokenRatio, SloveneRowsNeedAboutTwiceAsManyOptTokens) {
    for (const auto& r : kTable1) {
        if (std::string(r.language) != "sl") continue;
        const auto rep = token_ratio(static_cast<std::uint64_t>(r.opt * 1e9), static_cast<std::uint64_t>(r.slovene * 1e9));
        EXPECT_NEAR(rep.ratio, 2.0, 0.3) << r.corpus;
    }
}

TEST(TokenRatio, TargetTokenizerIsMoreEfficientOnTargetText) {
    bpe::BpeTrainConfig cfg;
    cfg.vocab_size = 1000;
    const auto english = bpe::train_bpe(testing_support::fixture_texts("corpus_en"), cfg);
    const auto& slovene = testing_support::fixture_tokenizer(1000);
    const auto r = corpus_token_report(testing_support::fixture_texts("corpus_sl"), english, slovene, 4);
    EXPECT_GT(r.ratio, 1.0);
}
