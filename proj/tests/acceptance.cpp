// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "generators.hpp"
#include "helpers.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"
#include "toy_transfer.hpp"

using namespace vocadapt;
namespace ts = testing_support;
using Clock = std::chrono::steady_clock;

namespace {

// Collects the failed checks of one criterion.
struct Check {
    std::vector<std::string> failures;
    std::ostringstream detail;

    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) { return format_double(v); }

void c1(Check& c) {
    const auto t0 = Clock::now();
    const auto opt = schedule::steps_for_budget(schedule::kOptTokenizerTokens, 1024, 2048);
    const auto gams = schedule::steps_for_budget(schedule::kSloveneTokenizerTokens, 1024, 2048);
    const double ms = seconds_since(t0) * 1e3;
    const double opt_err = std::abs(static_cast<double>(opt) - 22000.0) / 22000.0;
    const double gams_err = std::abs(static_cast<double>(gams) - 13400.0) / 13400.0;
    c.expect(opt_err <= 0.03, "47.44e9 tokens: " + std::to_string(opt) + " steps");
    c.expect(gams_err <= 0.01, "28.13e9 tokens: " + std::to_string(gams) + " steps");
    c.expect(ms < 1.0, "runtime " + fmt(ms) + " ms");
    c.detail << "steps " << opt << " (" << fmt(100 * opt_err) << "% from 22000), " << gams << " ("
             << fmt(100 * gams_err) << "% from 13400), " << fmt(ms) << " ms";
}

void c2(Check& c) {
    const auto sl = schedule::split_validation(static_cast<std::int64_t>(schedule::kSloveneTokenizerTokens));
    const auto opt = schedule::split_validation(static_cast<std::int64_t>(schedule::kOptTokenizerTokens));
    // "around 15 or 24 million" depending on the tokenizer
    c.expect(std::abs(static_cast<double>(sl.validation) - 15e6) <= 1.5e6, "slovene split " + std::to_string(sl.validation));
    c.expect(std::abs(static_cast<double>(opt.validation) - 24e6) <= 2.4e6, "opt split " + std::to_string(opt.validation));
    c.detail << "validation tokens " << sl.validation << " and " << opt.validation;
}

void c3(Check& c) {
    const schedule::LrScheduleConfig cfg{2e-5, 2e-4, 2000, 500, 13413};
    c.expect(schedule::lr_at_step(cfg, 0) == 0.0, "lr(0)");
    c.expect(schedule::lr_at_step(cfg, 2000) == 2e-4, "lr(warmup)");
    c.expect(schedule::lr_at_step(cfg, 13413) == 2e-5, "lr(total)");
    double worst = 0.0;
    for (double b : {2000.0, 2000.0 + static_cast<double>(cfg.decay_steps())})
        for (double eps : {-1e-9, 1e-9}) worst = std::max(worst, std::abs(schedule::lr_at(cfg, b + eps) - schedule::lr_at(cfg, b)));
    c.expect(worst <= 1e-12, "boundary jump " + fmt(worst));
    c.detail << "lr(0)=" << fmt(schedule::lr_at_step(cfg, 0)) << " lr(2000)=" << fmt(schedule::lr_at_step(cfg, 2000))
             << " lr(13413)=" << fmt(schedule::lr_at_step(cfg, 13413)) << " max boundary jump " << fmt(worst);
}

void c4(Check& c) {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> z(1 + bounded(rng, 8));
        for (auto& v : z) v = u(rng);
        const auto p = sparsemax(z);
        const auto q = oracle::simplex_projection(z);
        for (std::size_t j = 0; j < z.size(); ++j) worst = std::max(worst, std::abs(p[j] - q[j]));
    }
    const double secs = seconds_since(t0);
    c.expect(worst <= 1e-6, "max deviation " + fmt(worst));
    c.expect(secs < 10.0, "runtime " + fmt(secs) + " s");
    c.detail << "1000 vectors, max deviation " << fmt(worst) << ", " << fmt(secs) << " s";
}

void convex_checks(Check& c, const std::string& tag, const transfer::TransferResult& r, const EmbeddingMatrix& src) {
    double worst_sum = 0.0, worst_row = 0.0;
    bool norm_ok = true;
    for (std::size_t t = 0; t < r.embedding.rows(); ++t) {
        const auto& w = r.weights.rows[t];
        if (w.empty()) continue;
        double sum = 0.0, max_norm = 0.0, norm = 0.0;
        for (const auto& sw : w) {
            if (sw.weight < 0.0) c.expect(false, tag + ": negative weight");
            sum += sw.weight;
            double n = 0.0;
            for (float v : src.row(sw.source)) n += static_cast<double>(v) * v;
            max_norm = std::max(max_norm, std::sqrt(n));
        }
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
        for (std::size_t d = 0; d < src.dim(); ++d) {
            double acc = 0.0;
            for (const auto& sw : w) acc += sw.weight * src.row(sw.source)[d];
            worst_row = std::max(worst_row, std::abs(acc - r.embedding.row(t)[d]));
            norm += static_cast<double>(r.embedding.row(t)[d]) * r.embedding.row(t)[d];
        }
        norm_ok = norm_ok && std::sqrt(norm) <= max_norm + 1e-5;
    }
    c.expect(worst_sum <= 1e-6, tag + ": weights sum off by " + fmt(worst_sum));
    c.expect(worst_row <= 1e-5, tag + ": row differs from weighted mean by " + fmt(worst_row));
    c.expect(norm_ok, tag + ": norm bound");
}

std::vector<float> vec(const space::CommonSpaceBuild& b, std::size_t i) {
    const auto v = *b.vector(i);
    return {v.begin(), v.end()};
}

void c5(Check& c) {
    ts::Toy toy;
    using namespace vocadapt::transfer;
    c.expect(toy.src.rows() == 200 && toy.src.dim() == 16 && toy.tvocab.size() == 300, "toy shape");

    TransferConfig wc;
    const auto w1 = wechsel_transfer(toy.src, toy.ws, toy.wt, wc);
    wc.threads = 8;
    const auto w8 = wechsel_transfer(toy.src, toy.ws, toy.wt, wc);
    TransferConfig fc{.method = Method::focus};
    const auto f1 = focus_transfer(toy.src, toy.wt, fc);
    fc.threads = 8;
    const auto f8 = focus_transfer(toy.src, toy.wt, fc);
    convex_checks(c, "wechsel", w1, toy.src);
    convex_checks(c, "focus", f1, toy.src);
    c.expect(w1.embedding == w8.embedding && w1.weights == w8.weights, "wechsel thread determinism");
    c.expect(f1.embedding == f8.embedding && f1.weights == f8.weights, "focus thread determinism");

    // overlap rows are bit-exact copies
    std::size_t copied = 0;
    for (std::size_t t = 0; t < toy.tvocab.size(); ++t) {
        const auto it = std::find(toy.svocab.begin(), toy.svocab.end(), toy.tvocab[t]);
        if (it == toy.svocab.end()) continue;
        const auto y = static_cast<std::size_t>(it - toy.svocab.begin());
        bool same = true;
        for (std::size_t d = 0; d < 16; ++d) same = same && f1.embedding.row(t)[d] == toy.src.row(y)[d];
        c.expect(same, "focus overlap row " + toy.tvocab[t]);
        ++copied;
    }
    c.expect(copied == 104 && f1.report.overlap_size == 100, "overlap size");

    // weights ordered as similarities; wechsel similarities in the shared
    // space, focus similarities to overlap tokens in the target space
    std::size_t order_violations = 0;
    for (std::size_t t = 4; t < toy.tvocab.size(); ++t) {
        const auto x = vec(toy.wt, t);
        const auto& ww = w1.weights.rows[t];
        for (std::size_t i = 1; i < ww.size(); ++i) {
            const double sa = cosine_similarity(std::span<const float>(x), std::span<const float>(vec(toy.ws, ww[i - 1].source)));
            const double sb = cosine_similarity(std::span<const float>(x), std::span<const float>(vec(toy.ws, ww[i].source)));
            if (sa < sb || ww[i - 1].weight < ww[i].weight) ++order_violations;
        }
        if (f1.origin[t] != RowOrigin::transferred) continue;
        const auto& fw = f1.weights.rows[t];
        auto sim_to_source = [&](std::uint32_t y) {
            const auto pos = std::find(toy.tvocab.begin(), toy.tvocab.end(), toy.svocab[y]) - toy.tvocab.begin();
            return cosine_similarity(std::span<const float>(x), std::span<const float>(vec(toy.wt, pos)));
        };
        for (std::size_t i = 1; i < fw.size(); ++i)
            if (sim_to_source(fw[i - 1].source) < sim_to_source(fw[i].source) - 1e-12) ++order_violations;
    }
    c.expect(order_violations == 0, std::to_string(order_violations) + " order violations");

    TransferConfig k1;
    k1.k = 1;
    const auto nn = wechsel_transfer(toy.src, toy.ws, toy.wt, k1);
    std::size_t nn_bad = 0;
    for (std::size_t t = 4; t < toy.tvocab.size(); ++t) {
        const auto x = vec(toy.wt, t);
        double best = -2.0;
        std::uint32_t arg = 0;
        for (std::uint32_t y = 4; y < toy.svocab.size(); ++y) {
            const double s = cosine_similarity(std::span<const float>(x), std::span<const float>(vec(toy.ws, y)));
            if (s > best) best = s, arg = y;
        }
        bool same = true;
        for (std::size_t d = 0; d < 16; ++d) same = same && nn.embedding.row(t)[d] == toy.src.row(arg)[d];
        nn_bad += same ? 0 : 1;
    }
    c.expect(nn_bad == 0, std::to_string(nn_bad) + " rows differ from nearest-neighbour copy");
    c.detail << "200x16 source, 300 targets; focus overlap " << f1.report.overlap_size << ", mean support "
             << fmt(f1.report.mean_support) << "; wechsel mean top similarity " << fmt(w1.report.mean_top_similarity);
}

void c6(Check& c) {
    const auto acc = eval::proportion_with_ci(17, 30);
    c.expect(std::abs(acc.lo - 0.38) <= 0.02, "lo " + fmt(acc.lo));
    c.expect(std::abs(acc.hi - 0.75) <= 0.02, "hi " + fmt(acc.hi));
    const std::vector<std::vector<std::pair<std::string, std::string>>> cases = {
        {{"a", "a"}, {"b", "a"}, {"b", "b"}},
        {{"a", "b"}, {"a", "a"}, {"b", "b"}, {"b", "b"}},
        {{"p", "p"}, {"q", "p"}, {"r", "q"}, {"p", "r"}},
        {{"x", "y"}, {"y", "y"}},
    };
    for (std::size_t i = 0; i < cases.size(); ++i) {
        std::vector<eval::PredictionRecord> recs;
        std::set<std::string> seen;
        for (const auto& [g, p] : cases[i]) {
            recs.push_back({"id", p, p, g});
            seen.insert(g);
            seen.insert(p);
        }
        const std::vector<std::string> labels(seen.begin(), seen.end());
        const auto m = eval::f1_with_bootstrap_ci(recs, eval::F1Spec{}, 10000, 0);
        const auto want = oracle::exhaustive_bootstrap(cases[i], labels, 0.95);
        c.expect(m.exhaustive && m.lo == want.lo && m.hi == want.hi,
                 "case " + std::to_string(i) + ": [" + fmt(m.lo) + ", " + fmt(m.hi) + "] vs [" + fmt(want.lo) + ", " +
                     fmt(want.hi) + "]");
    }
    c.detail << "17/30 -> " << fmt(acc.point) << " [" << fmt(acc.lo) << ", " << fmt(acc.hi) << "]; "
             << cases.size() << " exhaustive bootstrap cases";
}

std::string random_sentence(std::mt19937_64& rng) {
    static const char* words[] = {"a", "b", "c", "d", "e", "the", "cat"};
    std::string s;
    const auto n = bounded(rng, 10);
    for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + std::string(words[bounded(rng, 7)]);
    return s;
}

void c7(Check& c) {
    const double id = eval::sari("a b c d e", "a b c d e", {"a b c d e"}).sari;
    const double cr = eval::sari("the cat sat on the mat today", "a cat sat on a mat", {"a cat sat on a mat"}).sari;
    const double uni = eval::sari("a b c", "a b", {"a c"}, eval::SariConfig{{1}}).sari;
    c.expect(id == 100.0, "identity " + fmt(id));
    c.expect(cr == 100.0, "candidate = reference " + fmt(cr));
    c.expect(uni == 50.0, "unigram example " + fmt(uni));
    std::mt19937_64 rng(61);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const auto in = random_sentence(rng), cand = random_sentence(rng);
        std::vector<std::string> refs;
        const auto n = 1 + bounded(rng, 3);
        for (std::size_t r = 0; r < n; ++r) refs.push_back(random_sentence(rng));
        worst = std::max(worst, std::abs(eval::sari(in, cand, refs).sari - oracle::sari(in, cand, refs, 4).sari));
    }
    c.expect(worst <= 1e-9, "oracle deviation " + fmt(worst));
    c.detail << "identity " << fmt(id) << ", cand=ref " << fmt(cr) << ", unigram " << fmt(uni)
             << ", max oracle deviation " << fmt(worst);
}

void c8(Check& c) {
    const auto texts = ts::fixture_texts("corpus_sl");
    std::vector<bpe::TokenizerModel> models;
    for (std::size_t size : {1000u, 2000u, 4000u}) {
        bpe::BpeTrainConfig cfg;
        cfg.vocab_size = size;
        cfg.threads = 4;
        models.push_back(bpe::train_bpe(texts, cfg));
    }
    std::mt19937_64 rng(47);
    std::size_t bad = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto s = ts::fuzz_string(rng);
        for (const auto& m : models) bad += m.decode(m.encode(s)) == s ? 0 : 1;
    }
    c.expect(bad == 0, std::to_string(bad) + " round-trip failures");
    c.expect(bpe::is_merge_prefix(models[0], models[1]) && bpe::is_merge_prefix(models[1], models[2]), "merge prefix");
    std::vector<double> rates;
    for (const auto& m : models) rates.push_back(tokeval::multi_token_rate(tokeval::fertility_over_texts(m, texts, 4)));
    c.expect(rates[0] >= rates[1] && rates[1] >= rates[2], "multi_token_rate increases");
    c.detail << "10000 fuzz strings x 3 models; multi_token_rate " << fmt(rates[0]) << " / " << fmt(rates[1]) << " / "
             << fmt(rates[2]);
}

void c9(Check& c) {
    using namespace vocadapt::corpus;
    const std::string a = ts::tokens("w", 0, 120);
    const std::string ninety = ts::tokens("w", 0, 98) + " " + ts::tokens("c", 0, 10);
    const std::string fifty = ts::tokens("w", 0, 58) + " " + ts::tokens("f", 0, 50);
    const auto r = dedup_corpus(ts::docs_of({a, a, ninety, fifty}), {});
    std::vector<std::string> kept;
    for (const auto& d : r.docs) kept.push_back(d.id);
    c.expect(kept == std::vector<std::string>{"d0", "d3"}, "planted: exact and 90% dropped, 50% kept");

    std::mt19937_64 rng(17);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto units = ts::random_units(rng, 40);
        for (double th : {0.5, 0.9}) {
            const auto got = dedup_corpus(ts::docs_of(units), DedupConfig{9, th, DedupUnit::document});
            const auto keep = oracle::dedup_units(units, 9, th);
            std::vector<std::string> expect;
            for (std::size_t i = 0; i < keep.size(); ++i)
                if (keep[i]) expect.push_back("d" + std::to_string(i));
            std::vector<std::string> ids;
            for (const auto& d : got.docs) ids.push_back(d.id);
            mismatches += ids == expect ? 0 : 1;
            const auto again = dedup_corpus(got.docs, DedupConfig{9, th, DedupUnit::document});
            c.expect(again.docs == got.docs, "not idempotent");
        }
    }
    c.expect(mismatches == 0, std::to_string(mismatches) + " brute-force mismatches");
    c.detail << "planted kept " << kept.size() << " of 4; 40 random corpora against brute force";
}

void c10(Check& c) {
    ts::TempDir dir("acceptance");
    const auto t0 = Clock::now();
    const auto one = ts::run_pipeline(dir / "t1", 1);
    const auto eight = ts::run_pipeline(dir / "t8", 8);
    const double secs = seconds_since(t0);
    c.expect(one.failed_step < 0 && eight.failed_step < 0, "pipeline step failed");
    std::size_t differing = 0;
    for (const auto& [name, bytes] : one.files) {
        auto it = eight.files.find(name);
        if (it == eight.files.end() || it->second != bytes) {
            ++differing;
            c.expect(false, name + " differs");
        }
    }
    c.expect(one.files.size() == eight.files.size() && !one.files.empty(), "file sets differ");
    c.expect(secs < 120.0, "runtime " + fmt(secs) + " s");
    c.detail << one.files.size() << " files compared, " << differing << " differ, " << fmt(secs) << " s for both runs";
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
        {"step-count arithmetic", c1},  {"validation split", c2}, {"lr schedule", c3},
        {"sparsemax oracle", c4},       {"transfer invariants", c5}, {"confidence intervals", c6},
        {"sari", c7},                   {"tokenizer", c8},         {"dedup", c9},
        {"end-to-end determinism", c10},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check c;
        try {
            criteria[i].second(c);
        } catch (const std::exception& e) {
            c.failures.push_back(std::string("exception: ") + e.what());
        }
        const bool ok = c.failures.empty();
        failed += ok ? 0 : 1;
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << i + 1 << ". " << criteria[i].first << ": " << c.detail.str() << "\n";
        for (const auto& f : c.failures) std::cout << "       - " << f << "\n";
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
