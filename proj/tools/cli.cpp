#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vocadapt.hpp"

namespace vocadapt::cli {
namespace {

namespace fs = std::filesystem;

struct Globals {
    std::uint64_t seed = 0;
    unsigned threads = default_threads();
};

std::string strip_quotes(std::string v) {
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) v = v.substr(1, v.size() - 2);
    return v;
}

// Version, subcommand and every resolved option of the subcommand. The
// thread count is left out on purpose: it never changes results.
KeyValueReport begin_report(const CLI::App& sub, const Globals& g) {
    KeyValueReport r;
    r.add("version", std::string(kVersion));
    r.add("command", sub.get_name());
    r.add("config.seed", g.seed);
    std::istringstream lines(sub.config_to_str(true, false));
    for (std::string line; std::getline(lines, line);) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        r.add("config." + line.substr(0, eq), strip_quotes(line.substr(eq + 1)));
    }
    return r;
}

void add_digest(KeyValueReport& r, const std::string& label, const fs::path& p) {
    r.add("input." + label, digest_path(p));
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
    fs::path p = out.lexically_normal();
    if (p.filename().empty()) p = p.parent_path();
    return fs::path(p.string() + suffix);
}

std::vector<std::string> read_lines(const fs::path& path) {
    const std::string text = read_file(path);
    unicode::require_utf8(text, path.string());
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        pos = nl + 1;
    }
    return lines;
}

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        const auto b = cur.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = cur.find_last_not_of(" \t");
        out.push_back(cur.substr(b, e - b + 1));
    }
    return out;
}

std::vector<std::string> document_texts(const fs::path& dir) {
    std::vector<std::string> texts;
    for (const auto& d : corpus::flatten(corpus::load_corpus(dir))) texts.push_back(d.text);
    if (texts.empty()) throw DataError("corpus directory has no documents: " + dir.string());
    return texts;
}

// Matrix from a WVEC or word2vec text file; `vocab_path` supplies the row
// tokens for WVEC files without a sidecar, or is checked against them.
EmbeddingMatrix load_matrix(const fs::path& path, const std::string& vocab_path) {
    const std::string bytes = read_file(path);
    if (bytes.starts_with(kWvecMagic)) {
        auto vocab = vocab_path.empty() ? parse_vocab_list(read_file(sidecar_vocab_path(path))) : load_vocab(vocab_path);
        return parse_wvec(bytes, std::move(vocab), path.string());
    }
    EmbeddingMatrix m = parse_word2vec_text(bytes, path.string());
    if (!vocab_path.empty() && load_vocab(vocab_path) != m.vocab())
        throw DataError("vocabulary " + vocab_path + " does not match the rows of " + path.string());
    return m;
}

// --- clean -----------------------------------------------------------------

struct CleanOpts {
    std::string in, out, report, allow = "čžšČŽŠ";
    std::size_t min_run = 5;
    bool no_letter_exempt = false;
};

void add_clean(CLI::App& app, CleanOpts& o) {
    app.add_option("--in", o.in, "Input corpus directory")->required();
    app.add_option("--out", o.out, "Output corpus directory")->required();
    app.add_option("--min-run", o.min_run, "Minimum combined length of a removed run");
    app.add_option("--allow", o.allow, "Non-ASCII characters that are always kept");
    app.add_flag("--no-letter-exempt", o.no_letter_exempt, "Treat non-Latin letters as problematic");
    app.add_option("--report", o.report, "Report file (default <out>.report.txt)");
}

void run_clean(const CLI::App& sub, const CleanOpts& o, const Globals& g) {
    corpus::CleaningConfig cfg;
    cfg.min_run_chars = o.min_run;
    cfg.letter_scripts_exempt = !o.no_letter_exempt;
    unicode::require_utf8(o.allow, "--allow");
    cfg.allowlist.clear();
    for (char32_t cp : unicode::decode(o.allow)) cfg.allowlist.insert(cp);
    cfg.validate();
    const auto files = corpus::load_corpus(o.in);
    const auto result = corpus::clean_corpus(corpus::flatten(files), cfg, g.threads);
    corpus::write_corpus(o.out, corpus::regroup(files, result.docs, result.source_index));

    auto r = begin_report(sub, g);
    add_digest(r, "in", o.in);
    r.add("docs_in", result.report.docs_in);
    r.add("docs_kept", result.report.docs_kept);
    r.add("chars_removed", result.report.chars_removed);
    add_digest(r, "output", o.out);
    r.write(o.report.empty() ? sibling(o.out, ".report.txt") : fs::path(o.report));
}

// --- dedup -----------------------------------------------------------------

struct DedupOpts {
    std::string in, out, report, unit = "paragraph";
    std::size_t ngram = 9;
    double threshold = 0.9;
};

void add_dedup(CLI::App& app, DedupOpts& o) {
    app.add_option("--in", o.in, "Input corpus directory")->required();
    app.add_option("--out", o.out, "Output corpus directory")->required();
    app.add_option("--ngram", o.ngram, "Shingle length in tokens");
    app.add_option("--threshold", o.threshold, "Overlap fraction at which a unit is dropped");
    app.add_option("--unit", o.unit, "paragraph or document")->check(CLI::IsMember({"paragraph", "document"}));
    app.add_option("--report", o.report, "Report file (default <out>.report.txt)");
}

void run_dedup(const CLI::App& sub, const DedupOpts& o, const Globals& g) {
    corpus::DedupConfig cfg;
    cfg.ngram_order = o.ngram;
    cfg.duplicate_threshold = o.threshold;
    cfg.unit = o.unit == "document" ? corpus::DedupUnit::document : corpus::DedupUnit::paragraph;
    const auto files = corpus::load_corpus(o.in);
    const auto result = corpus::dedup_corpus(corpus::flatten(files), cfg, g.threads);
    corpus::write_corpus(o.out, corpus::regroup(files, result.docs, result.source_index));

    auto r = begin_report(sub, g);
    add_digest(r, "in", o.in);
    r.add("docs_in", result.report.docs_in);
    r.add("docs_kept", result.report.docs_kept);
    r.add("units_in", result.report.units_in);
    r.add("duplicate_units_dropped", result.report.duplicate_units_dropped);
    r.add("units_without_ngrams", result.report.units_without_ngrams);
    if (result.report.units_in && result.report.units_without_ngrams == result.report.units_in)
        r.add("warning", "no unit has " + std::to_string(o.ngram) + " tokens; nothing could be deduplicated");
    add_digest(r, "output", o.out);
    r.write(o.report.empty() ? sibling(o.out, ".report.txt") : fs::path(o.report));
}

// --- train-tokenizer -------------------------------------------------------

struct TrainOpts {
    std::string in, out, report;
    std::size_t vocab_size = 80000;
    double coverage = 1.0;
    bool no_byte_fallback = false, no_nfc = false;
};

void add_train(CLI::App& app, TrainOpts& o) {
    app.add_option("--in", o.in, "Training corpus directory")->required();
    app.add_option("--out", o.out, "Model file")->required();
    app.add_option("--vocab-size", o.vocab_size, "Target vocabulary size including specials and bytes");
    app.add_option("--coverage", o.coverage, "Fraction of character occurrences covered by the base alphabet");
    app.add_flag("--no-byte-fallback", o.no_byte_fallback, "Map unknown characters to <unk>");
    app.add_flag("--no-nfc", o.no_nfc, "Skip NFC normalization of training text");
    app.add_option("--report", o.report, "Report file (default <out>.report.txt)");
}

void run_train(const CLI::App& sub, const TrainOpts& o, const Globals& g) {
    bpe::BpeTrainConfig cfg;
    cfg.vocab_size = o.vocab_size;
    cfg.character_coverage = o.coverage;
    cfg.byte_fallback = !o.no_byte_fallback;
    cfg.normalize_nfc = !o.no_nfc;
    cfg.threads = g.threads;
    const auto texts = document_texts(o.in);
    const auto model = bpe::train_bpe(texts, cfg);
    model.save(o.out);

    auto r = begin_report(sub, g);
    add_digest(r, "in", o.in);
    r.add("vocab_size", model.size());
    r.add("merges", model.merges().size());
    if (model.size() < cfg.vocab_size) r.add("stopped", "no pair occurs at least twice");
    add_digest(r, "output", o.out);
    r.write(o.report.empty() ? sibling(o.out, ".report.txt") : fs::path(o.report));
}

// --- eval-tokenizer --------------------------------------------------------

struct EvalTokOpts {
    std::string model, corpus, lexicon, compare, out;
    bool fold_case = false;
};

void add_eval_tok(CLI::App& app, EvalTokOpts& o) {
    app.add_option("--model", o.model, "Tokenizer model")->required();
    app.add_option("--corpus", o.corpus, "Evaluation corpus directory")->required();
    app.add_option("--lexicon", o.lexicon, "Word list, one word per line");
    app.add_flag("--fold-case", o.fold_case, "Lower-case tokens and lexicon entries before matching");
    app.add_option("--compare", o.compare, "Second model; reports the token-count ratio model/compare");
    app.add_option("--out", o.out, "Report file")->required();
}

void run_eval_tok(const CLI::App& sub, const EvalTokOpts& o, const Globals& g) {
    const auto model = bpe::TokenizerModel::load(o.model);
    const auto texts = document_texts(o.corpus);
    const auto hist = tokeval::fertility_over_texts(model, texts, g.threads);

    auto r = begin_report(sub, g);
    add_digest(r, "model", o.model);
    add_digest(r, "corpus", o.corpus);
    r.add("vocab_size", model.size());
    r.add("words", hist.total_words);
    for (std::size_t b = 0; b < tokeval::kFertilityBuckets; ++b)
        r.add("fertility." + std::to_string(b + 1) + (b + 1 == tokeval::kFertilityBuckets ? "+" : ""), hist.buckets[b]);
    r.add("multi_token_rate", tokeval::multi_token_rate(hist));
    if (!o.lexicon.empty()) {
        add_digest(r, "lexicon", o.lexicon);
        std::unordered_set<std::string> lexicon;
        for (auto& w : read_lines(o.lexicon))
            if (!w.empty()) lexicon.insert(o.fold_case ? unicode::lowercase(w) : w);
        const auto cov = tokeval::lexicon_coverage(model, lexicon, o.fold_case);
        r.add("lexicon.tokens_considered", cov.vocab_size);
        r.add("lexicon.tokens_in_lexicon", cov.in_lexicon);
        r.add("lexicon_coverage", cov.fraction);
    }
    if (!o.compare.empty()) {
        add_digest(r, "compare", o.compare);
        const auto other = bpe::TokenizerModel::load(o.compare);
        const auto rep = tokeval::corpus_token_report(texts, model, other, g.threads);
        r.add("tokens.model", rep.count_a);
        r.add("tokens.compare", rep.count_b);
        r.add("token_ratio", rep.ratio);
    }
    r.write(o.out);
}

// --- build-space -----------------------------------------------------------

struct SpaceOpts {
    std::string vocab, marker = "sentencepiece", vectors, aux_model, aux_emb, out, missing, report;
};

void add_space(CLI::App& app, SpaceOpts& o) {
    app.add_option("--vocab", o.vocab, "Vocabulary: tokenizer model or token list")->required();
    app.add_option("--marker", o.marker, "Word-boundary marker scheme: sentencepiece, gpt2 or none");
    app.add_option("--vectors", o.vectors, "Word vectors (word2vec text or WVEC)");
    app.add_option("--aux-model", o.aux_model, "Auxiliary tokenizer for subword-mean vectors");
    app.add_option("--aux-emb", o.aux_emb, "Auxiliary input embeddings, rows aligned with --aux-model");
    app.add_option("--out", o.out, "Output WVEC file keyed by canonical token")->required();
    app.add_option("--missing", o.missing, "Write tokens without a vector to this file");
    app.add_option("--report", o.report, "Report file (default <out>.report.txt)");
}

struct SpaceSource {
    std::optional<WordVectorTable> table;
    std::optional<space::AuxiliaryEncoder> aux;
    std::unique_ptr<space::SpaceProvider> provider;
};

SpaceSource open_space_source(const std::string& vectors, const std::string& aux_model, const std::string& aux_emb) {
    SpaceSource s;
    if (!vectors.empty() && !aux_model.empty())
        throw ConfigError("choose either word vectors or an auxiliary model, not both");
    if (!vectors.empty()) {
        s.table.emplace(load_word_vectors(vectors));
        s.provider = std::make_unique<space::WordVectorProvider>(*s.table);
    } else if (!aux_model.empty()) {
        if (aux_emb.empty()) throw ConfigError("an auxiliary model needs its embeddings (--aux-emb)");
        s.aux.emplace(bpe::TokenizerModel::load(aux_model), read_matrix(aux_emb));
        s.provider = std::make_unique<space::SubwordMeanProvider>(*s.aux);
    } else {
        throw ConfigError("no common-space source given (word vectors or auxiliary model)");
    }
    return s;
}

void run_space(const CLI::App& sub, const SpaceOpts& o, const Globals& g) {
    const auto scheme = parse_marker_scheme(o.marker);
    const auto vocab = load_vocab(o.vocab);
    auto source = open_space_source(o.vectors, o.aux_model, o.aux_emb);
    const auto build = space::build_common_space(vocab, *source.provider, scheme, g.threads);
    write_wvec(o.out, build.embedded_matrix());
    if (!o.missing.empty()) write_file(o.missing, format_vocab_list(build.missing));

    auto r = begin_report(sub, g);
    add_digest(r, "vocab", o.vocab);
    if (!o.vectors.empty()) add_digest(r, "vectors", o.vectors);
    if (!o.aux_model.empty()) {
        add_digest(r, "aux_model", o.aux_model);
        add_digest(r, "aux_emb", o.aux_emb);
    }
    r.add("vocab_size", vocab.size());
    r.add("dim", build.dim);
    r.add("embedded", build.embedded_count());
    r.add("missing", build.missing.size());
    add_digest(r, "output", o.out);
    r.write(o.report.empty() ? sibling(o.out, ".report.txt") : fs::path(o.report));
}

// --- transfer --------------------------------------------------------------

struct TransferOpts {
    std::string method = "wechsel", src_emb, src_vocab, tgt_vocab, space_src, space_tgt, space_aux_model, space_aux_emb;
    std::string src_marker = "sentencepiece", tgt_marker = "sentencepiece", fallback = "matched-moments";
    std::string out, out_output, weights, report;
    std::size_t k = 10;
    double tau = 0.1, random_mean = 0.0, random_std = 0.02;
    bool tied = false;
};

void add_transfer(CLI::App& app, TransferOpts& o) {
    app.add_option("--method", o.method, "wechsel, focus or random")
        ->check(CLI::IsMember({"wechsel", "focus", "random"}));
    app.add_option("--k", o.k, "Nearest neighbours per target token (wechsel)");
    app.add_option("--tau", o.tau, "Softmax temperature (wechsel)");
    app.add_flag("--tied", o.tied, "Also emit the output projection for tied weights");
    app.add_option("--src-emb", o.src_emb, "Source input embeddings")->required();
    app.add_option("--src-vocab", o.src_vocab, "Source vocabulary (default: the embedding's sidecar)");
    app.add_option("--tgt-vocab", o.tgt_vocab, "Target vocabulary: tokenizer model or token list")->required();
    app.add_option("--space-src", o.space_src, "Common-space vectors for source tokens");
    app.add_option("--space-tgt", o.space_tgt, "Common-space vectors for target tokens");
    app.add_option("--space-aux-model", o.space_aux_model, "Auxiliary tokenizer for subword-mean spaces");
    app.add_option("--space-aux-emb", o.space_aux_emb, "Auxiliary embeddings for subword-mean spaces");
    app.add_option("--src-marker", o.src_marker, "Source marker scheme: sentencepiece, gpt2 or none");
    app.add_option("--tgt-marker", o.tgt_marker, "Target marker scheme: sentencepiece, gpt2 or none");
    app.add_option("--fallback", o.fallback, "Rows without a usable vector: matched-moments or error")
        ->check(CLI::IsMember({"matched-moments", "error"}));
    app.add_option("--random-mean", o.random_mean, "Mean of the random baseline");
    app.add_option("--random-std", o.random_std, "Standard deviation of the random baseline");
    app.add_option("--out", o.out, "Output WVEC file")->required();
    app.add_option("--out-output", o.out_output, "Output projection file with --tied (default <out stem>.output.wvec)");
    app.add_option("--weights", o.weights, "Write per-row source weights as TSV");
    app.add_option("--report", o.report, "Report file (default <out>.report.txt)");
}

std::string origin_name(transfer::RowOrigin o) {
    switch (o) {
        case transfer::RowOrigin::transferred: return "transferred";
        case transfer::RowOrigin::copied: return "copied";
        case transfer::RowOrigin::special: return "special";
        case transfer::RowOrigin::fallback: return "fallback";
        case transfer::RowOrigin::random: return "random";
    }
    return "unknown";
}

void run_transfer(const CLI::App& sub, const TransferOpts& o, const Globals& g) {
    transfer::TransferConfig cfg;
    cfg.method = transfer::parse_method(o.method);
    cfg.k = o.k;
    cfg.temperature = o.tau;
    cfg.tied = o.tied;
    cfg.seed = g.seed;
    cfg.fallback = o.fallback == "error" ? transfer::Fallback::error : transfer::Fallback::matched_moments;
    cfg.source_scheme = parse_marker_scheme(o.src_marker);
    cfg.target_scheme = parse_marker_scheme(o.tgt_marker);
    cfg.random_mean = o.random_mean;
    cfg.random_std = o.random_std;
    cfg.threads = g.threads;
    cfg.validate();

    const auto src = load_matrix(o.src_emb, o.src_vocab);
    const auto tgt_vocab = load_vocab(o.tgt_vocab);
    if (tgt_vocab.empty()) throw DataError("target vocabulary is empty");

    const bool aux = !o.space_aux_model.empty();
    auto space_for = [&](const std::vector<std::string>& vocab, const std::string& vectors,
                         const MarkerScheme& scheme, const char* side) {
        if (vectors.empty() && !aux)
            throw ConfigError(std::string("method ") + o.method + " needs a " + side +
                              " common space (--space-" + side + " or --space-aux-model)");
        auto source = aux ? open_space_source("", o.space_aux_model, o.space_aux_emb) : open_space_source(vectors, "", "");
        return space::build_common_space(vocab, *source.provider, scheme, g.threads);
    };

    transfer::TransferResult result;
    switch (cfg.method) {
        case transfer::Method::wechsel: {
            const auto ws = space_for(src.vocab(), o.space_src, cfg.source_scheme, "src");
            const auto wt = space_for(tgt_vocab, o.space_tgt, cfg.target_scheme, "tgt");
            result = transfer::wechsel_transfer(src, ws, wt, cfg);
            break;
        }
        case transfer::Method::focus: {
            const auto wt = space_for(tgt_vocab, o.space_tgt, cfg.target_scheme, "tgt");
            result = transfer::focus_transfer(src, wt, cfg);
            break;
        }
        case transfer::Method::random: result = transfer::random_transfer(src, tgt_vocab, cfg); break;
    }
    if (!result.embedding.all_finite()) throw DataError("transfer produced non-finite values");
    write_wvec(o.out, result.embedding);
    fs::path output_path;
    if (auto out = transfer::apply_tied(result, cfg)) {
        output_path = o.out_output;
        if (output_path.empty()) {
            output_path = o.out;
            output_path.replace_extension(".output" + fs::path(o.out).extension().string());
        }
        write_wvec(output_path, *out);
    }
    if (!o.weights.empty()) {
        std::string tsv = "target\ttoken\torigin\tsources\n";
        for (std::size_t t = 0; t < tgt_vocab.size(); ++t) {
            tsv += std::to_string(t) + '\t' + bpe::detail::escape(tgt_vocab[t]) + '\t' + origin_name(result.origin[t]) + '\t';
            const auto& w = result.weights.rows[t];
            for (std::size_t i = 0; i < w.size(); ++i) {
                if (i) tsv += ',';
                tsv += std::to_string(w[i].source) + ':' + format_double(w[i].weight);
            }
            tsv += '\n';
        }
        write_file(o.weights, tsv);
    }

    auto r = begin_report(sub, g);
    add_digest(r, "src_emb", o.src_emb);
    if (!o.src_vocab.empty()) add_digest(r, "src_vocab", o.src_vocab);
    add_digest(r, "tgt_vocab", o.tgt_vocab);
    if (!o.space_src.empty()) add_digest(r, "space_src", o.space_src);
    if (!o.space_tgt.empty()) add_digest(r, "space_tgt", o.space_tgt);
    if (aux) {
        add_digest(r, "space_aux_model", o.space_aux_model);
        add_digest(r, "space_aux_emb", o.space_aux_emb);
    }
    const auto& rep = result.report;
    r.add("method", std::string(transfer::to_string(rep.method)));
    r.add("source_size", rep.source_size);
    r.add("target_size", rep.target_size);
    r.add("dim", result.embedding.dim());
    r.add("overlap_size", cfg.method == transfer::Method::focus
                              ? rep.overlap_size
                              : transfer::overlap_size(src.vocab(), tgt_vocab, cfg.source_scheme, cfg.target_scheme));
    r.add("transferred", rep.transferred);
    r.add("specials_copied", rep.specials_copied);
    r.add("fallback_count", rep.fallback_count);
    if (cfg.method == transfer::Method::wechsel) r.add("mean_top_similarity", rep.mean_top_similarity);
    if (cfg.method == transfer::Method::focus) r.add("mean_support", rep.mean_support);
    add_digest(r, "output", o.out);
    if (!output_path.empty()) add_digest(r, "output_projection", output_path);
    r.write(o.report.empty() ? sibling(o.out, ".report.txt") : fs::path(o.report));
}

// --- sari ------------------------------------------------------------------

struct SariOpts {
    std::string input, candidates, out, table, orders = "4";
    std::vector<std::string> references;
    std::size_t bootstrap = 1000;
    double level = 0.95;
};

void add_sari(CLI::App& app, SariOpts& o) {
    app.add_option("--input", o.input, "Source sentences, one per line")->required();
    app.add_option("--candidates", o.candidates, "System outputs, one per line")->required();
    app.add_option("--references", o.references, "Reference file(s), one sentence per line; repeatable")->required();
    app.add_option("--orders", o.orders, "Comma-separated n-gram orders");
    app.add_option("--bootstrap", o.bootstrap, "Bootstrap resamples for the corpus interval (0 disables)");
    app.add_option("--level", o.level, "Confidence level");
    app.add_option("--out", o.out, "Report file")->required();
    app.add_option("--table", o.table, "Per-sentence scores as TSV");
}

void run_sari(const CLI::App& sub, const SariOpts& o, const Globals& g) {
    eval::SariConfig cfg;
    cfg.orders.clear();
    for (const auto& s : split_list(o.orders)) {
        if (s.find_first_not_of("0123456789") != std::string::npos) throw ConfigError("bad n-gram order: " + s);
        cfg.orders.push_back(std::stoul(s));
    }
    const auto inputs = read_lines(o.input);
    const auto cands = read_lines(o.candidates);
    std::vector<std::vector<std::string>> refs;
    for (const auto& f : o.references) refs.push_back(read_lines(f));
    if (inputs.empty()) throw DataError("no input sentences");
    if (cands.size() != inputs.size())
        throw DataError("candidates have " + std::to_string(cands.size()) + " lines, input has " +
                        std::to_string(inputs.size()));
    for (std::size_t f = 0; f < refs.size(); ++f)
        if (refs[f].size() != inputs.size())
            throw DataError(o.references[f] + " has " + std::to_string(refs[f].size()) + " lines, input has " +
                            std::to_string(inputs.size()));

    const eval::SariConfig four{{4}}, standard{{1, 2, 3, 4}};
    struct Row {
        eval::SariBreakdown main, four, standard;
    };
    std::vector<Row> rows(inputs.size());
    parallel_for(inputs.size(), g.threads, [&](std::size_t i) {
        std::vector<std::string> sent_refs;
        for (const auto& r : refs) sent_refs.push_back(r[i]);
        rows[i] = {eval::sari(inputs[i], cands[i], sent_refs, cfg), eval::sari(inputs[i], cands[i], sent_refs, four),
                   eval::sari(inputs[i], cands[i], sent_refs, standard)};
    });

    auto r = begin_report(sub, g);
    add_digest(r, "input", o.input);
    add_digest(r, "candidates", o.candidates);
    for (std::size_t f = 0; f < o.references.size(); ++f) add_digest(r, "references." + std::to_string(f), o.references[f]);
    r.add("sentences", inputs.size());
    r.add("reference_merge", "multiset union (max count per n-gram)");
    auto emit = [&](const std::string& prefix, auto pick) {
        std::vector<double> scores;
        double add = 0, keep = 0, del = 0;
        for (const auto& row : rows) {
            const auto& b = pick(row);
            scores.push_back(b.sari);
            add += b.f1_add;
            keep += b.f1_keep;
            del += b.p_del;
        }
        const auto n = static_cast<double>(rows.size());
        r.add(prefix + ".f1_add", add / n);
        r.add(prefix + ".f1_keep", keep / n);
        r.add(prefix + ".p_del", del / n);
        if (o.bootstrap > 0) {
            const auto ci = eval::mean_with_bootstrap_ci(scores, o.bootstrap, g.seed, o.level, g.threads);
            r.add(prefix, ci.point);
            r.add(prefix + ".lo", ci.lo);
            r.add(prefix + ".hi", ci.hi);
        } else {
            double s = 0;
            for (double v : scores) s += v;
            r.add(prefix, s / n);
        }
        return scores;
    };
    const auto main_scores = emit("sari", [](const Row& x) -> const eval::SariBreakdown& { return x.main; });
    emit("sari_4gram", [](const Row& x) -> const eval::SariBreakdown& { return x.four; });
    emit("sari_orders_1_4", [](const Row& x) -> const eval::SariBreakdown& { return x.standard; });
    r.write(o.out);

    if (!o.table.empty()) {
        std::string tsv = "line\tsari\tf1_add\tf1_keep\tp_del\tsari_4gram\tsari_orders_1_4\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& b = rows[i].main;
            tsv += std::to_string(i + 1) + '\t' + format_double(b.sari) + '\t' + format_double(b.f1_add) + '\t' +
                   format_double(b.f1_keep) + '\t' + format_double(b.p_del) + '\t' + format_double(rows[i].four.sari) +
                   '\t' + format_double(rows[i].standard.sari) + '\n';
        }
        write_file(o.table, tsv);
    }
}

// --- score -----------------------------------------------------------------

struct ScoreOpts {
    std::string task, records, labels, pattern, f1 = "macro", positive, out, table;
    std::size_t bootstrap = 10000;
    double level = 0.95;
};

void add_score(CLI::App& app, ScoreOpts& o) {
    app.add_option("--task", o.task, "Task name (boolq, cb, copa, multirc, rte, wsc, si-nli)")->required();
    app.add_option("--records", o.records, "Prediction records, one JSON object per line (id, gold, raw_output)")
        ->required();
    app.add_option("--labels", o.labels, "Comma-separated accepted answers (overrides the task default)");
    app.add_option("--pattern", o.pattern, "Regular expression for accepted answers (overrides the task default)");
    app.add_option("--f1", o.f1, "F1 averaging: macro, class or none")->check(CLI::IsMember({"macro", "class", "none"}));
    app.add_option("--positive", o.positive, "Positive label for --f1 class");
    app.add_option("--bootstrap", o.bootstrap, "Bootstrap resamples for the F1 interval");
    app.add_option("--level", o.level, "Confidence level");
    app.add_option("--out", o.out, "Report file")->required();
    app.add_option("--table", o.table, "Parsed predictions as TSV");
}

std::vector<eval::PredictionRecord> read_records(const fs::path& path, const eval::AnswerParser& parser) {
    std::vector<eval::PredictionRecord> records;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(where + ": " + e.what());
        }
        for (const char* field : {"id", "gold", "raw_output"})
            if (!j.is_object() || !j.contains(field) || !j[field].is_string())
                throw DataError(where + ": record needs a string '" + field + "'");
        eval::PredictionRecord rec;
        rec.id = j["id"].get<std::string>();
        rec.raw_output = j["raw_output"].get<std::string>();
        rec.gold = eval::AnswerParser::normalize(j["gold"].get<std::string>());
        rec.parsed = parser.parse(rec.raw_output);
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw DataError("no records in " + path.string());
    return records;
}

void run_score(const CLI::App& sub, const ScoreOpts& o, const Globals& g) {
    const auto& preset = eval::task_preset(o.task);
    eval::AnswerParser parser = eval::parser_for(preset);
    if (!o.labels.empty()) {
        parser.labels = split_list(o.labels);
        parser.pattern.reset();
    }
    if (!o.pattern.empty()) {
        try {
            parser.pattern = std::regex(o.pattern);
        } catch (const std::regex_error& e) {
            throw ConfigError("bad --pattern: " + std::string(e.what()));
        }
        if (o.labels.empty()) parser.labels.clear();
    }
    if (parser.labels.empty() && !parser.pattern)
        throw ConfigError("task " + o.task + " has no answer form; give --labels or --pattern");

    const auto records = read_records(o.records, parser);
    const auto valid = eval::valid_only(records);
    auto r = begin_report(sub, g);
    add_digest(r, "records", o.records);
    r.add("few_shot_k", preset.default_k);
    r.add("records", records.size());
    r.add("valid", valid.size());
    r.add("invalid", records.size() - valid.size());
    r.add("invalid_rate", eval::invalid_rate(records));
    if (valid.empty()) throw DataError("no valid records: every prediction failed the answer form");

    const auto acc = eval::accuracy_with_ci(valid, o.level);
    r.add("accuracy", acc.point);
    r.add("accuracy.lo", acc.lo);
    r.add("accuracy.hi", acc.hi);
    r.add("accuracy.method", "normal-approx");
    if (o.f1 != "none") {
        eval::F1Spec spec;
        if (o.f1 == "class") {
            spec.mode = eval::F1Spec::Mode::single_class;
            spec.positive = unicode::lowercase(o.positive);
        } else {
            for (const auto& l : parser.labels) spec.labels.push_back(unicode::lowercase(l));
        }
        const auto f1 = eval::f1_with_bootstrap_ci(valid, spec, o.bootstrap, g.seed, o.level, g.threads);
        r.add("f1", f1.point);
        r.add("f1.lo", f1.lo);
        r.add("f1.hi", f1.hi);
        r.add("f1.method", "quantile-bootstrap");
        r.add("f1.resamples", f1.resamples);
        r.add("f1.exhaustive", f1.exhaustive);
        r.add("f1.degenerate_resamples", f1.degenerate_resamples);
    }
    r.write(o.out);

    if (!o.table.empty()) {
        std::string tsv = "id\tgold\tparsed\tvalid\tcorrect\n";
        for (const auto& rec : records) {
            tsv += bpe::detail::escape(rec.id) + '\t' + bpe::detail::escape(rec.gold) + '\t' +
                   bpe::detail::escape(rec.parsed.value_or("")) + '\t' + (rec.valid() ? "1" : "0") + '\t' +
                   (rec.valid() && *rec.parsed == rec.gold ? "1" : "0") + '\n';
        }
        write_file(o.table, tsv);
    }
}

// --- schedule --------------------------------------------------------------

struct ScheduleOpts {
    std::string preset = "gams", emit = "csv", out, report;
    std::int64_t steps = -1, every = 1;
};

void add_schedule(CLI::App& app, ScheduleOpts& o) {
    app.add_option("--preset", o.preset, "gams, opt-gams, multi-epoch or quality")
        ->check(CLI::IsMember({"gams", "opt-gams", "multi-epoch", "quality"}));
    app.add_option("--steps", o.steps, "Total steps (default: the preset's)");
    app.add_option("--every", o.every, "Emit every N-th step");
    app.add_option("--emit", o.emit, "Output format")->check(CLI::IsMember({"csv"}));
    app.add_option("--out", o.out, "Output file")->required();
    app.add_option("--report", o.report, "Also write a report file");
}

void run_schedule(const CLI::App& sub, const ScheduleOpts& o, const Globals& g) {
    auto p = schedule::preset(o.preset);
    if (o.steps >= 0) p.lr.total_steps = o.steps;
    if (o.every < 1) throw ConfigError("--every must be >= 1");
    p.lr.validate();
    std::string csv = "step,lr,trainable_groups\n";
    for (std::int64_t s = 0; s <= p.lr.total_steps; ++s) {
        if (s % o.every != 0 && s != p.lr.total_steps) continue;
        std::string groups;
        for (const auto& grp : schedule::trainable_groups(p.freeze, s, p.steps_per_epoch)) {
            if (!groups.empty()) groups += '+';
            groups += grp;
        }
        csv += std::to_string(s) + ',' + format_double(schedule::lr_at_step(p.lr, s)) + ',' + groups + '\n';
    }
    write_file(o.out, csv);
    if (!o.report.empty()) {
        auto r = begin_report(sub, g);
        r.add("eta_min", p.lr.eta_min);
        r.add("eta_max", p.lr.eta_max);
        r.add("warmup_steps", p.lr.warmup_steps);
        r.add("constant_steps", p.lr.constant_steps);
        r.add("total_steps", p.lr.total_steps);
        r.add("freeze", p.freeze.describe());
        r.add("steps_per_epoch", p.steps_per_epoch);
        r.add("adam_beta1", p.adam_beta1);
        r.add("adam_beta2", p.adam_beta2);
        add_digest(r, "output", o.out);
        r.write(o.report);
    }
}

// --- report ----------------------------------------------------------------

struct ManifestOpts {
    std::vector<std::string> inputs;
    std::string out;
};

void add_manifest(CLI::App& app, ManifestOpts& o) {
    app.add_option("--inputs", o.inputs, "Files or directories to digest")->required();
    app.add_option("--out", o.out, "Report file")->required();
}

void run_manifest(const CLI::App& sub, const ManifestOpts& o, const Globals& g) {
    auto r = begin_report(sub, g);
    for (std::size_t i = 0; i < o.inputs.size(); ++i) {
        r.add("path." + std::to_string(i), o.inputs[i]);
        add_digest(r, std::to_string(i), o.inputs[i]);
    }
    r.write(o.out);
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Vocabulary adaptation toolkit: corpus preparation, tokenizers, embedding transfer and evaluation"};
    app.name("vocadapt");
    app.option_defaults()->always_capture_default();
    app.set_version_flag("--version", std::string(kVersion));
    app.set_config("--config", "", "INI file; [subcommand] sections set that subcommand's options");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1, 1);

    Globals g;
    app.add_option("--seed", g.seed, "Seed for every random choice");
    app.add_option("--threads", g.threads, "Worker threads (results do not depend on it)")->check(CLI::Range(1u, 1024u));

    CleanOpts clean;
    DedupOpts dedup;
    TrainOpts train;
    EvalTokOpts evaltok;
    SpaceOpts spc;
    TransferOpts xfer;
    SariOpts sari;
    ScoreOpts score;
    ScheduleOpts sched;
    ManifestOpts manifest;

    auto* c_clean = app.add_subcommand("clean", "Remove runs of scanning artifacts");
    add_clean(*c_clean, clean);
    auto* c_dedup = app.add_subcommand("dedup", "Drop near-duplicate paragraphs or documents");
    add_dedup(*c_dedup, dedup);
    auto* c_train = app.add_subcommand("train-tokenizer", "Train a BPE tokenizer");
    add_train(*c_train, train);
    auto* c_evaltok = app.add_subcommand("eval-tokenizer", "Fertility, lexicon coverage and token counts");
    add_eval_tok(*c_evaltok, evaltok);
    auto* c_space = app.add_subcommand("build-space", "Common-space vectors for a vocabulary");
    add_space(*c_space, spc);
    auto* c_xfer = app.add_subcommand("transfer", "Initialize target embeddings from a source model");
    add_transfer(*c_xfer, xfer);
    auto* c_sari = app.add_subcommand("sari", "SARI for simplification outputs");
    add_sari(*c_sari, sari);
    auto* c_score = app.add_subcommand("score", "Invalid rate, accuracy and F1 with intervals");
    add_score(*c_score, score);
    auto* c_sched = app.add_subcommand("schedule", "Learning-rate and freeze schedule as CSV");
    add_schedule(*c_sched, sched);
    auto* c_manifest = app.add_subcommand("report", "Digest files and directories into a report");
    add_manifest(*c_manifest, manifest);
    for (auto* s : app.get_subcommands({})) s->allow_config_extras(CLI::config_extras_mode::error);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ConfigError& e) {
        std::cerr << "vocadapt: config: " << e.what() << "\n";
        return 2;
    } catch (const CLI::ParseError& e) {
        std::string what = e.what();
        // The first bare word after the global options names the subcommand.
        for (int i = 1; i < argc; ++i) {
            const std::string a = argv[i];
            if (a == "--seed" || a == "--threads" || a == "--config") {
                ++i;
                continue;
            }
            if (a.starts_with("-")) continue;
            if (!app.get_subcommand_no_throw(a)) what = "unknown subcommand '" + a + "'";
            break;
        }
        std::cerr << "vocadapt: " << what << "\n\n" << app.help();
        return 1;
    }

    try {
        if (c_clean->parsed()) run_clean(*c_clean, clean, g);
        else if (c_dedup->parsed()) run_dedup(*c_dedup, dedup, g);
        else if (c_train->parsed()) run_train(*c_train, train, g);
        else if (c_evaltok->parsed()) run_eval_tok(*c_evaltok, evaltok, g);
        else if (c_space->parsed()) run_space(*c_space, spc, g);
        else if (c_xfer->parsed()) run_transfer(*c_xfer, xfer, g);
        else if (c_sari->parsed()) run_sari(*c_sari, sari, g);
        else if (c_score->parsed()) run_score(*c_score, score, g);
        else if (c_sched->parsed()) run_schedule(*c_sched, sched, g);
        else if (c_manifest->parsed()) run_manifest(*c_manifest, manifest, g);
    } catch (const std::exception& e) {
        std::cerr << "vocadapt " << app.get_subcommands().front()->get_name() << ": " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace vocadapt::cli
