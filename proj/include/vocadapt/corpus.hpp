#pragma once

// Corpus preparation: removal of scanning artifacts and order-preserving
// n-gram near-deduplication.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "vocadapt/error.hpp"
#include "vocadapt/hash.hpp"
#include "vocadapt/parallel.hpp"
#include "vocadapt/unicode.hpp"

namespace vocadapt::corpus {

struct Document {
    std::string id;
    std::string text;
    std::string source;

    bool operator==(const Document&) const = default;
};

struct CleaningConfig {
    std::size_t min_run_chars = 5;
    // č ž š Č Ž Š
    std::set<char32_t> allowlist = {U'č', U'ž', U'š', U'Č', U'Ž', U'Š'};
    // Letters of any script (Greek, Cyrillic, CJK, ...) are never problematic.
    bool letter_scripts_exempt = true;

    void validate() const {
        if (min_run_chars < 1) throw ConfigError("min_run_chars must be >= 1");
    }
};

enum class DedupUnit { paragraph, document };

struct DedupConfig {
    std::size_t ngram_order = 9;
    double duplicate_threshold = 0.9;
    DedupUnit unit = DedupUnit::paragraph;

    void validate() const {
        if (ngram_order < 1) throw ConfigError("ngram_order must be >= 1");
        if (!(duplicate_threshold >= 0.0 && duplicate_threshold <= 1.0))
            throw ConfigError("duplicate_threshold must lie in [0, 1]");
    }
};

struct PipelineReport {
    std::size_t docs_in = 0;
    std::size_t docs_kept = 0;
    std::size_t chars_removed = 0;
    std::size_t units_in = 0;
    std::size_t duplicate_units_dropped = 0;
    // Units shorter than the n-gram order; they are always kept.
    std::size_t units_without_ngrams = 0;
};

// Byte range [begin, end) into the scanned text.
struct Span {
    std::size_t begin;
    std::size_t end;

    bool operator==(const Span&) const = default;
};

inline bool is_problematic(char32_t cp, const CleaningConfig& cfg) {
    if (cp < 0x80) return false;
    if (cfg.allowlist.contains(cp)) return false;
    if (cfg.letter_scripts_exempt && unicode::is_letter(cp)) return false;
    return true;
}

// Maximal runs of whitespace-delimited words made only of problematic
// characters whose summed length (in code points, separators excluded)
// reaches cfg.min_run_chars. A span starts at the first byte of the run's
// first word and ends after its last word.
inline std::vector<Span> scan_problematic_runs(std::string_view text, const CleaningConfig& cfg) {
    cfg.validate();
    std::vector<Span> spans;
    std::size_t run_begin = 0, run_end = 0, run_chars = 0;
    bool in_run = false;
    auto close_run = [&] {
        if (in_run && run_chars >= cfg.min_run_chars) spans.push_back({run_begin, run_end});
        in_run = false;
        run_chars = 0;
    };
    for (std::string_view word : unicode::split_whitespace(text)) {
        std::size_t chars = 0;
        bool all_bad = true;
        unicode::for_each_char(word, [&](const unicode::Utf8Char& c) {
            ++chars;
            if (!is_problematic(c.cp, cfg)) all_bad = false;
        });
        const std::size_t begin = static_cast<std::size_t>(word.data() - text.data());
        if (!all_bad) {
            close_run();
            continue;
        }
        if (!in_run) {
            in_run = true;
            run_begin = begin;
        }
        run_end = begin + word.size();
        run_chars += chars;
    }
    close_run();
    return spans;
}

// Removes every scanned span. Where a removal leaves a space on both sides,
// one of them is dropped; text outside the junctions is left byte-identical.
inline std::string clean_text(std::string_view text, const CleaningConfig& cfg,
                              std::size_t* chars_removed = nullptr) {
    unicode::require_utf8(text);
    const auto spans = scan_problematic_runs(text, cfg);
    if (spans.empty()) return std::string(text);
    std::string out;
    out.reserve(text.size());
    std::size_t cursor = 0, removed = 0;
    for (const Span& s : spans) {
        out.append(text.substr(cursor, s.begin - cursor));
        removed += unicode::length(text.substr(s.begin, s.end - s.begin));
        cursor = s.end;
        if (!out.empty() && out.back() == ' ' && cursor < text.size() && text[cursor] == ' ') {
            ++cursor;
            ++removed;
        }
    }
    out.append(text.substr(cursor));
    if (chars_removed) *chars_removed += removed;
    return out;
}

inline Document clean_document(const Document& doc, const CleaningConfig& cfg,
                               std::size_t* chars_removed = nullptr) {
    Document out = doc;
    out.text = clean_text(doc.text, cfg, chars_removed);
    return out;
}

struct CorpusResult {
    std::vector<Document> docs;
    // Position of each output document in the input list.
    std::vector<std::size_t> source_index;
    PipelineReport report;
};

inline CorpusResult clean_corpus(
    const std::vector<Document>& docs, const CleaningConfig& cfg, unsigned threads = 1) {
    cfg.validate();
    std::vector<Document> out(docs.size());
    std::vector<std::size_t> removed(docs.size(), 0);
    parallel_for(docs.size(), threads,
                 [&](std::size_t i) { out[i] = clean_document(docs[i], cfg, &removed[i]); });
    PipelineReport report;
    report.docs_in = docs.size();
    report.docs_kept = docs.size();
    for (std::size_t r : removed) report.chars_removed += r;
    std::vector<std::size_t> index(docs.size());
    for (std::size_t i = 0; i < index.size(); ++i) index[i] = i;
    return {std::move(out), std::move(index), report};
}

// ---------------------------------------------------------------------------
// Near-deduplication

// Paragraphs are maximal groups of non-blank lines; blank means
// whitespace-only.
inline std::vector<std::string> split_paragraphs(std::string_view text) {
    std::vector<std::string> paragraphs;
    std::string current;
    bool have = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        if (unicode::split_whitespace(line).empty()) {
            if (have) paragraphs.push_back(std::move(current));
            current.clear();
            have = false;
        } else {
            if (have) current.push_back('\n');
            current.append(line);
            have = true;
        }
        pos = nl + 1;
    }
    if (have) paragraphs.push_back(std::move(current));
    return paragraphs;
}

inline std::vector<std::string> shingle_tokens(std::string_view unit) {
    std::vector<std::string> tokens;
    for (std::string_view w : unicode::split_whitespace(unit)) tokens.push_back(unicode::lowercase(w));
    return tokens;
}

// Distinct 64-bit fingerprints of the token n-grams, sorted.
inline std::vector<std::uint64_t> shingle_fingerprints(const std::vector<std::string>& tokens,
                                                       std::size_t order) {
    std::vector<std::uint64_t> out;
    if (order == 0 || tokens.size() < order) return out;
    out.reserve(tokens.size() - order + 1);
    for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
        std::uint64_t h = kFnvOffset;
        for (std::size_t j = i; j < i + order; ++j) {
            h = fnv1a64(tokens[j], h);
            h = fnv1a64("\x1f", h);
        }
        out.push_back(h);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Fingerprints of every kept unit so far.
class ShingleIndex {
public:
    // Fraction of `fingerprints` already present; 0 for an empty list.
    double overlap(const std::vector<std::uint64_t>& fingerprints) const {
        if (fingerprints.empty()) return 0.0;
        std::size_t seen = 0;
        for (std::uint64_t f : fingerprints) seen += seen_.contains(f) ? 1 : 0;
        return static_cast<double>(seen) / static_cast<double>(fingerprints.size());
    }

    void insert(const std::vector<std::uint64_t>& fingerprints) {
        seen_.insert(fingerprints.begin(), fingerprints.end());
    }

    std::size_t size() const { return seen_.size(); }

private:
    std::unordered_set<std::uint64_t> seen_;
};

inline CorpusResult dedup_corpus(
    const std::vector<Document>& docs, const DedupConfig& cfg, unsigned threads = 1) {
    cfg.validate();
    if (docs.empty()) throw DataError("dedup_corpus: empty corpus");

    struct DocUnits {
        std::vector<std::string> texts;
        std::vector<std::vector<std::uint64_t>> fingerprints;
    };
    std::vector<DocUnits> units(docs.size());
    parallel_for(docs.size(), threads, [&](std::size_t i) {
        unicode::require_utf8(docs[i].text, "document " + docs[i].id);
        DocUnits& u = units[i];
        if (cfg.unit == DedupUnit::paragraph)
            u.texts = split_paragraphs(docs[i].text);
        else
            u.texts = {docs[i].text};
        for (const auto& t : u.texts)
            u.fingerprints.push_back(shingle_fingerprints(shingle_tokens(t), cfg.ngram_order));
    });

    PipelineReport report;
    report.docs_in = docs.size();
    ShingleIndex index;
    CorpusResult result;
    std::vector<Document>& kept = result.docs;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const DocUnits& u = units[i];
        std::vector<std::size_t> survivors;
        for (std::size_t j = 0; j < u.texts.size(); ++j) {
            ++report.units_in;
            const auto& fp = u.fingerprints[j];
            if (fp.empty()) ++report.units_without_ngrams;
            if (!fp.empty() && index.overlap(fp) >= cfg.duplicate_threshold) {
                ++report.duplicate_units_dropped;
                continue;
            }
            index.insert(fp);
            survivors.push_back(j);
        }
        if (!u.texts.empty() && survivors.empty()) continue;
        Document out = docs[i];
        if (survivors.size() != u.texts.size()) {
            out.text.clear();
            for (std::size_t s = 0; s < survivors.size(); ++s) {
                if (s) out.text += "\n\n";
                out.text += u.texts[survivors[s]];
            }
        }
        kept.push_back(std::move(out));
        result.source_index.push_back(i);
    }
    report.docs_kept = kept.size();
    result.report = report;
    return result;
}

}  // namespace vocadapt::corpus
