#pragma once

// Byte-pair-encoding tokenizer with byte fallback.
//
// Text is split into segments: every U+0020 space becomes the word-boundary
// marker U+2581 and opens a new segment, other whitespace characters stand
// alone, and a dummy leading space is added before encoding. Merges never
// cross segment boundaries. A literal U+2581 in the input can not be told
// apart from a space once mapped, so it is always emitted as byte tokens;
// with byte fallback this makes decode(encode(t)) == t for every valid
// UTF-8 string.
//
// Vocabulary layout: <s> </s> <pad> <unk> at ids 0-3, then the 256 byte
// tokens <0x00>..<0xFF> when byte fallback is on, then base characters
// (most frequent first), then merge results in learned order.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ranges>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "vocadapt/error.hpp"
#include "vocadapt/parallel.hpp"
#include "vocadapt/report.hpp"
#include "vocadapt/unicode.hpp"

namespace vocadapt::bpe {

using TokenId = std::uint32_t;

inline constexpr std::string_view kWordMarker = "\xE2\x96\x81";  // U+2581
inline constexpr char32_t kWordMarkerCp = 0x2581;
inline constexpr std::array<std::string_view, 4> kSpecials = {"<s>", "</s>", "<pad>", "<unk>"};
inline constexpr TokenId kBos = 0, kEos = 1, kPad = 2, kUnk = 3;
inline constexpr TokenId kNumSpecials = 4;
inline constexpr TokenId kNumBytes = 256;

enum class TokenKind : std::uint8_t { special, byte, normal };

inline std::string byte_token_name(unsigned b) {
    static constexpr char digits[] = "0123456789ABCDEF";
    std::string s = "<0x";
    s += digits[(b >> 4) & 0xF];
    s += digits[b & 0xF];
    s += '>';
    return s;
}

inline bool is_special_name(std::string_view s) {
    for (auto sp : kSpecials)
        if (s == sp) return true;
    return false;
}

inline bool is_byte_name(std::string_view s) {
    auto hex = [](char c) { return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'F'); };
    return s.size() == 6 && s.starts_with("<0x") && hex(s[3]) && hex(s[4]) && s[5] == '>';
}

struct BpeTrainConfig {
    std::size_t vocab_size = 80000;
    double character_coverage = 1.0;
    bool byte_fallback = true;
    // Applied to training text only; encode() never normalizes so that
    // decoding stays lossless.
    bool normalize_nfc = true;
    unsigned threads = 1;

    void validate() const {
        if (vocab_size == 0) throw ConfigError("vocab_size must be positive");
        if (!(character_coverage > 0.0 && character_coverage <= 1.0))
            throw ConfigError("character_coverage must lie in (0, 1]");
    }
};

namespace detail {

// Internal stand-in for a literal U+2581; outside the Unicode range so it can
// never collide with real input.
inline constexpr char32_t kRawMarker = 0x110000;

// Splits text into segments of code points as described at the top of the
// file.
inline std::vector<std::u32string> segment(std::string_view text, bool dummy_prefix) {
    std::vector<std::u32string> segments;
    std::u32string current;
    auto flush = [&] {
        if (!current.empty()) segments.push_back(std::move(current));
        current.clear();
    };
    if (dummy_prefix && !text.empty()) current.push_back(kWordMarkerCp);
    const bool ok = unicode::for_each_char(text, [&](const unicode::Utf8Char& c) {
        if (c.cp == U' ') {
            flush();
            current.push_back(kWordMarkerCp);
        } else if (unicode::is_space(c.cp)) {
            flush();
            segments.push_back(std::u32string(1, c.cp));
        } else if (c.cp == kWordMarkerCp) {
            current.push_back(kRawMarker);
        } else {
            current.push_back(c.cp);
        }
    });
    if (!ok) throw DataError("invalid UTF-8 sequence");
    flush();
    return segments;
}

inline constexpr std::uint64_t pair_key(TokenId a, TokenId b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace detail

class TokenizerModel {
public:
    TokenizerModel() = default;

    // Builds and validates a model from token strings and merge pairs.
    static TokenizerModel from_parts(std::vector<std::string> vocab,
                                     const std::vector<std::pair<std::string, std::string>>& merges,
                                     bool byte_fallback) {
        TokenizerModel m;
        m.byte_fallback_ = byte_fallback;
        m.vocab_ = std::move(vocab);
        m.reindex();
        for (const auto& [l, r] : merges) {
            auto li = m.find(l), ri = m.find(r), oi = m.find(l + r);
            if (!li || !ri) throw DataError("merge refers to unknown token: " + l + " " + r);
            if (!oi) throw DataError("merge output not in vocabulary: " + l + r);
            m.add_merge(*li, *ri, *oi);
        }
        return m;
    }

    const std::vector<std::string>& vocab() const { return vocab_; }
    const std::vector<std::pair<TokenId, TokenId>>& merges() const { return merges_; }
    bool byte_fallback() const { return byte_fallback_; }
    std::size_t size() const { return vocab_.size(); }
    const std::string& token(TokenId id) const { return vocab_.at(id); }

    std::optional<TokenId> find(std::string_view piece) const {
        auto it = index_.find(std::string(piece));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    TokenKind kind(TokenId id) const {
        if (id < kNumSpecials) return TokenKind::special;
        if (byte_fallback_ && id < kNumSpecials + kNumBytes) return TokenKind::byte;
        return TokenKind::normal;
    }

    TokenId byte_id(unsigned b) const { return kNumSpecials + static_cast<TokenId>(b & 0xFF); }

    // Encodes with the dummy leading word marker.
    std::vector<TokenId> encode(std::string_view text) const { return encode_piece(text, true); }

    // word_initial=false encodes a word-internal fragment without the marker.
    std::vector<TokenId> encode_piece(std::string_view text, bool word_initial) const {
        std::vector<TokenId> out;
        for (const auto& seg : detail::segment(text, word_initial)) encode_segment(seg, out);
        return out;
    }

    std::size_t count_tokens(std::string_view text) const { return encode(text).size(); }

    std::string decode(std::span<const TokenId> ids) const {
        std::string out;
        for (TokenId id : ids) {
            if (id >= vocab_.size())
                throw DataError("token id " + std::to_string(id) + " out of range (vocabulary size " +
                                std::to_string(vocab_.size()) + ")");
            switch (kind(id)) {
                case TokenKind::special:
                    break;
                case TokenKind::byte:
                    out.push_back(static_cast<char>(id - kNumSpecials));
                    break;
                case TokenKind::normal: {
                    std::string_view piece = vocab_[id];
                    std::size_t pos = 0;
                    while (pos < piece.size()) {
                        if (piece.substr(pos).starts_with(kWordMarker)) {
                            out.push_back(' ');
                            pos += kWordMarker.size();
                        } else {
                            out.push_back(piece[pos++]);
                        }
                    }
                    break;
                }
            }
        }
        if (!out.empty() && out.front() == ' ') out.erase(0, 1);
        return out;
    }

    std::string serialize() const;
    static TokenizerModel parse(std::string_view text);

    void save(const std::filesystem::path& path) const { write_file(path, serialize()); }
    static TokenizerModel load(const std::filesystem::path& path) { return parse(read_file(path)); }

    bool operator==(const TokenizerModel& o) const {
        return byte_fallback_ == o.byte_fallback_ && vocab_ == o.vocab_ && merges_ == o.merges_;
    }

    // Used by the trainer, which grows the model in place.
    TokenId add_token(std::string piece) {
        if (index_.contains(piece)) throw DataError("duplicate vocabulary entry: " + piece);
        const auto id = static_cast<TokenId>(vocab_.size());
        index_.emplace(piece, id);
        vocab_.push_back(std::move(piece));
        return id;
    }

    void add_merge(TokenId left, TokenId right, TokenId result) {
        if (kind(result) != TokenKind::normal) throw DataError("merge may not produce a reserved token");
        const auto key = detail::pair_key(left, right);
        if (merge_rank_.contains(key)) throw DataError("duplicate merge: " + vocab_[left] + " " + vocab_[right]);
        merge_rank_.emplace(key, MergeInfo{static_cast<std::uint32_t>(merges_.size()), result});
        merges_.emplace_back(left, right);
    }

    static TokenizerModel empty(bool byte_fallback) {
        TokenizerModel m;
        m.byte_fallback_ = byte_fallback;
        for (auto sp : kSpecials) m.add_token(std::string(sp));
        if (byte_fallback)
            for (unsigned b = 0; b < kNumBytes; ++b) m.add_token(byte_token_name(b));
        return m;
    }

private:
    struct MergeInfo {
        std::uint32_t rank;
        TokenId result;
    };

    void reindex() {
        index_.clear();
        for (TokenId i = 0; i < vocab_.size(); ++i) {
            if (!index_.emplace(vocab_[i], i).second) throw DataError("duplicate vocabulary entry: " + vocab_[i]);
        }
        const TokenId reserved = kNumSpecials + (byte_fallback_ ? kNumBytes : 0);
        if (vocab_.size() < reserved) throw DataError("vocabulary too small for reserved tokens");
        for (TokenId i = 0; i < kNumSpecials; ++i)
            if (vocab_[i] != kSpecials[i]) throw DataError("special token " + std::string(kSpecials[i]) + " must have id " + std::to_string(i));
        if (byte_fallback_)
            for (unsigned b = 0; b < kNumBytes; ++b)
                if (vocab_[kNumSpecials + b] != byte_token_name(b)) throw DataError("byte tokens out of place");
        for (TokenId i = reserved; i < vocab_.size(); ++i)
            if (vocab_[i].empty() || is_special_name(vocab_[i]) || is_byte_name(vocab_[i]))
                throw DataError("reserved or empty string used as an ordinary token: '" + vocab_[i] + "'");
    }

    void push_fallback(std::string_view bytes, std::vector<TokenId>& ids, std::vector<bool>& mergeable) const {
        if (!byte_fallback_) {
            ids.push_back(kUnk);
            mergeable.push_back(false);
            return;
        }
        for (unsigned char b : bytes) {
            ids.push_back(byte_id(b));
            mergeable.push_back(false);
        }
    }

    void encode_segment(const std::u32string& seg, std::vector<TokenId>& out) const {
        std::vector<TokenId> ids;
        std::vector<bool> mergeable;
        ids.reserve(seg.size());
        for (char32_t cp : seg) {
            if (cp == detail::kRawMarker) {
                push_fallback(kWordMarker, ids, mergeable);
                continue;
            }
            const std::string ch = unicode::encode(cp);
            if (auto id = find(ch)) {
                ids.push_back(*id);
                mergeable.push_back(true);
            } else if (cp == kWordMarkerCp) {
                push_fallback(" ", ids, mergeable);
            } else {
                push_fallback(ch, ids, mergeable);
            }
        }
        while (ids.size() > 1) {
            std::uint32_t best_rank = UINT32_MAX;
            std::size_t best_pos = 0;
            TokenId best_result = 0;
            for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
                if (!mergeable[i] || !mergeable[i + 1]) continue;
                auto it = merge_rank_.find(detail::pair_key(ids[i], ids[i + 1]));
                if (it != merge_rank_.end() && it->second.rank < best_rank) {
                    best_rank = it->second.rank;
                    best_pos = i;
                    best_result = it->second.result;
                }
            }
            if (best_rank == UINT32_MAX) break;
            ids[best_pos] = best_result;
            ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(best_pos) + 1);
            mergeable.erase(mergeable.begin() + static_cast<std::ptrdiff_t>(best_pos) + 1);
        }
        out.insert(out.end(), ids.begin(), ids.end());
    }

    std::vector<std::string> vocab_;
    std::unordered_map<std::string, TokenId> index_;
    std::vector<std::pair<TokenId, TokenId>> merges_;
    std::unordered_map<std::uint64_t, MergeInfo> merge_rank_;
    bool byte_fallback_ = true;
};

// ---------------------------------------------------------------------------
// Model file

namespace detail {

inline std::string escape(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto c = static_cast<unsigned char>(s[i]);
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            case ' ': out += "\\s"; break;
            default:
                if (c < 0x20 || c == 0x7F) {
                    out += "\\x";
                    out += "0123456789abcdef"[c >> 4];
                    out += "0123456789abcdef"[c & 0xF];
                } else if (i == 0 && (c == '[' || c == '#')) {
                    out += '\\';
                    out += static_cast<char>(c);
                } else {
                    out += static_cast<char>(c);
                }
        }
    }
    return out;
}

inline std::string unescape(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\') {
            out += s[i];
            continue;
        }
        if (++i >= s.size()) throw DataError("dangling escape in model file");
        switch (s[i]) {
            case '\\': out += '\\'; break;
            case 'n': out += '\n'; break;
            case 'r': out += '\r'; break;
            case 't': out += '\t'; break;
            case 's': out += ' '; break;
            case '[': out += '['; break;
            case '#': out += '#'; break;
            case 'x': {
                auto nib = [](char c) -> int {
                    if (c >= '0' && c <= '9') return c - '0';
                    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
                    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
                    throw DataError("bad \\x escape");
                };
                if (i + 2 >= s.size()) throw DataError("bad \\x escape");
                out += static_cast<char>(nib(s[i + 1]) * 16 + nib(s[i + 2]));
                i += 2;
                break;
            }
            default: throw DataError("unknown escape in model file");
        }
    }
    return out;
}

}  // namespace detail

inline constexpr std::string_view kModelMagic = "#vocadapt-bpe 1";

inline std::string TokenizerModel::serialize() const {
    std::string out;
    out += kModelMagic;
    out += "\n[meta]\nbyte_fallback = ";
    out += byte_fallback_ ? "true" : "false";
    out += "\n[vocab]\n";
    for (const auto& t : vocab_) {
        out += detail::escape(t);
        out += '\n';
    }
    out += "[merges]\n";
    for (const auto& [l, r] : merges_) {
        out += detail::escape(vocab_[l]);
        out += ' ';
        out += detail::escape(vocab_[r]);
        out += '\n';
    }
    return out;
}

inline TokenizerModel TokenizerModel::parse(std::string_view text) {
    enum class Section { none, meta, vocab, merges } section = Section::none;
    bool byte_fallback = true;
    std::vector<std::string> vocab;
    std::vector<std::pair<std::string, std::string>> merges;
    std::size_t pos = 0, line_no = 0;
    bool saw_vocab = false;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.empty()) continue;
        if (line.front() == '#') continue;
        if (line == "[meta]") { section = Section::meta; continue; }
        if (line == "[vocab]") { section = Section::vocab; saw_vocab = true; continue; }
        if (line == "[merges]") { section = Section::merges; continue; }
        const auto where = "model line " + std::to_string(line_no);
        switch (section) {
            case Section::none: throw DataError(where + ": content outside a section");
            case Section::meta: {
                const auto eq = line.find(" = ");
                if (eq == std::string_view::npos) throw DataError(where + ": expected key = value");
                const auto key = line.substr(0, eq), value = line.substr(eq + 3);
                if (key != "byte_fallback" || (value != "true" && value != "false"))
                    throw DataError(where + ": unknown meta entry");
                byte_fallback = value == "true";
                break;
            }
            case Section::vocab: vocab.push_back(detail::unescape(line)); break;
            case Section::merges: {
                const auto sp = line.find(' ');
                if (sp == std::string_view::npos || line.find(' ', sp + 1) != std::string_view::npos)
                    throw DataError(where + ": merge needs exactly two tokens");
                merges.emplace_back(detail::unescape(line.substr(0, sp)), detail::unescape(line.substr(sp + 1)));
                break;
            }
        }
    }
    if (!saw_vocab) throw DataError("model file has no [vocab] section");
    return from_parts(std::move(vocab), merges, byte_fallback);
}

inline bool is_merge_prefix(const TokenizerModel& shorter, const TokenizerModel& longer) {
    const auto& a = shorter.merges();
    const auto& b = longer.merges();
    if (a.size() > b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (shorter.token(a[i].first) != longer.token(b[i].first) ||
            shorter.token(a[i].second) != longer.token(b[i].second))
            return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Training

namespace detail {

inline std::map<std::u32string, std::uint64_t> count_segments(std::span<const std::string_view> corpus,
                                                              const BpeTrainConfig& cfg) {
    const unsigned workers = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(corpus.size())));
    std::vector<std::unordered_map<std::u32string, std::uint64_t>> partial(workers);
    const std::size_t block = (corpus.size() + workers - 1) / workers;
    parallel_for(workers, workers, [&](std::size_t w) {
        const std::size_t end = std::min(corpus.size(), (w + 1) * block);
        for (std::size_t i = w * block; i < end; ++i) {
            const std::string text = cfg.normalize_nfc ? unicode::nfc(corpus[i]) : std::string(corpus[i]);
            for (auto& seg : segment(text, true)) ++partial[w][std::move(seg)];
        }
    });
    std::map<std::u32string, std::uint64_t> merged;
    for (auto& p : partial)
        for (auto& [k, v] : p) merged[k] += v;
    return merged;
}

class PairQueue {
public:
    explicit PairQueue(const TokenizerModel& model) : model_(model) {}

    void add(std::uint64_t key, std::int64_t delta) {
        if (delta == 0) return;
        auto& count = counts_[key];
        if (count > 0 && !banned_.contains(key)) queue_.erase(Entry{count, merged(key), key});
        count += delta;
        if (count > 0 && !banned_.contains(key)) queue_.insert(Entry{count, merged(key), key});
    }

    void ban(std::uint64_t key) {
        auto it = counts_.find(key);
        if (it != counts_.end() && it->second > 0) queue_.erase(Entry{it->second, merged(key), key});
        banned_.insert(key);
    }

    struct Entry {
        std::int64_t count;
        std::string merged;
        std::uint64_t key;

        bool operator<(const Entry& o) const {
            if (count != o.count) return count > o.count;
            if (merged != o.merged) return merged < o.merged;
            return key < o.key;
        }
    };

    const Entry* best() const { return queue_.empty() ? nullptr : &*queue_.begin(); }

private:
    std::string merged(std::uint64_t key) const {
        return model_.token(static_cast<TokenId>(key >> 32)) + model_.token(static_cast<TokenId>(key & 0xFFFFFFFFu));
    }

    const TokenizerModel& model_;
    std::unordered_map<std::uint64_t, std::int64_t> counts_;
    std::unordered_set<std::uint64_t> banned_;
    std::set<Entry> queue_;
};

}  // namespace detail

// Greedy BPE: repeatedly merges the most frequent adjacent pair (ties go to
// the lexicographically smallest merged string) until the vocabulary reaches
// cfg.vocab_size or no pair occurs at least twice.
template <std::ranges::input_range Corpus>
    requires std::convertible_to<std::ranges::range_reference_t<Corpus>, std::string_view>
TokenizerModel train_bpe(const Corpus& corpus, const BpeTrainConfig& cfg) {
    cfg.validate();
    std::vector<std::string_view> texts;
    for (const auto& t : corpus) texts.emplace_back(t);
    if (texts.empty()) throw DataError("train_bpe: empty corpus");
    for (auto t : texts) unicode::require_utf8(t, "training text");

    const auto segments = detail::count_segments(texts, cfg);

    // Base alphabet by descending frequency, then code point.
    std::map<char32_t, std::uint64_t> char_freq;
    std::uint64_t total_chars = 0;
    for (const auto& [seg, f] : segments)
        for (char32_t cp : seg)
            if (cp != detail::kRawMarker) {
                char_freq[cp] += f;
                total_chars += f;
            }
    std::vector<std::pair<char32_t, std::uint64_t>> chars(char_freq.begin(), char_freq.end());
    std::stable_sort(chars.begin(), chars.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::size_t keep = chars.size();
    if (cfg.character_coverage < 1.0) {
        std::uint64_t covered = 0;
        keep = 0;
        while (keep < chars.size() &&
               static_cast<double>(covered) < cfg.character_coverage * static_cast<double>(total_chars)) {
            covered += chars[keep++].second;
        }
    }

    TokenizerModel model = TokenizerModel::empty(cfg.byte_fallback);
    const std::size_t base = model.size() + keep;
    if (cfg.vocab_size < base)
        throw ConfigError("vocab_size " + std::to_string(cfg.vocab_size) + " is smaller than specials + bytes + alphabet (" +
                          std::to_string(base) + ")");
    std::unordered_map<char32_t, TokenId> char_id;
    for (std::size_t i = 0; i < keep; ++i) char_id[chars[i].first] = model.add_token(unicode::encode(chars[i].first));

    constexpr TokenId kBreak = UINT32_MAX;
    struct Word {
        std::vector<TokenId> syms;
        std::int64_t freq;
    };
    std::vector<Word> words;
    words.reserve(segments.size());
    for (const auto& [seg, f] : segments) {
        Word w{{}, static_cast<std::int64_t>(f)};
        for (char32_t cp : seg) {
            auto it = char_id.find(cp);
            w.syms.push_back(it == char_id.end() ? kBreak : it->second);
        }
        words.push_back(std::move(w));
    }

    detail::PairQueue queue(model);
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> where;
    auto for_pairs = [&](const Word& w, auto&& fn) {
        for (std::size_t i = 0; i + 1 < w.syms.size(); ++i)
            if (w.syms[i] != kBreak && w.syms[i + 1] != kBreak) fn(detail::pair_key(w.syms[i], w.syms[i + 1]));
    };
    {
        std::unordered_map<std::uint64_t, std::int64_t> initial;
        for (std::uint32_t wi = 0; wi < words.size(); ++wi)
            for_pairs(words[wi], [&](std::uint64_t k) {
                initial[k] += words[wi].freq;
                auto& list = where[k];
                if (list.empty() || list.back() != wi) list.push_back(wi);
            });
        for (const auto& [k, c] : initial) queue.add(k, c);
    }

    while (model.size() < cfg.vocab_size) {
        const auto* top = queue.best();
        if (!top || top->count < 2) break;
        const std::uint64_t key = top->key;
        const std::string merged = top->merged;
        if (is_special_name(merged) || is_byte_name(merged)) {
            queue.ban(key);
            continue;
        }
        const auto left = static_cast<TokenId>(key >> 32);
        const auto right = static_cast<TokenId>(key & 0xFFFFFFFFu);
        const auto existing = model.find(merged);
        const TokenId result = existing ? *existing : model.add_token(merged);
        model.add_merge(left, right, result);

        std::vector<std::uint32_t> affected = std::move(where[key]);
        where.erase(key);
        std::sort(affected.begin(), affected.end());
        affected.erase(std::unique(affected.begin(), affected.end()), affected.end());
        for (std::uint32_t wi : affected) {
            Word& w = words[wi];
            bool present = false;
            for (std::size_t i = 0; i + 1 < w.syms.size(); ++i)
                if (w.syms[i] == left && w.syms[i + 1] == right) present = true;
            if (!present) continue;
            for_pairs(w, [&](std::uint64_t k) { queue.add(k, -w.freq); });
            std::vector<TokenId> next;
            next.reserve(w.syms.size());
            for (std::size_t i = 0; i < w.syms.size(); ++i) {
                if (i + 1 < w.syms.size() && w.syms[i] == left && w.syms[i + 1] == right) {
                    next.push_back(result);
                    ++i;
                } else {
                    next.push_back(w.syms[i]);
                }
            }
            w.syms = std::move(next);
            for_pairs(w, [&](std::uint64_t k) {
                queue.add(k, w.freq);
                auto& list = where[k];
                if (list.empty() || list.back() != wi) list.push_back(wi);
            });
        }
    }
    return model;
}

}  // namespace vocadapt::bpe
