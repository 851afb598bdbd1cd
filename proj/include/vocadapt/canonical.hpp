#pragma once

// Tokenizers mark word-initial pieces differently (SentencePiece uses U+2581,
// GPT-2 style byte-level BPE uses U+0120). Vocabularies are compared after
// mapping each tokenizer's marker onto one canonical marker, U+2423.

#include <string>
#include <string_view>

#include "vocadapt/bpe.hpp"

namespace vocadapt {

inline constexpr std::string_view kCanonicalMarker = "\xE2\x90\xA3";  // U+2423

struct MarkerScheme {
    // Prefix that marks a word-initial piece; empty for vocabularies without
    // one (plain word lists).
    std::string marker = std::string(bpe::kWordMarker);

    static MarkerScheme sentencepiece() { return {std::string(bpe::kWordMarker)}; }
    static MarkerScheme gpt2() { return {"\xC4\xA0"}; }  // U+0120
    static MarkerScheme none() { return {""}; }

    std::string describe() const { return marker.empty() ? "none" : "'" + marker + "'"; }
};

// Resolves a scheme name ("sentencepiece", "gpt2", "none") or a literal
// marker string.
inline MarkerScheme parse_marker_scheme(std::string_view name) {
    if (name == "sentencepiece" || name == "sp") return MarkerScheme::sentencepiece();
    if (name == "gpt2" || name == "bytelevel") return MarkerScheme::gpt2();
    if (name == "none" || name.empty()) return MarkerScheme::none();
    return {std::string(name)};
}

// Tokens already carrying the canonical marker are left alone, which makes
// the mapping idempotent. It is injective as long as a vocabulary does not
// contain both "<marker>w" and "<canonical>w".
inline std::string canonicalize_token(std::string_view token, const MarkerScheme& scheme) {
    if (token.starts_with(kCanonicalMarker)) return std::string(token);
    if (!scheme.marker.empty() && token.starts_with(scheme.marker))
        return std::string(kCanonicalMarker) + std::string(token.substr(scheme.marker.size()));
    return std::string(token);
}

inline bool is_word_initial(std::string_view canonical) { return canonical.starts_with(kCanonicalMarker); }

inline std::string_view strip_canonical_marker(std::string_view canonical) {
    if (canonical.starts_with(kCanonicalMarker)) canonical.remove_prefix(kCanonicalMarker.size());
    return canonical;
}

inline bool is_special_token(std::string_view token) { return bpe::is_special_name(token); }

}  // namespace vocadapt
