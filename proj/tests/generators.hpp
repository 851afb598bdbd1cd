#pragma once

// Random and planted inputs shared by the unit tests and the acceptance runner.

#include <random>
#include <string>
#include <vector>

#include "vocadapt.hpp"

namespace testing_support {

using vocadapt::bounded;
using vocadapt::corpus::Document;

// Random strings over a mixed-script alphabet, including characters no
// training corpus contains.
inline std::string fuzz_string(std::mt19937_64& rng) {
    static const std::vector<std::string> alphabet = {
        "a", "e", "k", "o", "r", "s", "t", "č", "š", "ž", "Č", " ", " ", "  ", "\t", "\n", "\r\n", ".", ",", "?",
        "▁", "\\", "#", "[", "]", "ж", "щ", "Ω", "λ", "東", "京", "한", "ع", "א", "🐸", "👍🏽", "\x01", "\x7f",
        "e\xCC\x81", "ﬁ", "\xEF\xBB\xBF", "0", "9", "<s>", "<0x41>"};
    std::string s;
    const auto len = bounded(rng, 40);
    for (std::uint64_t i = 0; i < len; ++i) s += alphabet[bounded(rng, alphabet.size())];
    return s;
}

inline std::string tokens(const std::string& prefix, std::size_t from, std::size_t to) {
    std::string s;
    for (std::size_t i = from; i < to; ++i) {
        if (!s.empty()) s += ' ';
        s += prefix + std::to_string(i);
    }
    return s;
}

inline std::vector<Document> docs_of(const std::vector<std::string>& texts) {
    std::vector<Document> d;
    for (std::size_t i = 0; i < texts.size(); ++i) d.push_back({"d" + std::to_string(i), texts[i], "test"});
    return d;
}

// Units built from a small vocabulary with copied stretches, so overlaps of
// every size occur.
inline std::vector<std::string> random_units(std::mt19937_64& rng, std::size_t count) {
    std::vector<std::vector<std::string>> made;
    std::vector<std::string> out;
    for (std::size_t u = 0; u < count; ++u) {
        std::vector<std::string> toks;
        const auto len = 5 + bounded(rng, 196);
        while (toks.size() < len) {
            if (!made.empty() && bounded(rng, 3) == 0) {
                const auto& src = made[bounded(rng, made.size())];
                const auto from = bounded(rng, src.size());
                const auto n = std::min<std::uint64_t>(src.size() - from, 1 + bounded(rng, 40));
                toks.insert(toks.end(), src.begin() + from, src.begin() + from + n);
            } else {
                toks.push_back("t" + std::to_string(bounded(rng, 30)));
            }
        }
        toks.resize(len);
        made.push_back(toks);
        std::string s;
        for (const auto& t : toks) s += (s.empty() ? "" : " ") + t;
        out.push_back(s);
    }
    return out;
}

}  // namespace testing_support
