#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <cstdint>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "vocadapt/error.hpp"

namespace vocadapt::unicode {

// One decoded scalar value and where it sits in the source buffer.
struct Utf8Char {
    std::size_t offset;
    std::size_t length;
    char32_t cp;
};

// Visits every code point. Returns false (and stops) at the first invalid
// sequence.
template <typename Fn>
bool for_each_char(std::string_view text, Fn&& fn) {
    const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
    const auto n = static_cast<std::int32_t>(text.size());
    std::int32_t i = 0;
    while (i < n) {
        const std::int32_t start = i;
        UChar32 c;
        U8_NEXT(s, i, n, c);
        if (c < 0) return false;
        fn(Utf8Char{static_cast<std::size_t>(start), static_cast<std::size_t>(i - start),
                    static_cast<char32_t>(c)});
    }
    return true;
}

inline bool is_valid_utf8(std::string_view text) {
    return for_each_char(text, [](const Utf8Char&) {});
}

inline void require_utf8(std::string_view text, std::string_view what = "text") {
    if (!is_valid_utf8(text)) throw DataError(std::string(what) + " is not valid UTF-8");
}

inline std::u32string decode(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    if (!for_each_char(text, [&](const Utf8Char& c) { out.push_back(c.cp); }))
        throw DataError("invalid UTF-8 sequence");
    return out;
}

inline void append(std::string& out, char32_t cp) {
    std::uint8_t buf[4];
    std::int32_t len = 0;
    UBool err = false;
    U8_APPEND(buf, len, 4, static_cast<UChar32>(cp), err);
    if (err) throw DataError("code point outside the Unicode range");
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(len));
}

inline std::string encode(char32_t cp) {
    std::string out;
    append(out, cp);
    return out;
}

inline std::string encode(std::u32string_view cps) {
    std::string out;
    out.reserve(cps.size() * 2);
    for (char32_t cp : cps) append(out, cp);
    return out;
}

inline std::size_t length(std::string_view text) {
    std::size_t n = 0;
    for_each_char(text, [&](const Utf8Char&) { ++n; });
    return n;
}

// General category L*.
inline bool is_letter(char32_t cp) { return u_isalpha(static_cast<UChar32>(cp)); }

inline bool is_space(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)); }

inline char32_t to_lower(char32_t cp) {
    return static_cast<char32_t>(u_tolower(static_cast<UChar32>(cp)));
}

inline std::string lowercase(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    if (!for_each_char(text, [&](const Utf8Char& c) { append(out, to_lower(c.cp)); }))
        throw DataError("invalid UTF-8 sequence");
    return out;
}

inline std::string nfc(std::string_view text) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw DataError("ICU NFC normalizer unavailable");
    const auto src = icu::UnicodeString::fromUTF8(
        icu::StringPiece(text.data(), static_cast<std::int32_t>(text.size())));
    if (norm->isNormalized(src, status) && U_SUCCESS(status)) return std::string(text);
    status = U_ZERO_ERROR;
    icu::UnicodeString dst = norm->normalize(src, status);
    if (U_FAILURE(status)) throw DataError("NFC normalization failed");
    std::string out;
    dst.toUTF8String(out);
    return out;
}

// Splits on Unicode whitespace; empty fields are dropped.
inline std::vector<std::string_view> split_whitespace(std::string_view text) {
    std::vector<std::string_view> words;
    std::size_t start = std::string_view::npos;
    const bool ok = for_each_char(text, [&](const Utf8Char& c) {
        if (is_space(c.cp)) {
            if (start != std::string_view::npos) {
                words.push_back(text.substr(start, c.offset - start));
                start = std::string_view::npos;
            }
        } else if (start == std::string_view::npos) {
            start = c.offset;
        }
    });
    if (!ok) throw DataError("invalid UTF-8 sequence");
    if (start != std::string_view::npos) words.push_back(text.substr(start));
    return words;
}

}  // namespace vocadapt::unicode
