#pragma once

// Dense token-by-dimension matrices and their on-disk formats.
//
// word2vec text: a "rows dim" header followed by "token v1 ... vd" lines.
// WVEC binary:   "WVEC", uint32 rows, uint32 dim (little-endian), then
//                rows*dim little-endian float32 values; tokens live in a
//                sidecar file next to it (one escaped token per line, row
//                order).

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vocadapt/bpe.hpp"
#include "vocadapt/error.hpp"
#include "vocadapt/report.hpp"

namespace vocadapt {

class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;
    EmbeddingMatrix(std::vector<std::string> vocab, std::size_t dim)
        : vocab_(std::move(vocab)), dim_(dim), data_(vocab_.size() * dim, 0.0f) {}
    EmbeddingMatrix(std::vector<std::string> vocab, std::size_t dim, std::vector<float> data)
        : vocab_(std::move(vocab)), dim_(dim), data_(std::move(data)) {
        if (data_.size() != vocab_.size() * dim_) throw DataError("matrix data does not match rows x dim");
    }

    std::size_t rows() const { return vocab_.size(); }
    std::size_t dim() const { return dim_; }
    const std::vector<std::string>& vocab() const { return vocab_; }
    const std::vector<float>& data() const { return data_; }

    std::span<float> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
    std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

    bool all_finite() const {
        for (float v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const EmbeddingMatrix&) const = default;

private:
    std::vector<std::string> vocab_;
    std::size_t dim_ = 0;
    std::vector<float> data_;
};

// Token -> vector lookup over an EmbeddingMatrix with unique tokens.
class WordVectorTable {
public:
    WordVectorTable() = default;
    explicit WordVectorTable(EmbeddingMatrix m) : matrix_(std::move(m)) {
        for (std::size_t i = 0; i < matrix_.rows(); ++i)
            if (!index_.emplace(matrix_.vocab()[i], i).second)
                throw DataError("duplicate token in vector table: " + matrix_.vocab()[i]);
    }

    std::size_t dim() const { return matrix_.dim(); }
    std::size_t size() const { return matrix_.rows(); }
    const EmbeddingMatrix& matrix() const { return matrix_; }

    std::optional<std::span<const float>> find(const std::string& token) const {
        auto it = index_.find(token);
        if (it == index_.end()) return std::nullopt;
        return matrix_.row(it->second);
    }

private:
    EmbeddingMatrix matrix_;
    std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// I/O

inline std::string format_float(float v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

inline EmbeddingMatrix parse_word2vec_text(std::string_view text, const std::string& where = "vectors") {
    std::size_t pos = 0, line_no = 0;
    auto next_line = [&]() -> std::optional<std::string_view> {
        while (pos < text.size()) {
            std::size_t nl = text.find('\n', pos);
            if (nl == std::string_view::npos) nl = text.size();
            std::string_view line = text.substr(pos, nl - pos);
            pos = nl + 1;
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            if (line.find_first_not_of(' ') != std::string_view::npos) return line;
        }
        return std::nullopt;
    };
    auto fields = [](std::string_view line) {
        std::vector<std::string_view> out;
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
            std::size_t j = i;
            while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
            if (j > i) out.push_back(line.substr(i, j - i));
            i = j;
        }
        return out;
    };
    auto parse_size = [&](std::string_view s) {
        std::size_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size()) throw DataError(where + ": malformed header");
        return v;
    };
    const auto header = next_line();
    if (!header) throw DataError(where + ": missing header");
    const auto hf = fields(*header);
    if (hf.size() != 2) throw DataError(where + ": malformed header (expected 'rows dim')");
    const std::size_t rows = parse_size(hf[0]), dim = parse_size(hf[1]);
    if (dim == 0) throw DataError(where + ": dimension must be positive");

    std::vector<std::string> vocab;
    std::vector<float> values;
    vocab.reserve(rows);
    values.reserve(rows * dim);
    while (auto line = next_line()) {
        const auto f = fields(*line);
        if (f.size() != dim + 1)
            throw DataError(where + ":" + std::to_string(line_no) + ": dimension mismatch (expected " +
                            std::to_string(dim) + " values, found " + std::to_string(f.size() - 1) + ")");
        vocab.emplace_back(f[0]);
        for (std::size_t k = 1; k <= dim; ++k) {
            float v = 0;
            auto [p, ec] = std::from_chars(f[k].data(), f[k].data() + f[k].size(), v);
            if (ec != std::errc{} || p != f[k].data() + f[k].size())
                throw DataError(where + ":" + std::to_string(line_no) + ": bad number '" + std::string(f[k]) + "'");
            values.push_back(v);
        }
    }
    if (vocab.size() != rows)
        throw DataError(where + ": header declares " + std::to_string(rows) + " rows, found " +
                        std::to_string(vocab.size()));
    return EmbeddingMatrix(std::move(vocab), dim, std::move(values));
}

inline std::string format_word2vec_text(const EmbeddingMatrix& m) {
    std::string out = std::to_string(m.rows()) + " " + std::to_string(m.dim()) + "\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out += m.vocab()[i];
        for (float v : m.row(i)) {
            out += ' ';
            out += format_float(v);
        }
        out += '\n';
    }
    return out;
}

inline constexpr std::string_view kWvecMagic = "WVEC";

inline std::filesystem::path sidecar_vocab_path(const std::filesystem::path& p) {
    return std::filesystem::path(p.string() + ".vocab");
}

inline std::string format_vocab_list(const std::vector<std::string>& vocab) {
    std::string out;
    for (const auto& t : vocab) {
        out += bpe::detail::escape(t);
        out += '\n';
    }
    return out;
}

inline std::vector<std::string> parse_vocab_list(std::string_view text) {
    std::vector<std::string> vocab;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.empty()) continue;
        vocab.push_back(bpe::detail::unescape(line));
    }
    return vocab;
}

namespace detail {
inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline std::uint32_t get_u32(std::string_view in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    return v;
}
}  // namespace detail

inline std::string format_wvec(const EmbeddingMatrix& m) {
    std::string out(kWvecMagic);
    detail::put_u32(out, static_cast<std::uint32_t>(m.rows()));
    detail::put_u32(out, static_cast<std::uint32_t>(m.dim()));
    out.reserve(out.size() + m.data().size() * 4);
    for (float v : m.data()) detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

inline EmbeddingMatrix parse_wvec(std::string_view bytes, std::vector<std::string> vocab,
                                  const std::string& where = "wvec") {
    if (bytes.size() < 12 || bytes.substr(0, 4) != kWvecMagic) throw DataError(where + ": missing WVEC magic");
    const std::size_t rows = detail::get_u32(bytes, 4), dim = detail::get_u32(bytes, 8);
    if (bytes.size() != 12 + rows * dim * 4)
        throw DataError(where + ": payload size does not match " + std::to_string(rows) + "x" + std::to_string(dim));
    if (vocab.size() != rows)
        throw DataError(where + ": sidecar vocabulary has " + std::to_string(vocab.size()) + " tokens, matrix has " +
                        std::to_string(rows) + " rows");
    EmbeddingMatrix m(std::move(vocab), dim);
    for (std::size_t i = 0; i < rows; ++i) {
        auto r = m.row(i);
        for (std::size_t k = 0; k < dim; ++k) r[k] = std::bit_cast<float>(detail::get_u32(bytes, 12 + (i * dim + k) * 4));
    }
    return m;
}

inline void write_wvec(const std::filesystem::path& path, const EmbeddingMatrix& m) {
    write_file(path, format_wvec(m));
    write_file(sidecar_vocab_path(path), format_vocab_list(m.vocab()));
}

inline EmbeddingMatrix read_wvec(const std::filesystem::path& path) {
    return parse_wvec(read_file(path), parse_vocab_list(read_file(sidecar_vocab_path(path))), path.string());
}

// Reads either format, chosen by the WVEC magic.
inline EmbeddingMatrix read_matrix(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    if (bytes.starts_with(kWvecMagic))
        return parse_wvec(bytes, parse_vocab_list(read_file(sidecar_vocab_path(path))), path.string());
    return parse_word2vec_text(bytes, path.string());
}

inline WordVectorTable load_word_vectors(const std::filesystem::path& path) {
    return WordVectorTable(read_matrix(path));
}

// A vocabulary file is either a tokenizer model or an escaped token list.
inline std::vector<std::string> load_vocab(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    if (text.starts_with(bpe::kModelMagic) || text.starts_with("[vocab]"))
        return bpe::TokenizerModel::parse(text).vocab();
    return parse_vocab_list(text);
}

}  // namespace vocadapt
