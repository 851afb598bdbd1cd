#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "vocadapt/error.hpp"
#include "vocadapt/hash.hpp"

#ifndef VOCADAPT_VERSION
#define VOCADAPT_VERSION "0.0.0"
#endif

namespace vocadapt {

inline constexpr std::string_view kVersion = VOCADAPT_VERSION;

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("short write to " + path.string());
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Digest of a file, or of every regular file below a directory (sorted by
// relative path, path bytes included).
inline std::string digest_path(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::recursive_directory_iterator(path))
            if (e.is_regular_file()) files.push_back(fs::relative(e.path(), path));
        std::sort(files.begin(), files.end());
        std::uint64_t h = kFnvOffset;
        for (const auto& f : files) {
            h = fnv1a64(f.generic_string(), h);
            h = fnv1a64(read_file(path / f), h);
        }
        return "fnv1a64:" + hex64(h);
    }
    return "fnv1a64:" + hex64(fnv1a64(read_file(path)));
}

inline std::string format_double(double v) {
    // shortest form that reads back to the same value
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

// Ordered `key = value` lines.
class KeyValueReport {
public:
    void add(std::string key, std::string value) { lines_.emplace_back(std::move(key), std::move(value)); }
    void add(std::string key, const char* value) { add(std::move(key), std::string(value)); }
    void add(std::string key, double value) { add(std::move(key), format_double(value)); }
    template <typename Int>
        requires std::is_integral_v<Int>
    void add(std::string key, Int value) {
        if constexpr (std::is_same_v<Int, bool>)
            add(std::move(key), std::string(value ? "true" : "false"));
        else
            add(std::move(key), std::to_string(value));
    }

    std::string str() const {
        std::ostringstream out;
        for (const auto& [k, v] : lines_) out << k << " = " << v << '\n';
        return out.str();
    }

    void write(const std::filesystem::path& path) const { write_file(path, str()); }

    const std::vector<std::pair<std::string, std::string>>& lines() const { return lines_; }

private:
    std::vector<std::pair<std::string, std::string>> lines_;
};

}  // namespace vocadapt
