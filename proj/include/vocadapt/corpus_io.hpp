#pragma once

// Directory-level corpus storage. A directory holds either plain files (one
// document each, id = file name) or `.jsonl` files with one
// {"id", "source", "text"} record per line. Files are visited in sorted name
// order so every run sees the same document order.

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "vocadapt/corpus.hpp"
#include "vocadapt/report.hpp"

namespace vocadapt::corpus {

struct CorpusFile {
    std::string name;
    bool records = false;
    std::vector<Document> docs;
};

inline bool is_record_file(const std::filesystem::path& p) { return p.extension() == ".jsonl"; }

inline CorpusFile load_corpus_file(const std::filesystem::path& path, const std::string& label) {
    CorpusFile file;
    file.name = path.filename().string();
    file.records = is_record_file(path);
    const std::string bytes = read_file(path);
    if (!file.records) {
        unicode::require_utf8(bytes, path.string());
        file.docs.push_back({file.name, bytes, label});
        return file;
    }
    std::size_t pos = 0, line_no = 0;
    while (pos < bytes.size()) {
        std::size_t nl = bytes.find('\n', pos);
        if (nl == std::string::npos) nl = bytes.size();
        const std::string_view line(bytes.data() + pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!rec.is_object() || !rec.contains("text") || !rec["text"].is_string())
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": record needs a string 'text'");
        Document d;
        d.id = rec.value("id", file.name + ":" + std::to_string(line_no));
        d.source = rec.value("source", label);
        d.text = rec["text"].get<std::string>();
        file.docs.push_back(std::move(d));
    }
    return file;
}

inline std::vector<CorpusFile> load_corpus(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
    std::vector<fs::path> paths;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename().string().front() != '.') paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    const std::string label = fs::absolute(dir).lexically_normal().filename().string();
    std::vector<CorpusFile> files;
    for (const auto& p : paths) files.push_back(load_corpus_file(p, label));
    return files;
}

inline std::vector<Document> flatten(const std::vector<CorpusFile>& files) {
    std::vector<Document> docs;
    for (const auto& f : files) docs.insert(docs.end(), f.docs.begin(), f.docs.end());
    return docs;
}

// Splits processed documents back into their files. `source_index` maps each
// processed document to its position in flatten(files).
inline std::vector<CorpusFile> regroup(const std::vector<CorpusFile>& files,
                                       const std::vector<Document>& docs,
                                       const std::vector<std::size_t>& source_index) {
    std::vector<CorpusFile> out;
    std::vector<std::size_t> file_of;
    for (std::size_t f = 0; f < files.size(); ++f) {
        out.push_back({files[f].name, files[f].records, {}});
        file_of.insert(file_of.end(), files[f].docs.size(), f);
    }
    for (std::size_t i = 0; i < docs.size(); ++i) out[file_of.at(source_index.at(i))].docs.push_back(docs[i]);
    return out;
}

inline void write_corpus(const std::filesystem::path& dir, const std::vector<CorpusFile>& files) {
    std::filesystem::create_directories(dir);
    for (const auto& f : files) {
        if (!f.records) {
            if (!f.docs.empty()) write_file(dir / f.name, f.docs.front().text);
            continue;
        }
        std::string bytes;
        for (const auto& d : f.docs) {
            nlohmann::ordered_json rec;
            rec["id"] = d.id;
            rec["source"] = d.source;
            rec["text"] = d.text;
            bytes += rec.dump();
            bytes += '\n';
        }
        write_file(dir / f.name, bytes);
    }
}

}  // namespace vocadapt::corpus
