#pragma once

#include <atomic>
#include <map>
#include <mutex>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "vocadapt.hpp"

namespace testing_support {

namespace fs = std::filesystem;

inline fs::path fixtures() { return fs::path(VOCADAPT_FIXTURES); }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "t") {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("vocadapt-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "vocadapt");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return vocadapt::cli::run(static_cast<int>(argv.size()), argv.data());
}

// Value of `key` in a key = value report, or "" when absent.
inline std::string report_value(const fs::path& report, const std::string& key) {
    const std::string text = vocadapt::read_file(report);
    const std::string needle = key + " = ";
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        const std::string line = text.substr(pos, nl - pos);
        if (line.rfind(needle, 0) == 0) return line.substr(needle.size());
        pos = nl + 1;
    }
    return "";
}

}  // namespace testing_support

namespace testing_support {

inline std::vector<std::string> fixture_texts(const std::string& dir) {
    std::vector<std::string> out;
    for (const auto& d : vocadapt::corpus::flatten(vocadapt::corpus::load_corpus(fixtures() / dir))) out.push_back(d.text);
    return out;
}

// Tokenizers trained on the Slovene fixture, shared across tests.
inline const vocadapt::bpe::TokenizerModel& fixture_tokenizer(std::size_t vocab_size) {
    static std::map<std::size_t, vocadapt::bpe::TokenizerModel> cache;
    static std::mutex mu;
    std::lock_guard lock(mu);
    auto it = cache.find(vocab_size);
    if (it == cache.end()) {
        vocadapt::bpe::BpeTrainConfig cfg;
        cfg.vocab_size = vocab_size;
        cfg.threads = 4;
        it = cache.emplace(vocab_size, vocadapt::bpe::train_bpe(fixture_texts("corpus_sl"), cfg)).first;
    }
    return it->second;
}

}  // namespace testing_support
