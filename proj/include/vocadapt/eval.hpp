#pragma once

// Evaluation arithmetic for few-shot generative evaluation: SARI, invalid
// prediction rate, accuracy with a normal-approximation interval, F1 with a
// quantile-bootstrap interval, and per-instance few-shot example sampling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "vocadapt/error.hpp"
#include "vocadapt/hash.hpp"
#include "vocadapt/parallel.hpp"
#include "vocadapt/unicode.hpp"

namespace vocadapt::eval {

// ---------------------------------------------------------------------------
// SARI

struct SariConfig {
    std::vector<std::size_t> orders = {4};
};

struct SariBreakdown {
    double f1_add = 0.0;
    double f1_keep = 0.0;
    double p_del = 0.0;
    double sari = 0.0;
};

namespace detail {

using Bag = std::map<std::string, std::int64_t>;

inline Bag ngrams(const std::vector<std::string_view>& tokens, std::size_t n) {
    Bag bag;
    if (n == 0 || tokens.size() < n) return bag;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key;
        for (std::size_t j = i; j < i + n; ++j) {
            if (j > i) key += '\x1f';
            key.append(tokens[j]);
        }
        ++bag[key];
    }
    return bag;
}

inline std::int64_t total(const Bag& b) {
    std::int64_t s = 0;
    for (const auto& [k, v] : b) s += v;
    return s;
}

inline Bag minus(const Bag& a, const Bag& b) {
    Bag out;
    for (const auto& [k, v] : a) {
        auto it = b.find(k);
        const std::int64_t r = v - (it == b.end() ? 0 : it->second);
        if (r > 0) out[k] = r;
    }
    return out;
}

inline Bag intersect(const Bag& a, const Bag& b) {
    Bag out;
    for (const auto& [k, v] : a) {
        auto it = b.find(k);
        if (it != b.end()) out[k] = std::min(v, it->second);
    }
    return out;
}

inline Bag union_max(const Bag& a, const Bag& b) {
    Bag out = a;
    for (const auto& [k, v] : b) out[k] = std::max(out[k], v);
    return out;
}

// 0/0 is taken as 1 on either side, so an operation that neither the
// candidate nor the references perform scores perfectly.
inline double ratio_or_one(std::int64_t num, std::int64_t den) {
    return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

inline double f1(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

}  // namespace detail

// Operation sets per n-gram order, as multisets (counts clipped by min):
//   add:  candidate - input  vs  references - input      (F1)
//   keep: candidate & input  vs  references & input      (F1)
//   del:  input - candidate  vs  input - references      (precision)
// Multiple references are merged by multiset union (max count), which makes
// the score independent of reference order. Components are averaged over
// the configured orders; sari = 100 * mean of the three. Tokens are
// whitespace-delimited.
inline SariBreakdown sari(std::string_view input, std::string_view candidate, const std::vector<std::string>& references,
                          const SariConfig& cfg = {}) {
    if (references.empty()) throw DataError("sari: no references");
    if (cfg.orders.empty()) throw ConfigError("sari: no n-gram orders configured");
    const auto in_tokens = unicode::split_whitespace(input);
    const auto cand_tokens = unicode::split_whitespace(candidate);
    std::vector<std::vector<std::string_view>> ref_tokens;
    for (const auto& r : references) ref_tokens.push_back(unicode::split_whitespace(r));

    SariBreakdown out;
    for (std::size_t n : cfg.orders) {
        if (n == 0) throw ConfigError("sari: n-gram order must be positive");
        const auto I = detail::ngrams(in_tokens, n);
        const auto C = detail::ngrams(cand_tokens, n);
        detail::Bag R;
        for (const auto& rt : ref_tokens) R = detail::union_max(R, detail::ngrams(rt, n));

        const auto add_c = detail::minus(C, I), add_r = detail::minus(R, I);
        const auto add_good = detail::total(detail::intersect(add_c, add_r));
        const double add_f1 = detail::f1(detail::ratio_or_one(add_good, detail::total(add_c)),
                                         detail::ratio_or_one(add_good, detail::total(add_r)));

        const auto keep_c = detail::intersect(C, I), keep_r = detail::intersect(R, I);
        const auto keep_good = detail::total(detail::intersect(keep_c, keep_r));
        const double keep_f1 = detail::f1(detail::ratio_or_one(keep_good, detail::total(keep_c)),
                                          detail::ratio_or_one(keep_good, detail::total(keep_r)));

        const auto del_c = detail::minus(I, C), del_r = detail::minus(I, R);
        const double del_p =
            detail::ratio_or_one(detail::total(detail::intersect(del_c, del_r)), detail::total(del_c));

        out.f1_add += add_f1;
        out.f1_keep += keep_f1;
        out.p_del += del_p;
    }
    const auto orders = static_cast<double>(cfg.orders.size());
    out.f1_add /= orders;
    out.f1_keep /= orders;
    out.p_del /= orders;
    out.sari = 100.0 * (out.f1_add + out.f1_keep + out.p_del) / 3.0;
    return out;
}

// ---------------------------------------------------------------------------
// Prediction records

struct PredictionRecord {
    std::string id;
    std::string raw_output;
    std::optional<std::string> parsed;
    std::string gold;

    bool valid() const { return parsed.has_value(); }
};

// Accepts an output if its first non-empty line, trimmed, lower-cased and
// stripped of surrounding quotes and trailing punctuation, is one of
// `labels` or fully matches `pattern`.
struct AnswerParser {
    std::vector<std::string> labels;
    std::optional<std::regex> pattern;

    static std::string normalize(std::string_view raw) {
        std::string_view line;
        std::size_t pos = 0;
        while (pos <= raw.size()) {
            std::size_t nl = raw.find('\n', pos);
            if (nl == std::string_view::npos) nl = raw.size();
            line = raw.substr(pos, nl - pos);
            if (!unicode::split_whitespace(line).empty()) break;
            line = {};
            pos = nl + 1;
        }
        auto is_trim = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '"' || c == '\''; };
        while (!line.empty() && is_trim(line.front())) line.remove_prefix(1);
        while (!line.empty() && (is_trim(line.back()) || line.back() == '.' || line.back() == '!')) line.remove_suffix(1);
        return unicode::lowercase(line);
    }

    std::optional<std::string> parse(std::string_view raw) const {
        const std::string norm = normalize(raw);
        if (norm.empty()) return std::nullopt;
        for (const auto& l : labels)
            if (norm == unicode::lowercase(l)) return unicode::lowercase(l);
        if (pattern && std::regex_match(norm, *pattern)) return norm;
        return std::nullopt;
    }
};

struct FewShotSpec {
    std::string task;
    std::size_t k = 0;
};

struct TaskPreset {
    std::string_view name;
    std::size_t default_k;
    std::vector<std::string> labels;
    std::string_view pattern;
};

// Shot counts per task; label sets are the canonical answer forms used by
// the answer parser and can be overridden from the command line.
inline const std::vector<TaskPreset>& task_presets() {
    static const std::vector<TaskPreset> presets = {
        {"boolq", 3, {"true", "false"}, ""},
        {"cb", 5, {"entailment", "contradiction", "neutral"}, ""},
        {"copa", 5, {"1", "2"}, ""},
        {"multirc", 2, {}, R"(\d+(\s*,\s*\d+)*)"},
        {"rte", 3, {"entailment", "not_entailment"}, ""},
        {"wsc", 4, {"true", "false"}, ""},
        {"si-nli", 5, {"entailment", "neutral", "contradiction"}, ""},
        {"senta", 0, {}, ""},
    };
    return presets;
}

inline const TaskPreset& task_preset(std::string_view name) {
    for (const auto& p : task_presets())
        if (p.name == name) return p;
    throw ConfigError("unknown task: " + std::string(name));
}

inline FewShotSpec default_few_shot(std::string_view task) { return {std::string(task), task_preset(task).default_k}; }

inline AnswerParser parser_for(const TaskPreset& preset) {
    AnswerParser p;
    p.labels = preset.labels;
    if (!preset.pattern.empty()) p.pattern = std::regex(std::string(preset.pattern));
    return p;
}

inline double invalid_rate(const std::vector<PredictionRecord>& records) {
    if (records.empty()) throw DataError("invalid_rate: no records");
    std::size_t invalid = 0;
    for (const auto& r : records) invalid += r.valid() ? 0 : 1;
    return static_cast<double>(invalid) / static_cast<double>(records.size());
}

inline std::vector<PredictionRecord> valid_only(const std::vector<PredictionRecord>& records) {
    std::vector<PredictionRecord> out;
    for (const auto& r : records)
        if (r.valid()) out.push_back(r);
    return out;
}

// ---------------------------------------------------------------------------
// Confidence intervals

enum class CiMethod { normal_approx, quantile_bootstrap };

struct MetricWithCI {
    double point = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    CiMethod method = CiMethod::normal_approx;
    double level = 0.95;
    std::size_t resamples = 0;
    bool exhaustive = false;
    // Resamples in which some class had no gold or predicted instance.
    std::size_t degenerate_resamples = 0;
};

inline double normal_quantile_two_sided(double level) {
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + level / 2.0);
}

inline void require_valid(const std::vector<PredictionRecord>& records, std::size_t minimum, std::string_view what) {
    std::size_t valid = 0;
    for (const auto& r : records) valid += r.valid() ? 1 : 0;
    if (valid == 0) throw DataError(std::string(what) + ": no valid records");
    if (valid < minimum)
        throw DataError(std::string(what) + ": needs at least " + std::to_string(minimum) + " valid records");
    if (valid != records.size()) throw DataError(std::string(what) + ": expects valid records only");
}

// p +- z * sqrt(p(1-p)/n), clipped to [0, 1].
inline MetricWithCI proportion_with_ci(std::size_t successes, std::size_t n, double level = 0.95) {
    if (n == 0) throw DataError("proportion_with_ci: no observations");
    const double p = static_cast<double>(successes) / static_cast<double>(n);
    const double half = normal_quantile_two_sided(level) * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    MetricWithCI m;
    m.point = p;
    m.lo = std::clamp(p - half, 0.0, 1.0);
    m.hi = std::clamp(p + half, 0.0, 1.0);
    m.level = level;
    return m;
}

inline MetricWithCI accuracy_with_ci(const std::vector<PredictionRecord>& records, double level = 0.95) {
    require_valid(records, 1, "accuracy_with_ci");
    std::size_t correct = 0;
    for (const auto& r : records) correct += *r.parsed == r.gold ? 1 : 0;
    return proportion_with_ci(correct, records.size(), level);
}

struct F1Spec {
    enum class Mode { single_class, macro } mode = Mode::macro;
    std::string positive;             // single_class
    std::vector<std::string> labels;  // macro; empty = labels seen in the data
};

struct F1Value {
    double value = 0.0;
    bool degenerate = false;
};

// F1 over the records selected by `idx`. A class with neither gold nor
// predicted instances in the selection contributes F1 = 0 and marks the
// result degenerate.
inline F1Value f1_over(const std::vector<PredictionRecord>& records, const std::vector<std::size_t>& idx,
                       const std::vector<std::string>& labels) {
    F1Value out;
    double sum = 0.0;
    for (const auto& c : labels) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (auto i : idx) {
            const bool pred = *records[i].parsed == c, gold = records[i].gold == c;
            tp += pred && gold;
            fp += pred && !gold;
            fn += !pred && gold;
        }
        if (tp + fp + fn == 0) {
            out.degenerate = true;
            continue;
        }
        sum += 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    }
    out.value = labels.empty() ? 0.0 : sum / static_cast<double>(labels.size());
    return out;
}

inline std::vector<std::string> f1_labels(const std::vector<PredictionRecord>& records, const F1Spec& spec) {
    if (spec.mode == F1Spec::Mode::single_class) {
        if (spec.positive.empty()) throw ConfigError("single-class F1 needs a positive label");
        return {spec.positive};
    }
    if (!spec.labels.empty()) return spec.labels;
    std::set<std::string> seen;
    for (const auto& r : records) {
        seen.insert(r.gold);
        seen.insert(*r.parsed);
    }
    return {seen.begin(), seen.end()};
}

// Smallest value whose empirical CDF reaches q (inverted-CDF quantile).
inline double quantile_inverted_cdf(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw DataError("quantile of an empty sample");
    const double pos = std::ceil(q * static_cast<double>(sorted.size()) - 1e-9);
    const auto idx = static_cast<std::size_t>(std::clamp(pos - 1.0, 0.0, static_cast<double>(sorted.size() - 1)));
    return sorted[idx];
}

// When n^n does not exceed the requested resample count the bootstrap
// distribution is enumerated exactly instead of sampled.
inline bool bootstrap_is_exhaustive(std::size_t n, std::size_t resamples) {
    if (n > 8) return false;
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= n;
    return total <= resamples;
}

template <typename Statistic>
MetricWithCI quantile_bootstrap(std::size_t n, std::size_t resamples, std::uint64_t seed, double level,
                                unsigned threads, Statistic&& stat) {
    if (resamples == 0) throw ConfigError("bootstrap needs at least one resample");
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    MetricWithCI m;
    m.method = CiMethod::quantile_bootstrap;
    m.level = level;
    const F1Value full = stat(all);
    m.point = full.value;

    const bool exhaustive = bootstrap_is_exhaustive(n, resamples);
    std::size_t count = resamples;
    if (exhaustive) {
        count = 1;
        for (std::size_t i = 0; i < n; ++i) count *= n;
    }
    std::vector<double> values(count);
    std::vector<char> degenerate(count, 0);
    parallel_for(count, threads, [&](std::size_t b) {
        std::vector<std::size_t> idx(n);
        if (exhaustive) {
            std::size_t code = b;
            for (std::size_t i = 0; i < n; ++i) {
                idx[i] = code % n;
                code /= n;
            }
        } else {
            std::mt19937_64 rng(derive_seed(seed, b));
            for (auto& i : idx) i = static_cast<std::size_t>(bounded(rng, n));
        }
        const F1Value v = stat(idx);
        values[b] = v.value;
        degenerate[b] = v.degenerate ? 1 : 0;
    });
    std::sort(values.begin(), values.end());
    const double alpha = (1.0 - level) / 2.0;
    m.lo = quantile_inverted_cdf(values, alpha);
    m.hi = quantile_inverted_cdf(values, 1.0 - alpha);
    m.resamples = count;
    m.exhaustive = exhaustive;
    for (char d : degenerate) m.degenerate_resamples += d ? 1 : 0;
    return m;
}

inline MetricWithCI f1_with_bootstrap_ci(const std::vector<PredictionRecord>& records, const F1Spec& spec,
                                         std::size_t resamples = 10000, std::uint64_t seed = 0, double level = 0.95,
                                         unsigned threads = 1) {
    require_valid(records, 2, "f1_with_bootstrap_ci");
    const auto labels = f1_labels(records, spec);
    return quantile_bootstrap(records.size(), resamples, seed, level, threads,
                              [&](const std::vector<std::size_t>& idx) { return f1_over(records, idx, labels); });
}

// Quantile-bootstrap interval for the mean of per-item scores (e.g.
// sentence-level SARI over a test set).
inline MetricWithCI mean_with_bootstrap_ci(const std::vector<double>& scores, std::size_t resamples = 10000,
                                           std::uint64_t seed = 0, double level = 0.95, unsigned threads = 1) {
    if (scores.empty()) throw DataError("mean_with_bootstrap_ci: no scores");
    return quantile_bootstrap(scores.size(), resamples, seed, level, threads, [&](const std::vector<std::size_t>& idx) {
        double s = 0.0;
        for (auto i : idx) s += scores[i];
        return F1Value{s / static_cast<double>(idx.size()), false};
    });
}

// ---------------------------------------------------------------------------
// Few-shot sampling

// k distinct pool indices drawn without replacement from a generator seeded
// by (seed, instance id), in draw order.
inline std::vector<std::size_t> sample_few_shot_indices(std::size_t pool_size, std::size_t k,
                                                        std::string_view instance_id, std::uint64_t seed) {
    if (k > pool_size)
        throw DataError("few-shot: k = " + std::to_string(k) + " exceeds pool size " + std::to_string(pool_size));
    std::vector<std::size_t> perm(pool_size);
    for (std::size_t i = 0; i < pool_size; ++i) perm[i] = i;
    std::mt19937_64 rng(derive_seed(seed, fnv1a64(instance_id)));
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(bounded(rng, pool_size - i));
        std::swap(perm[i], perm[j]);
    }
    perm.resize(k);
    return perm;
}

template <typename Example>
std::vector<Example> sample_few_shot(const std::vector<Example>& pool, const FewShotSpec& spec,
                                     std::string_view instance_id, std::uint64_t seed) {
    std::vector<Example> out;
    for (auto i : sample_few_shot_indices(pool.size(), spec.k, instance_id, seed)) out.push_back(pool[i]);
    return out;
}

struct PromptExample {
    std::string input;
    std::string answer;
};

// Fills `example_template` ({input}, {answer} placeholders) for each shot and
// the query (with an empty answer), joined by blank lines after an optional
// instruction.
inline std::string render_prompt(std::string_view instruction, std::string_view example_template,
                                 const std::vector<PromptExample>& shots, std::string_view query) {
    auto fill = [&](std::string_view input, std::string_view answer) {
        std::string out(example_template);
        auto replace = [&](std::string_view key, std::string_view value) {
            for (std::size_t p = out.find(key); p != std::string::npos; p = out.find(key, p + value.size()))
                out.replace(p, key.size(), value);
        };
        replace("{input}", input);
        replace("{answer}", answer);
        return out;
    };
    std::string prompt;
    if (!instruction.empty()) {
        prompt += instruction;
        prompt += "\n\n";
    }
    for (const auto& s : shots) {
        prompt += fill(s.input, s.answer);
        prompt += "\n\n";
    }
    std::string last = fill(query, "");
    while (!last.empty() && (last.back() == ' ' || last.back() == '\n')) last.pop_back();
    prompt += last;
    return prompt;
}

}  // namespace vocadapt::eval
