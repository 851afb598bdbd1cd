#pragma once

// Training-plan arithmetic: learning-rate schedule, freeze policy, step
// counts from a token budget, and validation-split sizing.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vocadapt/error.hpp"

namespace vocadapt::schedule {

struct LrScheduleConfig {
    double eta_min = 2e-5;
    double eta_max = 2e-4;
    std::int64_t warmup_steps = 0;
    std::int64_t constant_steps = 0;
    std::int64_t total_steps = 0;

    std::int64_t decay_steps() const { return total_steps - warmup_steps - constant_steps; }

    void validate() const {
        if (!(eta_min > 0.0) || !(eta_max > 0.0)) throw ConfigError("learning rates must be positive");
        if (eta_max < eta_min) throw ConfigError("eta_max must be at least eta_min");
        if (warmup_steps < 0 || constant_steps < 0 || total_steps < 0)
            throw ConfigError("step counts must be non-negative");
        if (warmup_steps + constant_steps > total_steps)
            throw ConfigError("warmup_steps + constant_steps exceeds total_steps (" + std::to_string(total_steps) + ")");
    }
};

// Learning rate at a real-valued step: linear 0 -> eta_max over warmup, cosine
// eta_max -> eta_min over the decay span, then eta_min.
inline double lr_at(const LrScheduleConfig& cfg, double step) {
    const auto warmup = static_cast<double>(cfg.warmup_steps);
    const auto decay = static_cast<double>(cfg.decay_steps());
    if (step <= warmup) return cfg.warmup_steps == 0 ? cfg.eta_max : cfg.eta_max * step / warmup;
    if (step >= warmup + decay) return cfg.eta_min;
    const double t = (step - warmup) / decay;
    return cfg.eta_min + (cfg.eta_max - cfg.eta_min) * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

inline double lr_at_step(const LrScheduleConfig& cfg, std::int64_t step) {
    cfg.validate();
    if (step < 0 || step > cfg.total_steps)
        throw ConfigError("step " + std::to_string(step) + " outside [0, " + std::to_string(cfg.total_steps) + "]");
    return lr_at(cfg, static_cast<double>(step));
}

// ---------------------------------------------------------------------------
// Freeze policy

enum class FreezeMode { none, steps, first_epoch };

struct FreezePolicy {
    FreezeMode mode = FreezeMode::none;
    std::int64_t steps = 0;

    static FreezePolicy no_freeze() { return {}; }
    static FreezePolicy for_steps(std::int64_t n) {
        if (n < 0) throw ConfigError("freeze step count must be non-negative");
        return {FreezeMode::steps, n};
    }
    static FreezePolicy first_epoch() { return {FreezeMode::first_epoch, 0}; }

    std::string describe() const {
        switch (mode) {
            case FreezeMode::none: return "none";
            case FreezeMode::steps: return "steps(" + std::to_string(steps) + ")";
            case FreezeMode::first_epoch: return "first-epoch";
        }
        return "none";
    }
};

inline FreezePolicy parse_freeze_policy(std::string_view s) {
    if (s == "none") return FreezePolicy::no_freeze();
    if (s == "first-epoch") return FreezePolicy::first_epoch();
    std::string_view digits = s;
    if (digits.starts_with("steps(") && digits.ends_with(")")) digits = digits.substr(6, digits.size() - 7);
    if (!digits.empty() && digits.find_first_not_of("0123456789") == std::string_view::npos)
        return FreezePolicy::for_steps(std::stoll(std::string(digits)));
    throw ConfigError("unknown freeze policy: " + std::string(s) + " (expected none, first-epoch or steps(N))");
}

inline constexpr std::string_view kEmbedding = "embedding";
inline constexpr std::string_view kOutput = "output";
inline constexpr std::string_view kInner = "inner";

inline std::vector<std::string> trainable_groups(const FreezePolicy& policy, std::int64_t step,
                                                 std::int64_t steps_per_epoch = 0) {
    if (step < 0) throw ConfigError("step must be non-negative");
    bool frozen = false;
    switch (policy.mode) {
        case FreezeMode::none: break;
        case FreezeMode::steps: frozen = step < policy.steps; break;
        case FreezeMode::first_epoch:
            if (steps_per_epoch <= 0) throw ConfigError("first-epoch freeze needs steps_per_epoch");
            frozen = step < steps_per_epoch;
            break;
    }
    if (frozen) return {std::string(kEmbedding), std::string(kOutput)};
    return {std::string(kEmbedding), std::string(kOutput), std::string(kInner)};
}

// ---------------------------------------------------------------------------
// Budgets

// Steps needed to consume `total_tokens` with full context windows; a partial
// final batch counts as a step.
inline std::int64_t steps_for_budget(double total_tokens, std::int64_t batch_sequences, std::int64_t context_length) {
    if (batch_sequences <= 0 || context_length <= 0) throw ConfigError("batch size and context length must be positive");
    if (!(total_tokens > 0.0)) throw ConfigError("token budget must be positive");
    const double per_step = static_cast<double>(batch_sequences) * static_cast<double>(context_length);
    return static_cast<std::int64_t>(std::ceil(total_tokens / per_step));
}

struct ValidationSplit {
    std::int64_t train = 0;
    std::int64_t validation = 0;
};

inline ValidationSplit split_validation(std::int64_t corpus_tokens, double fraction = 0.0005) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("validation fraction must lie in (0, 1)");
    if (corpus_tokens < 0) throw ConfigError("corpus size must be non-negative");
    const auto validation = static_cast<std::int64_t>(std::llround(fraction * static_cast<double>(corpus_tokens)));
    return {corpus_tokens - validation, validation};
}

// ---------------------------------------------------------------------------
// Presets

inline constexpr std::int64_t kBatchSequences = 1024;
inline constexpr std::int64_t kContextLength = 2048;
inline constexpr double kOptTokenizerTokens = 47.44e9;
inline constexpr double kSloveneTokenizerTokens = 28.13e9;

struct Preset {
    std::string name;
    LrScheduleConfig lr;
    FreezePolicy freeze;
    std::int64_t steps_per_epoch = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.95;
};

inline std::vector<Preset> presets() {
    const auto opt_steps = steps_for_budget(kOptTokenizerTokens, kBatchSequences, kContextLength);
    const auto gams_steps = steps_for_budget(kSloveneTokenizerTokens, kBatchSequences, kContextLength);
    std::vector<Preset> out;
    out.push_back({"opt-gams", {2e-5, 2e-4, 1000, 1000, opt_steps}, FreezePolicy::no_freeze(), opt_steps});
    out.push_back({"gams", {2e-5, 2e-4, 2000, 500, gams_steps}, FreezePolicy::for_steps(1500), gams_steps});
    out.push_back(
        {"multi-epoch", {2e-5, 2e-4, 10000, 5000, 4 * gams_steps}, FreezePolicy::first_epoch(), gams_steps});
    out.push_back({"quality", {2e-5, 2e-4, 1000, 500, 10050}, FreezePolicy::no_freeze(), 10050});
    return out;
}

inline Preset preset(std::string_view name) {
    for (auto& p : presets())
        if (p.name == name) return p;
    throw ConfigError("unknown schedule preset: " + std::string(name) + " (expected gams, opt-gams, multi-epoch, quality)");
}

}  // namespace vocadapt::schedule
