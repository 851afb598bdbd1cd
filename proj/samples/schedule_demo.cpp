// Prints the step budget and a few learning-rate values of the GaMS preset.

#include <cstdio>

#include "vocadapt/schedule.hpp"

using namespace vocadapt::schedule;

int main() {
    const auto p = preset("gams");
    std::printf("steps for 28.13B tokens: %lld\n",
                static_cast<long long>(steps_for_budget(28.13e9, kBatchSequences, kContextLength)));
    const auto split = split_validation(28'130'000'000);
    std::printf("validation tokens: %lld\n", static_cast<long long>(split.validation));
    for (std::int64_t s : {std::int64_t{0}, std::int64_t{1000}, p.lr.warmup_steps, std::int64_t{7000}, p.lr.total_steps})
        std::printf("step %6lld  lr %.6g  groups %zu\n", static_cast<long long>(s), lr_at_step(p.lr, s),
                    trainable_groups(p.freeze, s).size());
}
