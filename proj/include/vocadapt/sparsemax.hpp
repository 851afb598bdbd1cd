#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "vocadapt/error.hpp"

namespace vocadapt {

// Threshold tau of the Euclidean projection of z onto the probability
// simplex: the projection is max(z - tau, 0).
inline double sparsemax_threshold(std::span<const double> z) {
    if (z.empty()) throw DataError("sparsemax: empty input");
    std::vector<double> sorted(z.begin(), z.end());
    for (double v : sorted)
        if (!std::isfinite(v)) throw DataError("sparsemax: non-finite input");
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0, support_sum = sorted[0];
    std::size_t support = 1;
    for (std::size_t k = 1; k <= sorted.size(); ++k) {
        cumulative += sorted[k - 1];
        if (1.0 + static_cast<double>(k) * sorted[k - 1] > cumulative) {
            support = k;
            support_sum = cumulative;
        }
    }
    return (support_sum - 1.0) / static_cast<double>(support);
}

inline std::vector<double> sparsemax(std::span<const double> z) {
    const double tau = sparsemax_threshold(z);
    std::vector<double> p(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) p[i] = std::max(z[i] - tau, 0.0);
    return p;
}

}  // namespace vocadapt
