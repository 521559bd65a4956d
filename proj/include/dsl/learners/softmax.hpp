#pragma once

#include <algorithm>
#include <cmath>
#include <span>

namespace dsl {

/// In-place softmax of a logit row, shifted by its maximum.
inline void softmax_inplace(std::span<double> v) noexcept {
    const double top = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& x : v) {
        x = std::exp(x - top);
        sum += x;
    }
    for (double& x : v) x /= sum;
}

}  // namespace dsl
