#pragma once

#include <cstddef>
#include <vector>

namespace timid {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// First/second moment buffers, one pair per parameter block, plus the shared
// step counter used for bias correction.
struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    long step_count = 0;
};

// Standard exponential-moment update with bias correction. `params[i]` and
// `grads[i]` must have matching sizes; state buffers are sized on first use.
void adam_step(const std::vector<std::vector<double>*>& params,
               const std::vector<const std::vector<double>*>& grads,
               AdamState& state, const AdamConfig& cfg);

}  // namespace timid
