#include "timid/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace timid {

void adam_step(const std::vector<std::vector<double>*>& params,
               const std::vector<const std::vector<double>*>& grads,
               AdamState& state, const AdamConfig& cfg) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("adam_step: params/grads count mismatch");
    }
    if (state.m.empty()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            state.m[i].assign(params[i]->size(), 0.0);
            state.v[i].assign(params[i]->size(), 0.0);
        }
    }
    if (state.m.size() != params.size()) {
        throw std::invalid_argument("adam_step: state/param block count mismatch");
    }
    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
        std::vector<double>& p = *params[i];
        const std::vector<double>& g = *grads[i];
        if (p.size() != g.size() || p.size() != state.m[i].size()) {
            throw std::invalid_argument("adam_step: state/param shape mismatch");
        }
        std::vector<double>& m = state.m[i];
        std::vector<double>& v = state.v[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            p[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

}  // namespace timid
