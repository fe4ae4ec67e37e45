#include "pconv/adam.hpp"

#include <cmath>

#include "pconv/errors.hpp"

namespace pconv {

void adam_step(std::span<Parameter* const> params, const GradientMap& grads, AdamState& state, double lr) {
    for (const Parameter* p : params) {
        auto it = grads.find(p->id);
        if (it == grads.end()) throw ContractViolation("adam_step: missing gradient for parameter '" + p->id + "'");
        if (it->second.shape() != p->value.shape()) {
            throw ContractViolation("adam_step: gradient shape " + to_string(it->second.shape()) + " for '" + p->id +
                                    "' of shape " + to_string(p->value.shape()));
        }
    }

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);

    for (Parameter* p : params) {
        const Tensor& g = grads.at(p->id);
        auto [it, fresh] = state.moments.try_emplace(p->id);
        AdamMoments& m = it->second;
        if (fresh || m.first.shape() != p->value.shape()) {
            m.first = Tensor::like(p->value);
            m.second = Tensor::like(p->value);
        }
        for (std::size_t i = 0; i < g.size(); ++i) {
            m.first[i] = state.beta1 * m.first[i] + (1.0 - state.beta1) * g[i];
            m.second[i] = state.beta2 * m.second[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double mhat = m.first[i] / c1;
            const double vhat = m.second[i] / c2;
            p->value[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

}  // namespace pconv
