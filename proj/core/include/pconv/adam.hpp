#pragma once

#include <cstdint>
#include <map>
#include <span>

#include "pconv/autodiff.hpp"

namespace pconv {

struct AdamMoments {
    Tensor first;
    Tensor second;
};

/// Bias-corrected Adam. Defaults follow the GAN recipe (beta1 = 0, beta2 = 0.9).
struct AdamState {
    double beta1 = 0.0;
    double beta2 = 0.9;
    double eps = 1e-8;
    std::uint64_t step = 0;
    std::map<ParamId, AdamMoments> moments;
};

/// One Adam update of every parameter in `params` using `grads`.
///
/// Throws ContractViolation if a parameter has no gradient in the map or a
/// gradient's shape differs from its parameter.
void adam_step(std::span<Parameter* const> params, const GradientMap& grads, AdamState& state, double lr);

}  // namespace pconv
