#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pconv/autodiff.hpp"

namespace pconv {

/// A differentiable piece of a model: its parameters and a function that
/// records a scalar loss on a fresh tape. The loss must be a deterministic
/// function of (parameter values, seed); layers holding random streams or
/// power-iteration state must reset them from the seed on every call.
struct Fragment {
    std::vector<Parameter*> params;
    std::function<Var(Tape&, std::uint64_t seed)> loss;
};

struct GradCheckResult {
    double max_rel_error = 0.0;
    ParamId worst_param;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t checked = 0;
};

/// Compares tape gradients with central differences (step h) over every
/// entry of every parameter.
///
/// Relative error of an entry is |a - n| / max(|a|, |n|, 1e-3 * max|a|, 1e-12),
/// so entries far below the gradient's overall scale are judged against that
/// scale rather than their own magnitude.
GradCheckResult grad_check(const Fragment& fragment, std::uint64_t seed, double h = 1e-5);

}  // namespace pconv
