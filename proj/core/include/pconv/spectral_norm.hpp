#pragma once

#include <cstddef>

#include "pconv/autodiff.hpp"
#include "pconv/rng.hpp"

namespace pconv {

/// Persistent power-iteration state for one weight, viewed as a
/// shape[0] x (size / shape[0]) matrix W.
struct SpectralNormState {
    Tensor u;  ///< unit left singular vector estimate, [rows]
    Tensor v;  ///< unit right singular vector estimate, [cols]
    std::size_t power_iterations = 1;
};

/// u drawn from N(0, I) and normalized; v = normalize(W^T u).
SpectralNormState init_spectral_norm(const Tensor& w, RngStream& rng, std::size_t power_iterations = 1);

/// v <- normalize(W^T u), u <- normalize(W v), `iterations` times.
/// Normalization divides by max(norm, 1e-12).
void power_iterate(const Tensor& w, SpectralNormState& state, std::size_t iterations);

/// sigma = u^T W v, floored at 1e-12.
double sigma_estimate(const Tensor& w, const SpectralNormState& state);

/// W / sigma on the tape. With `update` the state first advances by
/// state.power_iterations steps (training mode); otherwise it is used as is.
Var spectral_normalize(const Var& w, SpectralNormState& state, bool update);

}  // namespace pconv
