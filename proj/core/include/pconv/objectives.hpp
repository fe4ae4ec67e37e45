#pragma once

#include <string>

#include "pconv/autodiff.hpp"

namespace pconv {

enum class AdvLossKind { cross_entropy, hinge, least_squares };

/// Config spelling: "ce", "hinge", "lsgan".
std::string loss_name(AdvLossKind kind);
AdvLossKind parse_loss_kind(const std::string& name);

struct LossValue {
    double d_loss = 0.0;
    double g_loss = 0.0;
    double mean_d_real = 0.0;
    double mean_d_fake = 0.0;
};

/// Discriminator loss on raw scores (logits for cross-entropy).
///
///   cross_entropy: -E[log sigmoid(real)] - E[log(1 - sigmoid(fake))]
///   hinge:         E[max(0, 1 - real)] + E[max(0, 1 + fake)]
///   least_squares: 1/2 E[(real - 1)^2] + 1/2 E[fake^2]
Var d_loss(AdvLossKind kind, const Var& d_real, const Var& d_fake);

/// Generator loss: -E[log sigmoid(fake)], -E[fake], or 1/2 E[(fake - 1)^2].
Var g_loss(AdvLossKind kind, const Var& d_fake);

/// Real/fake call of a hinge-trained discriminator: strictly positive means real.
constexpr bool real_fake_decision(double d_out) noexcept { return d_out > 0.0; }

}  // namespace pconv
