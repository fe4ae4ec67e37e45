#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pconv/autodiff.hpp"
#include "pconv/rng.hpp"

namespace pconv {

/// Which channel perturbation a discriminator layer applies to its input.
enum class PerturbKind {
    none,              ///< standard layer
    pconv,             ///< selected channels scaled by a common k ~ U[0, 1]
    sdrop_bernoulli,   ///< selected channels zeroed (spatial dropout)
    sdrop_random_ratio,///< as sdrop_bernoulli, ratio redrawn per call
    sdrop_gaussian,    ///< every channel multiplied by N(1, r(1 - r))
};

struct PerturbVariant {
    PerturbKind kind = PerturbKind::none;
    double ratio = 0.0;
    /// Half width of the ratio window for sdrop_random_ratio.
    double halfwidth = 0.1;

    static PerturbVariant none() { return {}; }
    static PerturbVariant pconv(double r) { return {PerturbKind::pconv, r}; }
    static PerturbVariant sdrop(double r) { return {PerturbKind::sdrop_bernoulli, r}; }
    static PerturbVariant sdrop_random_ratio(double r, double hw = 0.1) {
        return {PerturbKind::sdrop_random_ratio, r, hw};
    }
    static PerturbVariant sdrop_gaussian(double r) { return {PerturbKind::sdrop_gaussian, r}; }

    /// Throws ContractViolation unless ratio and halfwidth lie in [0, 1].
    void validate() const;

    friend bool operator==(const PerturbVariant&, const PerturbVariant&) = default;
};

/// Short name used in configs and result paths: conv, pconv, sdrop, sdrop_star, sdrop_dagger.
std::string kind_name(PerturbKind kind);
/// Inverse of kind_name; also accepts "none", "sdrop*" and "sdrop+". Throws ConfigError.
PerturbKind parse_perturb_kind(const std::string& name);

/// Number of channels a ratio selects: round(ratio * channels).
std::size_t selection_count(std::size_t channels, double ratio);

/// Channel multiplier mask: k on the selected channels, exactly 1 elsewhere.
struct ScalingMask {
    std::size_t channels = 0;
    std::vector<std::size_t> selected;  ///< sorted, distinct
    double k = 1.0;
    double ratio = 0.0;

    /// The per-channel multipliers as a [channels] tensor.
    Tensor multipliers() const;
};

/// Selects round(ratio * C) distinct channels uniformly without replacement
/// and draws k uniformly on [0, 1]. Every call draws a fresh mask.
ScalingMask make_scaling_mask(std::size_t channels, double ratio, RngStream& rng);

/// x (N x C or N x C x H x W) with the mask broadcast over batch and space.
/// The mask is a constant for differentiation.
Var apply_mask(const Var& x, const ScalingMask& mask);

/// Per-channel multipliers for one draw of `variant` ([channels] tensor).
Tensor draw_multipliers(const PerturbVariant& variant, std::size_t channels, RngStream& rng);

/// Applies `variant` to the input of a layer.
///
/// training == false returns `x` itself. Otherwise one set of multipliers is
/// drawn per call (shared across the batch) or, with per_sample, one per
/// batch row. The draw is logged on the tape under `label`.
Var perturb_input(const Var& x, const PerturbVariant& variant, RngStream& rng, bool training,
                  bool per_sample = false, const std::string& label = "perturb");

/// PConv: conv2d of the masked input with a fresh mask; plain conv2d when not training.
Var pconv_forward(const Var& x, const Var& w, double ratio, RngStream& rng, bool training, std::size_t stride = 1,
                  std::size_t pad = 0);

/// Perturbed dense layer: (x masked) * w^T with w stored as out x in.
Var pdense_forward(const Var& x, const Var& w, double ratio, RngStream& rng, bool training);

/// Spatial dropout family (no 1/(1-p) rescaling); identity when not training.
Var sdrop_forward(const Var& x, const PerturbVariant& variant, RngStream& rng, bool training);

}  // namespace pconv
