#include "pconv/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pconv/errors.hpp"
#include "pconv/ops.hpp"

namespace pconv {

void PerturbVariant::validate() const {
    if (!(ratio >= 0.0 && ratio <= 1.0)) {
        throw ContractViolation("perturbation ratio " + std::to_string(ratio) + " outside [0, 1]");
    }
    if (!(halfwidth >= 0.0 && halfwidth <= 1.0)) {
        throw ContractViolation("ratio halfwidth " + std::to_string(halfwidth) + " outside [0, 1]");
    }
}

std::string kind_name(PerturbKind kind) {
    switch (kind) {
        case PerturbKind::none: return "conv";
        case PerturbKind::pconv: return "pconv";
        case PerturbKind::sdrop_bernoulli: return "sdrop";
        case PerturbKind::sdrop_random_ratio: return "sdrop_star";
        case PerturbKind::sdrop_gaussian: return "sdrop_dagger";
    }
    return "?";
}

PerturbKind parse_perturb_kind(const std::string& name) {
    if (name == "conv" || name == "none" || name == "standard") return PerturbKind::none;
    if (name == "pconv") return PerturbKind::pconv;
    if (name == "sdrop") return PerturbKind::sdrop_bernoulli;
    if (name == "sdrop_star" || name == "sdrop*") return PerturbKind::sdrop_random_ratio;
    if (name == "sdrop_dagger" || name == "sdrop+" || name == "sdrop_gaussian") return PerturbKind::sdrop_gaussian;
    throw ConfigError("unknown perturbation variant '" + name + "'");
}

std::size_t selection_count(std::size_t channels, double ratio) {
    return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(channels)));
}

Tensor ScalingMask::multipliers() const {
    Tensor m(Shape{channels}, 1.0);
    for (std::size_t c : selected) m[c] = k;
    return m;
}

namespace {

// Partial Fisher-Yates: `count` distinct indices out of [0, n), sorted.
std::vector<std::size_t> choose_channels(std::size_t n, std::size_t count, RngStream& rng) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace

ScalingMask make_scaling_mask(std::size_t channels, double ratio, RngStream& rng) {
    if (channels == 0) throw ContractViolation("make_scaling_mask: zero channels");
    if (!(ratio >= 0.0 && ratio <= 1.0)) throw ContractViolation("make_scaling_mask: ratio outside [0, 1]");
    ScalingMask mask;
    mask.channels = channels;
    mask.ratio = ratio;
    mask.selected = choose_channels(channels, selection_count(channels, ratio), rng);
    mask.k = rng.uniform();
    return mask;
}

Var apply_mask(const Var& x, const ScalingMask& mask) {
    if (x.shape().size() < 2 || x.shape()[1] != mask.channels) {
        throw ContractViolation("apply_mask: input " + to_string(x.shape()) + " does not have " +
                                std::to_string(mask.channels) + " channels");
    }
    return ops::channel_scale(x, mask.multipliers());
}

Tensor draw_multipliers(const PerturbVariant& variant, std::size_t channels, RngStream& rng) {
    variant.validate();
    switch (variant.kind) {
        case PerturbKind::none: return Tensor(Shape{channels}, 1.0);
        case PerturbKind::pconv: return make_scaling_mask(channels, variant.ratio, rng).multipliers();
        case PerturbKind::sdrop_bernoulli: {
            ScalingMask m{channels, choose_channels(channels, selection_count(channels, variant.ratio), rng), 0.0,
                          variant.ratio};
            return m.multipliers();
        }
        case PerturbKind::sdrop_random_ratio: {
            const double lo = std::max(0.0, variant.ratio - variant.halfwidth);
            const double hi = std::min(1.0, variant.ratio + variant.halfwidth);
            const double r = rng.uniform(lo, hi);
            ScalingMask m{channels, choose_channels(channels, selection_count(channels, r), rng), 0.0, r};
            return m.multipliers();
        }
        case PerturbKind::sdrop_gaussian: {
            const double sd = std::sqrt(variant.ratio * (1.0 - variant.ratio));
            Tensor m(Shape{channels});
            for (std::size_t c = 0; c < channels; ++c) m[c] = 1.0 + sd * rng.normal();
            return m;
        }
    }
    throw ContractViolation("unknown perturbation kind");
}

Var perturb_input(const Var& x, const PerturbVariant& variant, RngStream& rng, bool training, bool per_sample,
                  const std::string& label) {
    if (!training || variant.kind == PerturbKind::none) return x;
    const Shape& s = x.shape();
    if (s.size() < 2) throw ContractViolation("perturb_input: expected a batch of channels, got " + to_string(s));
    const std::size_t N = s[0], C = s[1];
    const std::uint64_t before = rng.counter();

    Tensor mult;
    if (per_sample) {
        std::vector<Tensor> rows;
        rows.reserve(N);
        for (std::size_t n = 0; n < N; ++n) rows.push_back(draw_multipliers(variant, C, rng).reshaped({1, C}));
        mult = concat_rows(rows);
    } else {
        mult = draw_multipliers(variant, C, rng);
    }
    x.tape().record_mask({label, before, {mult.data().begin(), mult.data().end()}});

    const bool identity = std::all_of(mult.data().begin(), mult.data().end(), [](double v) { return v == 1.0; });
    return identity ? x : ops::channel_scale(x, mult);
}

Var pconv_forward(const Var& x, const Var& w, double ratio, RngStream& rng, bool training, std::size_t stride,
                  std::size_t pad) {
    return ops::conv2d(perturb_input(x, PerturbVariant::pconv(ratio), rng, training, false, "pconv"), w, stride, pad);
}

Var pdense_forward(const Var& x, const Var& w, double ratio, RngStream& rng, bool training) {
    return ops::matmul(perturb_input(x, PerturbVariant::pconv(ratio), rng, training, false, "pdense"),
                       ops::transpose(w));
}

Var sdrop_forward(const Var& x, const PerturbVariant& variant, RngStream& rng, bool training) {
    if (variant.kind == PerturbKind::pconv) throw ContractViolation("sdrop_forward called with the pconv variant");
    return perturb_input(x, variant, rng, training, false, kind_name(variant.kind));
}

}  // namespace pconv
