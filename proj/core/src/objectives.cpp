#include "pconv/objectives.hpp"

#include "pconv/errors.hpp"
#include "pconv/ops.hpp"

namespace pconv {

std::string loss_name(AdvLossKind kind) {
    switch (kind) {
        case AdvLossKind::cross_entropy: return "ce";
        case AdvLossKind::hinge: return "hinge";
        case AdvLossKind::least_squares: return "lsgan";
    }
    return "?";
}

AdvLossKind parse_loss_kind(const std::string& name) {
    if (name == "ce") return AdvLossKind::cross_entropy;
    if (name == "hinge") return AdvLossKind::hinge;
    if (name == "lsgan") return AdvLossKind::least_squares;
    throw ConfigError("unknown loss kind '" + name + "' (expected ce, hinge or lsgan)");
}

namespace {

void require_batch(const Var& v, const char* what) {
    const Shape& s = v.shape();
    if (v.value().size() == 0) throw ContractViolation(std::string(what) + ": empty batch");
    if (s.size() > 2 || (s.size() == 2 && s[1] != 1)) {
        throw ContractViolation(std::string(what) + ": expected one score per sample, got " + to_string(s));
    }
}

}  // namespace

Var d_loss(AdvLossKind kind, const Var& d_real, const Var& d_fake) {
    require_batch(d_real, "d_loss(real)");
    require_batch(d_fake, "d_loss(fake)");
    using namespace ops;
    switch (kind) {
        case AdvLossKind::cross_entropy:
            // -log sigmoid(r) = softplus(-r); -log(1 - sigmoid(f)) = softplus(f)
            return add(mean(softplus(scale(d_real, -1.0))), mean(softplus(d_fake)));
        case AdvLossKind::hinge:
            return add(mean(relu(add_scalar(scale(d_real, -1.0), 1.0))), mean(relu(add_scalar(d_fake, 1.0))));
        case AdvLossKind::least_squares:
            return add(scale(mean(square(add_scalar(d_real, -1.0))), 0.5), scale(mean(square(d_fake)), 0.5));
    }
    throw ContractViolation("unknown loss kind");
}

Var g_loss(AdvLossKind kind, const Var& d_fake) {
    require_batch(d_fake, "g_loss");
    using namespace ops;
    switch (kind) {
        case AdvLossKind::cross_entropy: return mean(softplus(scale(d_fake, -1.0)));
        case AdvLossKind::hinge: return scale(mean(d_fake), -1.0);
        case AdvLossKind::least_squares: return scale(mean(square(add_scalar(d_fake, -1.0))), 0.5);
    }
    throw ContractViolation("unknown loss kind");
}

}  // namespace pconv
