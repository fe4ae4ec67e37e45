#include "pconv/models.hpp"

#include "pconv/errors.hpp"

namespace pconv {

ModelPreset gmm8_preset(std::size_t latent_dim, std::size_t width) {
    ModelPreset p;
    p.latent_dim = latent_dim;
    p.generator = {"gmm8-G", NetRole::generator, {latent_dim}, {}};
    p.discriminator = {"gmm8-D", NetRole::discriminator, {2}, {}};
    for (int i = 0; i < 3; ++i) {
        p.generator.blocks.push_back({BlockKind::dense, width});
        p.generator.blocks.push_back({BlockKind::relu});
        p.discriminator.blocks.push_back({BlockKind::dense, width});
        p.discriminator.blocks.push_back({BlockKind::relu});
    }
    p.generator.blocks.push_back({BlockKind::dense, 2});
    p.discriminator.blocks.push_back({BlockKind::dense, 1});
    return p;
}

ModelPreset tiny32_preset(std::size_t latent_dim, std::size_t width_divisor, std::size_t resolution) {
    if (width_divisor == 0 || 256 % width_divisor != 0 || 128 % width_divisor != 0) {
        throw ContractViolation("tiny32: width divisor must divide 128");
    }
    if (resolution < 8 || resolution % 8 != 0) throw ContractViolation("tiny32: resolution must be a multiple of 8");
    const std::size_t gw = 256 / width_divisor;
    const std::size_t dw = 128 / width_divisor;
    const std::size_t base = resolution / 8;

    ModelPreset p;
    p.latent_dim = latent_dim;
    p.generator = {"tiny32-G", NetRole::generator, {latent_dim}, {}};
    auto& g = p.generator.blocks;
    g.push_back({BlockKind::dense, base * base * gw});
    g.push_back({BlockKind::reshape, gw, base, base});
    for (int i = 0; i < 3; ++i) g.push_back({BlockKind::resblock_up, gw});
    g.push_back({BlockKind::batchnorm});
    g.push_back({BlockKind::relu});
    g.push_back({BlockKind::conv3x3, 3});
    g.push_back({BlockKind::tanh});

    p.discriminator = {"tiny32-D", NetRole::discriminator, {3, resolution, resolution}, {}};
    auto& d = p.discriminator.blocks;
    d.push_back({BlockKind::resblock_down, dw});
    d.push_back({BlockKind::resblock_down, dw});
    d.push_back({BlockKind::resblock, dw});
    d.push_back({BlockKind::resblock, dw});
    d.push_back({BlockKind::relu});
    d.push_back({BlockKind::global_sum_pool});
    d.push_back({BlockKind::dense, 1});
    return p;
}

namespace {

[[noreturn]] void chain_error(const ArchPreset& p, std::size_t i, const std::string& what) {
    throw ContractViolation("inconsistent channel chain in '" + p.name + "' at block " + std::to_string(i) + ": " +
                            what);
}

// Per-sample output shape of `b` given input `s`.
Shape next_shape(const ArchPreset& p, std::size_t i, const Shape& s) {
    const BlockSpec& b = p.blocks[i];
    auto need_rank = [&](std::size_t r) {
        if (s.size() != r) chain_error(p, i, "expected rank-" + std::to_string(r) + " input, got " + to_string(s));
    };
    switch (b.kind) {
        case BlockKind::dense:
            need_rank(1);
            if (b.channels == 0) chain_error(p, i, "dense with zero outputs");
            return {b.channels};
        case BlockKind::reshape:
            need_rank(1);
            if (s[0] != b.channels * b.height * b.width) {
                chain_error(p, i, "cannot reshape " + std::to_string(s[0]) + " features to " +
                                      to_string({b.channels, b.height, b.width}));
            }
            return {b.channels, b.height, b.width};
        case BlockKind::conv3x3:
        case BlockKind::resblock:
            need_rank(3);
            return {b.channels, s[1], s[2]};
        case BlockKind::resblock_up:
            need_rank(3);
            return {b.channels, 2 * s[1], 2 * s[2]};
        case BlockKind::resblock_down:
            need_rank(3);
            if (s[1] % 2 || s[2] % 2) chain_error(p, i, "odd spatial extent before pooling: " + to_string(s));
            return {b.channels, s[1] / 2, s[2] / 2};
        case BlockKind::global_sum_pool:
            need_rank(3);
            return {s[0]};
        case BlockKind::batchnorm:
        case BlockKind::relu:
        case BlockKind::tanh: return s;
    }
    chain_error(p, i, "unknown block kind");
}

bool tail_is(const ArchPreset& p, std::initializer_list<BlockKind> kinds) {
    if (p.blocks.size() < kinds.size()) return false;
    auto it = p.blocks.end() - static_cast<std::ptrdiff_t>(kinds.size());
    for (BlockKind k : kinds) {
        if (it->kind != k) return false;
        ++it;
    }
    return true;
}

Shape output_shape_of(const ArchPreset& p) {
    Shape s = p.input;
    for (std::size_t i = 0; i < p.blocks.size(); ++i) s = next_shape(p, i, s);
    return s;
}

}  // namespace

void validate_preset(const ArchPreset& p) {
    if (p.input.empty()) throw ContractViolation("preset '" + p.name + "' has no input shape");
    const Shape out = output_shape_of(p);
    if (p.role == NetRole::discriminator) {
        if (out != Shape{1}) throw ContractViolation("discriminator '" + p.name + "' must output one score");
        if (p.input.size() == 3 &&
            !tail_is(p, {BlockKind::relu, BlockKind::global_sum_pool, BlockKind::dense})) {
            throw ContractViolation("image discriminator '" + p.name +
                                    "' must end with relu, global sum pooling, dense(1)");
        }
    } else {
        if (p.input.size() != 1) throw ContractViolation("generator '" + p.name + "' must take a latent vector");
        if (out.size() == 3) {
            if (!tail_is(p, {BlockKind::batchnorm, BlockKind::relu, BlockKind::conv3x3, BlockKind::tanh})) {
                throw ContractViolation("image generator '" + p.name + "' must end with BN, ReLU, conv3x3, tanh");
            }
            if (out[0] != 3) throw ContractViolation("image generator '" + p.name + "' must emit 3 channels");
        }
    }
}

Network::Network(const ArchPreset& preset, const LayerOptions& options, std::uint64_t seed)
    : name_(preset.name), input_(preset.input) {
    validate_preset(preset);
    const std::string prefix = preset.role == NetRole::generator ? "G" : "D";
    Shape s = preset.input;
    for (std::size_t i = 0; i < preset.blocks.size(); ++i) {
        const BlockSpec& b = preset.blocks[i];
        const std::string id = prefix + "/" + std::to_string(i);
        const Shape next = next_shape(preset, i, s);
        switch (b.kind) {
            case BlockKind::dense:
                modules_.push_back(std::make_unique<Dense>(id + "/dense", s[0], b.channels, options, seed));
                break;
            case BlockKind::reshape:
                modules_.push_back(std::make_unique<Reshape>(next));
                break;
            case BlockKind::conv3x3:
                modules_.push_back(std::make_unique<Conv2d>(id + "/conv", s[0], b.channels, 3, options, seed));
                break;
            case BlockKind::resblock_up:
                modules_.push_back(std::make_unique<GenResBlock>(id, s[0], b.channels, true, options, seed));
                break;
            case BlockKind::resblock_down:
            case BlockKind::resblock:
                modules_.push_back(std::make_unique<DiscResBlock>(id, s[0], b.channels,
                                                                  b.kind == BlockKind::resblock_down, i == 0,
                                                                  options, seed));
                break;
            case BlockKind::batchnorm:
                modules_.push_back(std::make_unique<BatchNorm>(id + "/bn", s[0]));
                break;
            case BlockKind::relu:
                modules_.push_back(std::make_unique<Primitive>(ops::PrimitiveKind::relu));
                break;
            case BlockKind::tanh:
                modules_.push_back(std::make_unique<Primitive>(ops::PrimitiveKind::tanh));
                break;
            case BlockKind::global_sum_pool:
                modules_.push_back(std::make_unique<Primitive>(ops::PrimitiveKind::global_sum_pool));
                break;
        }
        s = next;
    }
    output_ = s;
}

Var Network::forward(const Var& x, bool training) {
    const Shape& s = x.shape();
    if (s.size() != input_.size() + 1 || !std::equal(input_.begin(), input_.end(), s.begin() + 1)) {
        throw ContractViolation("network '" + name_ + "' expects per-sample shape " + to_string(input_) + ", got " +
                                to_string(s));
    }
    Var h = x;
    for (auto& m : modules_) h = m->forward(h, training);
    return h;
}

std::vector<Parameter*> Network::parameters() {
    std::vector<Parameter*> out;
    for (auto& m : modules_) m->collect_parameters(out);
    return out;
}

void Network::save(Archive& a) const {
    for (const auto& m : modules_) {
        std::vector<Parameter*> ps;
        m->collect_parameters(ps);
        for (const Parameter* p : ps) a.put("param/" + p->id, p->value);
        m->save_state(a);
    }
}

void Network::load(const Archive& a) {
    for (auto& m : modules_) {
        std::vector<Parameter*> ps;
        m->collect_parameters(ps);
        for (Parameter* p : ps) {
            const Tensor& t = a.tensor("param/" + p->id);
            if (t.shape() != p->value.shape()) {
                throw ContractViolation("checkpoint shape mismatch for '" + p->id + "': stored " +
                                        to_string(t.shape()) + ", model expects " + to_string(p->value.shape()));
            }
            p->value = t;
            p->zero_grad();
        }
        m->load_state(a);
    }
}

Models build_models(const ModelPreset& preset, const PerturbVariant& perturb, std::uint64_t seed,
                    bool per_sample_mask, std::size_t sn_iterations) {
    LayerOptions g_opts;
    LayerOptions d_opts;
    d_opts.spectral_norm = true;
    d_opts.sn_iterations = sn_iterations;
    d_opts.perturb = perturb;
    d_opts.per_sample_mask = per_sample_mask;
    return Models{Network(preset.generator, g_opts, seed), Network(preset.discriminator, d_opts, seed)};
}

}  // namespace pconv
