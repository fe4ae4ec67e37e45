#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pconv/autodiff.hpp"
#include "pconv/checkpoint.hpp"
#include "pconv/ops.hpp"
#include "pconv/perturb.hpp"
#include "pconv/rng.hpp"
#include "pconv/spectral_norm.hpp"

namespace pconv {

/// How a weight layer is wrapped: discriminator layers get spectral
/// normalization and an input perturbation, generator layers neither.
struct LayerOptions {
    bool spectral_norm = false;
    std::size_t sn_iterations = 1;
    PerturbVariant perturb;
    bool per_sample_mask = false;
};

/// Orthogonal initialization of a weight viewed as shape[0] x rest.
Tensor orthogonal_init(const Shape& shape, RngStream& rng, double gain = 1.0);

/// Building block of a network. Parameters are owned by the module; their
/// ids are globally unique paths such as "D/1/conv2/weight".
class Module {
public:
    virtual ~Module() = default;
    virtual Var forward(const Var& x, bool training) = 0;
    virtual void collect_parameters(std::vector<Parameter*>& out) = 0;
    /// Non-parameter persistent state (power-iteration vectors, running
    /// statistics, random stream counters).
    virtual void save_state(Archive& /*archive*/) const {}
    virtual void load_state(const Archive& /*archive*/) {}
};

/// Input-side perturbation owned by one weight layer.
class PerturbStage {
public:
    PerturbStage(std::string id, const LayerOptions& options, std::uint64_t seed);
    Var apply(const Var& x, bool training);
    void save_state(Archive& a) const;
    void load_state(const Archive& a);
    RngStream& rng() { return rng_; }

private:
    std::string id_;
    PerturbVariant variant_;
    bool per_sample_;
    RngStream rng_;
};

/// y = perturb(x) * W^T + b, W stored out x in.
class Dense final : public Module {
public:
    Dense(std::string id, std::size_t in, std::size_t out, const LayerOptions& options, std::uint64_t seed);
    Var forward(const Var& x, bool training) override;
    void collect_parameters(std::vector<Parameter*>& out) override;
    void save_state(Archive& a) const override;
    void load_state(const Archive& a) override;

    Parameter& weight() { return weight_; }
    Parameter& bias() { return bias_; }
    std::optional<SpectralNormState>& spectral_state() { return sn_; }
    PerturbStage& perturb() { return perturb_; }

private:
    std::string id_;
    Parameter weight_;
    Parameter bias_;
    std::optional<SpectralNormState> sn_;
    PerturbStage perturb_;
};

/// Stride-1 convolution with "same" zero padding (pad = (k - 1) / 2).
class Conv2d final : public Module {
public:
    Conv2d(std::string id, std::size_t in, std::size_t out, std::size_t kernel, const LayerOptions& options,
           std::uint64_t seed);
    Var forward(const Var& x, bool training) override;
    void collect_parameters(std::vector<Parameter*>& out) override;
    void save_state(Archive& a) const override;
    void load_state(const Archive& a) override;

    Parameter& weight() { return weight_; }
    std::optional<SpectralNormState>& spectral_state() { return sn_; }
    PerturbStage& perturb() { return perturb_; }

private:
    std::string id_;
    std::size_t pad_;
    Parameter weight_;
    Parameter bias_;
    std::optional<SpectralNormState> sn_;
    PerturbStage perturb_;
};

class BatchNorm final : public Module {
public:
    BatchNorm(std::string id, std::size_t channels);
    Var forward(const Var& x, bool training) override;
    void collect_parameters(std::vector<Parameter*>& out) override;
    void save_state(Archive& a) const override;
    void load_state(const Archive& a) override;

private:
    std::string id_;
    Parameter gamma_;
    Parameter beta_;
    ops::BatchNormState state_;
};

/// Parameter-free unary primitive (relu, tanh, pooling...).
class Primitive final : public Module {
public:
    explicit Primitive(ops::PrimitiveKind kind) : kind_(kind) {}
    Var forward(const Var& x, bool) override { return ops::apply_primitive(kind_, x); }
    void collect_parameters(std::vector<Parameter*>&) override {}

private:
    ops::PrimitiveKind kind_;
};

/// N x (C*H*W) -> N x C x H x W.
class Reshape final : public Module {
public:
    explicit Reshape(Shape per_sample) : per_sample_(std::move(per_sample)) {}
    Var forward(const Var& x, bool training) override;
    void collect_parameters(std::vector<Parameter*>&) override {}

private:
    Shape per_sample_;
};

/// Discriminator residual block.
///
/// main:     [relu] -> conv3x3 -> relu -> conv3x3 -> [avgpool]
/// shortcut: conv1x1 -> [avgpool], or identity when shape is preserved
/// The first block of a network (`first`) skips the leading relu and pools
/// before its shortcut convolution.
class DiscResBlock final : public Module {
public:
    DiscResBlock(std::string id, std::size_t in, std::size_t out, bool down, bool first, const LayerOptions& options,
                 std::uint64_t seed);
    Var forward(const Var& x, bool training) override;
    void collect_parameters(std::vector<Parameter*>& out) override;
    void save_state(Archive& a) const override;
    void load_state(const Archive& a) override;

private:
    bool down_;
    bool first_;
    Conv2d conv1_;
    Conv2d conv2_;
    std::optional<Conv2d> shortcut_;
};

/// Generator residual block.
///
/// main:     bn -> relu -> upsample -> conv3x3 -> bn -> relu -> conv3x3
/// shortcut: upsample -> conv1x1
class GenResBlock final : public Module {
public:
    GenResBlock(std::string id, std::size_t in, std::size_t out, bool up, const LayerOptions& options,
                std::uint64_t seed);
    Var forward(const Var& x, bool training) override;
    void collect_parameters(std::vector<Parameter*>& out) override;
    void save_state(Archive& a) const override;
    void load_state(const Archive& a) override;

private:
    bool up_;
    BatchNorm bn1_;
    Conv2d conv1_;
    BatchNorm bn2_;
    Conv2d conv2_;
    std::optional<Conv2d> shortcut_;
};

}  // namespace pconv
