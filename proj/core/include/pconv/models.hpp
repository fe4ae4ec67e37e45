#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pconv/layers.hpp"

namespace pconv {

enum class NetRole { generator, discriminator };

enum class BlockKind {
    dense,            ///< fully connected, `channels` outputs
    reshape,          ///< flat features -> channels x height x width
    conv3x3,          ///< 3x3 convolution to `channels`
    resblock_up,      ///< generator residual block, x2 upsampling
    resblock_down,    ///< discriminator residual block, x2 average pooling
    resblock,         ///< residual block without resampling
    batchnorm,
    relu,
    tanh,
    global_sum_pool,
};

struct BlockSpec {
    BlockKind kind;
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
};

/// Layer-by-layer description of one network.
struct ArchPreset {
    std::string name;
    NetRole role = NetRole::generator;
    /// Per-sample input shape: {latent} for generators, {features} or
    /// {channels, height, width} for discriminators.
    Shape input;
    std::vector<BlockSpec> blocks;
};

struct ModelPreset {
    ArchPreset generator;
    ArchPreset discriminator;
    std::size_t latent_dim = 0;
};

/// 2-D mixture toy: G and D are 4-layer MLPs of width 128 with ReLU.
ModelPreset gmm8_preset(std::size_t latent_dim = 2, std::size_t width = 128);

/// 32x32 residual GAN: G = dense(4x4xCg) + 3 up blocks + BN/ReLU + conv3x3 + tanh,
/// D = 2 down blocks + 2 plain blocks + ReLU + global sum pool + dense(1).
/// Channel widths are the full-size 256 (G) and 128 (D) divided by `width_divisor`.
/// `resolution` must be 8 * 2^k; the generator starts at resolution / 8.
ModelPreset tiny32_preset(std::size_t latent_dim = 128, std::size_t width_divisor = 4, std::size_t resolution = 32);

/// Structural checks: channel chain consistency, even extents before
/// pooling, and the required heads/tails of image networks. Throws
/// ContractViolation describing the first problem.
void validate_preset(const ArchPreset& preset);

/// Sequential network built from an ArchPreset.
class Network {
public:
    Network(const ArchPreset& preset, const LayerOptions& weight_options, std::uint64_t seed);
    Network(Network&&) noexcept = default;
    Network& operator=(Network&&) noexcept = default;

    Var forward(const Var& x, bool training);

    std::vector<Parameter*> parameters();
    const std::string& name() const noexcept { return name_; }
    const Shape& input_shape() const noexcept { return input_; }
    const Shape& output_shape() const noexcept { return output_; }

    /// Parameters under "param/<id>" plus every module's persistent state.
    void save(Archive& a) const;
    /// Throws ContractViolation when shapes disagree with this architecture
    /// and IoError when entries are missing.
    void load(const Archive& a);

private:
    std::string name_;
    Shape input_;
    Shape output_;
    std::vector<std::unique_ptr<Module>> modules_;
};

struct Models {
    Network generator;
    Network discriminator;
};

/// Builds G with plain layers and D with spectral normalization and the
/// given input perturbation on every dense and convolutional layer.
Models build_models(const ModelPreset& preset, const PerturbVariant& perturb, std::uint64_t seed,
                    bool per_sample_mask = false, std::size_t sn_iterations = 1);

}  // namespace pconv
