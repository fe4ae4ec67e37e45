#pragma once

#include <cstdint>
#include <vector>

#include "pconv/tensor.hpp"

namespace pconv {

/// Frozen, randomly initialized conv encoder used for desk-scale FID.
///
/// Four 3x3 conv + ReLU layers (3 -> 16 -> 32 -> 32 -> 64 channels) with 2x2
/// average pooling after the first three and global average pooling at the
/// end, giving 64-D features. Weights are He-normal from (seed, layer), so the
/// feature space is fixed by the seed alone. Distances in this space are only
/// comparable with each other, never with Inception-based FID.
class FeatureEncoder {
public:
    static constexpr std::size_t kFeatures = 64;

    explicit FeatureEncoder(std::uint64_t seed = 0);

    /// N x 3 x H x W images (H, W divisible by 8) -> N x 64 features.
    Tensor encode(const Tensor& images) const;

private:
    std::vector<Tensor> weights_;
    std::vector<Tensor> biases_;
};

}  // namespace pconv
