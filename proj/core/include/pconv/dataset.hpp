#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pconv/rng.hpp"
#include "pconv/tensor.hpp"

namespace pconv {

enum class DatasetKind { gmm8, synthetic_images, image_dir };

struct DatasetSpec {
    DatasetKind kind = DatasetKind::gmm8;

    // gmm8
    std::size_t modes = 8;
    double radius = 2.0;
    double sigma = 0.02;

    // synthetic_images / image_dir
    std::size_t resolution = 32;
    std::string recipe = "shapes";
    std::string path;

    std::size_t n_train = 10000;
    std::size_t n_heldout = 0;
    /// Fraction of the training split actually used (1, 0.5, 0.25...).
    /// The held-out split is unaffected.
    double fraction = 1.0;
    /// Seed of the data itself, independent of the run seed.
    std::uint64_t seed = 0;
};

struct Dataset {
    Tensor train;    ///< n_train x sample shape
    Tensor heldout;  ///< n_heldout x sample shape (may have zero rows)
    Shape sample_shape;
};

/// Mode centers evenly spaced on a circle.
std::vector<std::array<double, 2>> gmm_centers(std::size_t modes, double radius);

/// Builds the train/held-out splits; pixel data lies in [-1, 1].
/// Throws ConfigError for unusable specs and IoError for unreadable folders.
Dataset make_dataset(const DatasetSpec& spec);

/// One synthetic image (3 x r x r) from the named recipe.
Tensor synthetic_image(const std::string& recipe, std::size_t resolution, RngStream& rng);

/// Reads a binary PPM (P6) or PGM (P5) file, nearest-resized to
/// resolution x resolution and scaled to [-1, 1] as 3 x r x r.
Tensor read_netpbm(const std::string& path, std::size_t resolution);

/// Shuffled pass over [0, n): each epoch is a fresh permutation derived
/// from (seed, epoch); a batch never straddles an epoch boundary, so the
/// leftover tail of an epoch is skipped and no index repeats within a batch.
class EpochSampler {
public:
    EpochSampler() = default;
    EpochSampler(std::size_t n, std::uint64_t seed);

    std::vector<std::size_t> next(std::size_t batch);

    std::uint64_t epoch() const noexcept { return epoch_; }
    std::size_t cursor() const noexcept { return cursor_; }
    void restore(std::uint64_t epoch, std::size_t cursor);

private:
    void reshuffle();

    std::size_t n_ = 0;
    std::uint64_t seed_ = 0;
    std::uint64_t epoch_ = 0;
    std::size_t cursor_ = 0;
    std::vector<std::size_t> order_;
};

}  // namespace pconv
