#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "pconv/models.hpp"
#include "pconv/perturb.hpp"
#include "pconv/rng.hpp"
#include "pconv/tensor.hpp"

namespace pconv {

// ---- Frechet distance -----------------------------------------------------

struct GaussianStats {
    Tensor mean;  ///< [d]
    Tensor cov;   ///< [d x d], symmetric
    std::size_t n = 0;
};

/// Sample mean and unbiased (1/(n-1)) covariance of the rows of an n x d
/// matrix (higher-rank inputs are flattened per row). Needs n >= 2.
GaussianStats gaussian_stats(const Tensor& samples);

/// ||mu_p - mu_q||^2 + tr(C_p) + tr(C_q) - 2 tr((C_p^1/2 C_q C_p^1/2)^1/2),
/// with negative eigenvalues clamped to 0 and the result clamped to >= 0.
double fid(const GaussianStats& p, const GaussianStats& q);

// ---- Mode coverage --------------------------------------------------------

struct ModeCoverageReport {
    std::size_t covered_modes = 0;
    std::size_t n_samples = 0;
    std::vector<std::size_t> nearest_counts;  ///< samples whose nearest mode is i
    std::vector<std::size_t> hq_counts;       ///< of those, within 3 sigma
    double hq_fraction = 0.0;
    std::size_t threshold = 0;                ///< max(20, n / 100)
};

ModeCoverageReport mode_coverage(const Tensor& samples, const std::vector<std::array<double, 2>>& modes, double sigma);

// ---- Memorization ---------------------------------------------------------

struct MemorizationReport {
    double train_real_acc = 0.0;
    double test_real_acc = 0.0;
    double gap = 0.0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
};

/// Fractions of train and held-out reals that D scores above zero, with D
/// in inference mode.
MemorizationReport memorization_gap(Network& discriminator, const Tensor& train_reals, const Tensor& heldout_reals);
MemorizationReport memorization_from_scores(const std::vector<double>& train_scores,
                                            const std::vector<double>& heldout_scores);

// ---- Output-change range of one linear unit --------------------------------

struct DeltaYOptions {
    /// Estimate from random masks instead of enumerating every subset.
    bool sampling = false;
    std::size_t trials = 10000;
    std::uint64_t seed = 0;
    /// Scaling values tried per subset by the exhaustive PConv branch
    /// (evenly spaced over [0, 1], endpoints included).
    std::size_t k_grid = 11;
};

/// Range of dy = (x - x_hat)^T w where x_hat is the perturbed input.
///
/// `analytic_min` / `analytic_max` are d_min^T w and d_max^T w with d the
/// change vector x - x_hat of the extreme perturbation; `x_hat_min` /
/// `x_hat_max` hold the perturbed vectors themselves. Dropping channels
/// removes their contributions x_i w_i, so the extremes are the sums of the
/// m smallest and m largest contributions. PConv scales the same sums by
/// (1 - k) with k in [0, 1], which adds 0 (k = 1) to the range. Gaussian
/// multipliers are unbounded, so that variant has no analytic range and is
/// always sampled.
struct DeltaYReport {
    PerturbVariant variant;
    std::size_t n = 0;
    std::size_t selected = 0;  ///< round(ratio * n)
    bool exhaustive = false;
    std::size_t evaluations = 0;
    double empirical_min = 0.0;
    double empirical_max = 0.0;
    double empirical_min_abs = 0.0;
    double empirical_max_abs = 0.0;
    std::optional<double> analytic_min;
    std::optional<double> analytic_max;
    std::vector<double> x_hat_min;
    std::vector<double> x_hat_max;
};

/// Exhaustive branch needs n <= 20 unless options.sampling is set.
DeltaYReport delta_y_range(const std::vector<double>& x, const std::vector<double>& w, const PerturbVariant& variant,
                           const DeltaYOptions& options = {});

// ---- Probability map --------------------------------------------------------

struct ProbMap {
    static constexpr std::size_t kGrid = 20;
    static constexpr double kLo = -0.2;
    static constexpr double kHi = 1.2;

    PerturbVariant variant;
    std::size_t n_samples = 0;
    /// counts[iy * kGrid + ix]; x is the first output coordinate.
    std::vector<std::size_t> counts = std::vector<std::size_t>(kGrid * kGrid, 0);

    static std::size_t cell(double coordinate);
    std::size_t occupied() const;
};

/// Perturbs v = (1, 1) `n_samples` times and histograms the outputs; values
/// outside the window land in the edge cells.
ProbMap probmap(const PerturbVariant& variant, std::size_t n_samples, RngStream& rng);

/// Cells a variant can reach from v = (1, 1), found by a dense sweep over
/// channel subsets and scaling values.
std::vector<bool> reachable_cells(const PerturbVariant& variant);

}  // namespace pconv
