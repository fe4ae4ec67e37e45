#include "pconv/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "pconv/errors.hpp"
#include "pconv/trainer.hpp"

namespace pconv {
namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

constexpr double kEigenClamp = 1e-10;

Mat to_mat(const Tensor& t, std::size_t d) {
    return Eigen::Map<const Mat>(t.raw(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
}

Mat psd_sqrt(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
    Vec ev = es.eigenvalues();
    for (auto& e : ev) e = e > kEigenClamp ? std::sqrt(e) : 0.0;
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

GaussianStats gaussian_stats(const Tensor& samples) {
    if (samples.rank() < 2 || samples.extent(0) < 2) {
        throw ContractViolation("gaussian_stats needs at least two samples, got shape " + to_string(samples.shape()));
    }
    const std::size_t n = samples.extent(0);
    const std::size_t d = samples.size() / n;
    const Eigen::Map<const Mat> x(samples.raw(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    const Vec mu = x.colwise().mean();
    const Mat centered = x.rowwise() - mu.transpose();
    Mat c = (centered.transpose() * centered) / static_cast<double>(n - 1);
    c = 0.5 * (c + c.transpose()).eval();

    GaussianStats s;
    s.n = n;
    s.mean = Tensor(Shape{d}, std::vector<double>(mu.data(), mu.data() + d));
    s.cov = Tensor(Shape{d, d});
    Eigen::Map<Mat>(s.cov.raw(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) = c;
    return s;
}

double fid(const GaussianStats& p, const GaussianStats& q) {
    const std::size_t d = p.mean.size();
    if (q.mean.size() != d || p.cov.shape() != Shape{d, d} || q.cov.shape() != Shape{d, d}) {
        throw ContractViolation("fid: dimension mismatch (" + to_string(p.mean.shape()) + " vs " +
                                to_string(q.mean.shape()) + ")");
    }
    if (!p.mean.all_finite() || !q.mean.all_finite() || !p.cov.all_finite() || !q.cov.all_finite()) {
        throw NumericError("fid: non-finite statistics");
    }
    const Mat cp = to_mat(p.cov, d);
    const Mat cq = to_mat(q.cov, d);
    const Mat sp = psd_sqrt(cp);
    Mat inner = sp * cq * sp;
    inner = 0.5 * (inner + inner.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(inner, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("fid: eigendecomposition failed");
    double tr_sqrt = 0.0;
    for (double e : es.eigenvalues()) tr_sqrt += std::sqrt(std::max(e, 0.0));

    double mean_term = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double diff = p.mean[i] - q.mean[i];
        mean_term += diff * diff;
    }
    const double value = mean_term + cp.trace() + cq.trace() - 2.0 * tr_sqrt;
    if (!std::isfinite(value)) throw NumericError("fid: non-finite result");
    // Rounding leaves a residue of order eps * trace for identical inputs.
    const double scale = cp.trace() + cq.trace();
    if (value <= 64.0 * std::numeric_limits<double>::epsilon() * scale) return 0.0;
    return value;
}

ModeCoverageReport mode_coverage(const Tensor& samples, const std::vector<std::array<double, 2>>& modes,
                                 double sigma) {
    if (modes.empty()) throw ContractViolation("mode_coverage: empty mode list");
    if (samples.rank() != 2 || samples.extent(1) != 2 || samples.extent(0) == 0) {
        throw ContractViolation("mode_coverage expects n x 2 samples with n >= 1, got " + to_string(samples.shape()));
    }
    ModeCoverageReport r;
    r.n_samples = samples.extent(0);
    r.nearest_counts.assign(modes.size(), 0);
    r.hq_counts.assign(modes.size(), 0);
    r.threshold = std::max<std::size_t>(20, r.n_samples / 100);
    const double radius2 = 9.0 * sigma * sigma;
    std::size_t hq = 0;
    for (std::size_t i = 0; i < r.n_samples; ++i) {
        std::size_t best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < modes.size(); ++m) {
            const double dx = samples.at(i, 0) - modes[m][0], dy = samples.at(i, 1) - modes[m][1];
            const double d2 = dx * dx + dy * dy;
            if (d2 < best_d2) {
                best_d2 = d2;
                best = m;
            }
        }
        ++r.nearest_counts[best];
        if (best_d2 <= radius2) {
            ++r.hq_counts[best];
            ++hq;
        }
    }
    for (std::size_t c : r.hq_counts) r.covered_modes += c >= r.threshold;
    r.hq_fraction = static_cast<double>(hq) / static_cast<double>(r.n_samples);
    return r;
}

MemorizationReport memorization_from_scores(const std::vector<double>& train_scores,
                                            const std::vector<double>& heldout_scores) {
    if (train_scores.empty() || heldout_scores.empty()) throw ContractViolation("memorization_gap: empty sample set");
    auto frac = [](const std::vector<double>& s) {
        const auto pos = std::count_if(s.begin(), s.end(), real_fake_decision);
        return static_cast<double>(pos) / static_cast<double>(s.size());
    };
    MemorizationReport r;
    r.train_real_acc = frac(train_scores);
    r.test_real_acc = frac(heldout_scores);
    r.gap = r.train_real_acc - r.test_real_acc;
    r.n_train = train_scores.size();
    r.n_test = heldout_scores.size();
    return r;
}

MemorizationReport memorization_gap(Network& d, const Tensor& train_reals, const Tensor& heldout_reals) {
    if (train_reals.rank() == 0 || train_reals.extent(0) == 0 || heldout_reals.rank() == 0 ||
        heldout_reals.extent(0) == 0) {
        throw ContractViolation("memorization_gap: empty sample set");
    }
    return memorization_from_scores(score_discriminator(d, train_reals), score_discriminator(d, heldout_reals));
}

namespace {

// Allowed selection sizes of a dropping/scaling variant on n channels.
std::vector<std::size_t> selection_sizes(const PerturbVariant& v, std::size_t n) {
    if (v.kind == PerturbKind::sdrop_random_ratio) {
        const double lo = std::max(0.0, v.ratio - v.halfwidth);
        const double hi = std::min(1.0, v.ratio + v.halfwidth);
        const std::size_t m_lo = selection_count(n, lo);
        const std::size_t m_hi = selection_count(n, hi > lo ? std::nextafter(hi, lo) : hi);
        std::vector<std::size_t> out;
        for (std::size_t m = m_lo; m <= m_hi; ++m) out.push_back(m);
        return out;
    }
    if (v.kind == PerturbKind::none) return {0};
    return {selection_count(n, v.ratio)};
}

struct Extreme {
    double value;
    std::vector<double> x_hat;
};

// Sum of the m smallest (or largest) contributions, and the input with
// those channels dropped.
Extreme drop_extreme(const std::vector<double>& x, const std::vector<double>& w, std::size_t m, bool largest) {
    std::vector<std::size_t> order(x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return largest ? x[a] * w[a] > x[b] * w[b] : x[a] * w[a] < x[b] * w[b];
    });
    Extreme e{0.0, x};
    for (std::size_t i = 0; i < m; ++i) {
        e.value += x[order[i]] * w[order[i]];
        e.x_hat[order[i]] = 0.0;
    }
    return e;
}

}  // namespace

DeltaYReport delta_y_range(const std::vector<double>& x, const std::vector<double>& w, const PerturbVariant& variant,
                           const DeltaYOptions& opt) {
    variant.validate();
    const std::size_t n = x.size();
    if (n == 0 || w.size() != n) throw ContractViolation("delta_y_range: x and w must be non-empty and equal length");
    const bool gaussian = variant.kind == PerturbKind::sdrop_gaussian;
    const bool sampled = opt.sampling || gaussian;
    if (!sampled && n > 20) {
        throw ContractViolation("delta_y_range: n = " + std::to_string(n) +
                                " is too large to enumerate; enable sampling");
    }

    DeltaYReport r;
    r.variant = variant;
    r.n = n;
    r.selected = selection_count(n, variant.ratio);
    r.exhaustive = !sampled;
    r.empirical_min = r.empirical_min_abs = std::numeric_limits<double>::infinity();
    r.empirical_max = r.empirical_max_abs = -std::numeric_limits<double>::infinity();
    auto observe = [&](double dy) {
        r.empirical_min = std::min(r.empirical_min, dy);
        r.empirical_max = std::max(r.empirical_max, dy);
        r.empirical_min_abs = std::min(r.empirical_min_abs, std::abs(dy));
        r.empirical_max_abs = std::max(r.empirical_max_abs, std::abs(dy));
        ++r.evaluations;
    };

    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = x[i] * w[i];

    if (sampled) {
        RngStream rng(opt.seed, "deltay");
        for (std::size_t t = 0; t < opt.trials; ++t) {
            const Tensor mult = draw_multipliers(variant, n, rng);
            double dy = 0.0;
            for (std::size_t i = 0; i < n; ++i) dy += (1.0 - mult[i]) * c[i];
            observe(dy);
        }
    } else {
        const auto sizes = selection_sizes(variant, n);
        std::vector<double> ks{0.0};
        if (variant.kind == PerturbKind::pconv) {
            const std::size_t g = std::max<std::size_t>(opt.k_grid, 2);
            ks.clear();
            for (std::size_t j = 0; j < g; ++j) ks.push_back(static_cast<double>(j) / static_cast<double>(g - 1));
        }
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            const auto bits = static_cast<std::size_t>(std::popcount(mask));
            if (std::find(sizes.begin(), sizes.end(), bits) == sizes.end()) continue;
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (mask >> i & 1u) s += c[i];
            for (double k : ks) observe((1.0 - k) * s);
        }
    }

    if (!gaussian) {
        const auto sizes = selection_sizes(variant, n);
        // With several admissible sizes the extremes may come from any of them.
        Extreme best_lo = drop_extreme(x, w, sizes.front(), false);
        Extreme best_hi = drop_extreme(x, w, sizes.front(), true);
        for (std::size_t m : sizes) {
            Extreme a = drop_extreme(x, w, m, false), b = drop_extreme(x, w, m, true);
            if (a.value < best_lo.value) best_lo = std::move(a);
            if (b.value > best_hi.value) best_hi = std::move(b);
        }
        if (variant.kind == PerturbKind::pconv) {
            // k = 1 leaves x untouched.
            if (best_lo.value > 0.0) best_lo = Extreme{0.0, x};
            if (best_hi.value < 0.0) best_hi = Extreme{0.0, x};
        }
        r.analytic_min = best_lo.value;
        r.analytic_max = best_hi.value;
        r.x_hat_min = std::move(best_lo.x_hat);
        r.x_hat_max = std::move(best_hi.x_hat);
    }
    return r;
}

std::size_t ProbMap::cell(double v) {
    const double width = (kHi - kLo) / static_cast<double>(kGrid);
    const double f = std::floor((v - kLo) / width);
    if (!(f >= 0.0)) return 0;
    return std::min(kGrid - 1, static_cast<std::size_t>(f));
}

std::size_t ProbMap::occupied() const {
    return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));
}

ProbMap probmap(const PerturbVariant& variant, std::size_t n_samples, RngStream& rng) {
    variant.validate();
    ProbMap pm;
    pm.variant = variant;
    pm.n_samples = n_samples;
    for (std::size_t s = 0; s < n_samples; ++s) {
        const Tensor m = draw_multipliers(variant, 2, rng);
        ++pm.counts[ProbMap::cell(m[1]) * ProbMap::kGrid + ProbMap::cell(m[0])];
    }
    return pm;
}

std::vector<bool> reachable_cells(const PerturbVariant& variant) {
    variant.validate();
    constexpr std::size_t g = ProbMap::kGrid;
    std::vector<bool> out(g * g, false);
    auto mark = [&](double a, double b) { out[ProbMap::cell(b) * g + ProbMap::cell(a)] = true; };
    switch (variant.kind) {
        case PerturbKind::sdrop_gaussian:
            // Unbounded support: every cell.
            std::fill(out.begin(), out.end(), true);
            return out;
        case PerturbKind::none: mark(1.0, 1.0); return out;
        default: break;
    }
    const bool scaled = variant.kind == PerturbKind::pconv;
    constexpr std::size_t steps = 100000;
    for (std::size_t m : selection_sizes(variant, 2)) {
        for (std::uint32_t mask = 0; mask < 4; ++mask) {
            if (static_cast<std::size_t>(std::popcount(mask)) != m) continue;
            for (std::size_t j = 0; j <= (scaled ? steps : 0); ++j) {
                // k ranges over [0, 1).
                const double k = scaled ? static_cast<double>(j) / static_cast<double>(steps + 1) : 0.0;
                mark(mask & 1u ? k : 1.0, mask & 2u ? k : 1.0);
            }
        }
    }
    return out;
}

}  // namespace pconv
