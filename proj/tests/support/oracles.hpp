#pragma once

// Independent reference implementations used by the tests. None of these
// share code with the library beyond the Tensor container.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pconv/rng.hpp"
#include "pconv/tensor.hpp"

namespace oracle {

using pconv::Shape;
using pconv::Tensor;

inline Tensor randn(Shape shape, std::uint64_t seed, double scale = 1.0) {
    pconv::RngStream rng(seed, "oracle/randn");
    Tensor t(std::move(shape));
    for (double& v : t.data()) v = scale * rng.normal();
    return t;
}

// Direct six-loop cross-correlation.
inline Tensor conv2d(const Tensor& x, const Tensor& w, std::size_t stride, std::size_t pad) {
    const auto N = x.extent(0), C = x.extent(1), H = x.extent(2), W = x.extent(3);
    const auto F = w.extent(0), kh = w.extent(2), kw = w.extent(3);
    const auto Ho = (H + 2 * pad - kh) / stride + 1, Wo = (W + 2 * pad - kw) / stride + 1;
    Tensor y(Shape{N, F, Ho, Wo});
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t f = 0; f < F; ++f)
            for (std::size_t i = 0; i < Ho; ++i)
                for (std::size_t j = 0; j < Wo; ++j) {
                    long double acc = 0;
                    for (std::size_t c = 0; c < C; ++c)
                        for (std::size_t a = 0; a < kh; ++a)
                            for (std::size_t b = 0; b < kw; ++b) {
                                const long r = static_cast<long>(i * stride + a) - static_cast<long>(pad);
                                const long s = static_cast<long>(j * stride + b) - static_cast<long>(pad);
                                if (r < 0 || s < 0 || r >= static_cast<long>(H) || s >= static_cast<long>(W)) continue;
                                acc += static_cast<long double>(x.at(n, c, r, s)) * w.at(f, c, a, b);
                            }
                    y.at(n, f, i, j) = static_cast<double>(acc);
                }
    return y;
}

using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// Principal square root by the Denman-Beavers iteration in extended precision.
inline LMat sqrtm_denman_beavers(const LMat& a, int iters = 100) {
    LMat y = a;
    LMat z = LMat::Identity(a.rows(), a.cols());
    for (int k = 0; k < iters; ++k) {
        const LMat yi = y.inverse();
        const LMat zi = z.inverse();
        const LMat y2 = 0.5L * (y + zi);
        z = 0.5L * (z + yi);
        if ((y2 - y).cwiseAbs().maxCoeff() <= 1e-30L * (1 + y.cwiseAbs().maxCoeff())) {
            y = y2;
            break;
        }
        y = y2;
    }
    return y;
}

// FID with the unsymmetrized product (C_p C_q)^{1/2}.
inline double fid(const std::vector<double>& mp, const LMat& cp, const std::vector<double>& mq, const LMat& cq) {
    long double mean = 0;
    for (std::size_t i = 0; i < mp.size(); ++i) mean += (static_cast<long double>(mp[i]) - mq[i]) * (mp[i] - mq[i]);
    const LMat s = sqrtm_denman_beavers(cp * cq);
    return static_cast<double>(mean + cp.trace() + cq.trace() - 2 * s.trace());
}

// Random symmetric positive definite d x d matrix, eigenvalues in [lo, hi].
inline LMat random_spd(std::size_t d, pconv::RngStream& rng, double lo = 0.05, double hi = 3.0) {
    Eigen::MatrixXd g(d, d);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    const Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd ev(d);
    for (std::size_t i = 0; i < d; ++i) ev[static_cast<Eigen::Index>(i)] = rng.uniform(lo, hi);
    const Eigen::MatrixXd m = q * ev.asDiagonal() * q.transpose();
    LMat out = (0.5 * (m + m.transpose())).cast<long double>();
    return out;
}

// Extremes of sum_{i in S} c_i over subsets S of the given size, by brute force.
struct SubsetRange {
    double min = 0;
    double max = 0;
};
inline SubsetRange subset_sum_range(const std::vector<double>& c, std::size_t size) {
    SubsetRange r{INFINITY, -INFINITY};
    const std::size_t n = c.size();
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + static_cast<long>(size), true);
    do {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (pick[i]) s += c[i];
        r.min = std::min(r.min, s);
        r.max = std::max(r.max, s);
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return r;
}

}  // namespace oracle
