#include <gtest/gtest.h>

#include <Eigen/SVD>

#include "oracles.hpp"
#include "pconv/gradcheck.hpp"
#include "pconv/ops.hpp"
#include "pconv/spectral_norm.hpp"

using namespace pconv;

namespace {

double top_singular_value(const Tensor& w) {
    const std::size_t rows = w.extent(0), cols = w.size() / rows;
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = w[i * cols + j];
    return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

}  // namespace

TEST(SpectralNorm, PowerIterationConvergesToTopSingularValue) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const Tensor w = oracle::randn({8 + s, 3, 3, 3}, 100 + s);
        RngStream rng(s, "sn");
        SpectralNormState st = init_spectral_norm(w, rng);
        power_iterate(w, st, 200);
        EXPECT_NEAR(sigma_estimate(w, st) / top_singular_value(w), 1.0, 1e-6);
    }
}

TEST(SpectralNorm, NormalizedWeightHasUnitSpectralNorm) {
    const Tensor w = oracle::randn({16, 32}, 5);
    RngStream rng(5, "sn");
    SpectralNormState st = init_spectral_norm(w, rng);
    st.power_iterations = 100;
    Tape t;
    Parameter p("w", w);
    const Tensor wn = spectral_normalize(t.parameter(p), st, true).value();
    EXPECT_NEAR(top_singular_value(wn), 1.0, 1e-6);
}

TEST(SpectralNorm, EstimateNeverExceedsTrueValue) {
    const Tensor w = oracle::randn({6, 10}, 9);
    RngStream rng(9, "sn");
    SpectralNormState st = init_spectral_norm(w, rng);
    const double truth = top_singular_value(w);
    double prev = 0.0;
    for (int i = 0; i < 30; ++i) {
        power_iterate(w, st, 1);
        const double s = sigma_estimate(w, st);
        EXPECT_LE(s, truth * (1 + 1e-12));
        EXPECT_GE(s, prev - 1e-12);
        prev = s;
    }
}

TEST(SpectralNorm, InferenceDoesNotAdvanceState) {
    const Tensor w = oracle::randn({4, 5}, 1);
    RngStream rng(1, "sn");
    SpectralNormState st = init_spectral_norm(w, rng);
    const Tensor u = st.u;
    Tape t;
    Parameter p("w", w);
    spectral_normalize(t.parameter(p), st, false);
    EXPECT_EQ(st.u, u);
    spectral_normalize(t.parameter(p), st, true);
    EXPECT_NE(st.u, u);
}

TEST(SpectralNorm, ZeroWeightIsFloored) {
    const Tensor w(Shape{3, 3}, 0.0);
    RngStream rng(2, "sn");
    SpectralNormState st = init_spectral_norm(w, rng);
    power_iterate(w, st, 3);
    EXPECT_EQ(sigma_estimate(w, st), 1e-12);
}

TEST(SpectralNorm, GradientFlowsThroughSigma) {
    Parameter w("w", oracle::randn({5, 2, 3, 3}, 31));
    const Tensor r = oracle::randn({5, 2, 3, 3}, 32);
    // The power-iteration estimate is not differentiated, so hold it fixed.
    RngStream rng(3, "sn");
    const SpectralNormState fixed = init_spectral_norm(w.value, rng);
    Fragment frag{{&w}, [&](Tape& t, std::uint64_t) {
                      SpectralNormState st = fixed;
                      return ops::sum(ops::mul(spectral_normalize(t.parameter(w), st, false), t.constant(r)));
                  }};
    EXPECT_LT(grad_check(frag, 3).max_rel_error, 1e-6);
}
