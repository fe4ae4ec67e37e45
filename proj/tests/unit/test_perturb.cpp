#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "pconv/errors.hpp"
#include "pconv/gradcheck.hpp"
#include "pconv/ops.hpp"
#include "pconv/perturb.hpp"

using namespace pconv;

TEST(Perturb, MaskSelectsRoundedCountWithKInUnitInterval) {
    RngStream rng(3, "mask");
    for (std::size_t c : {1u, 7u, 10u, 64u, 128u})
        for (double r : {0.0, 0.1, 0.25, 0.5, 0.9, 1.0})
            for (int rep = 0; rep < 20; ++rep) {
                const ScalingMask m = make_scaling_mask(c, r, rng);
                ASSERT_EQ(m.selected.size(), static_cast<std::size_t>(std::llround(r * static_cast<double>(c))));
                ASSERT_TRUE(std::is_sorted(m.selected.begin(), m.selected.end()));
                ASSERT_EQ(std::set<std::size_t>(m.selected.begin(), m.selected.end()).size(), m.selected.size());
                ASSERT_GE(m.k, 0.0);
                ASSERT_LE(m.k, 1.0);
                const Tensor mult = m.multipliers();
                std::size_t not_one = 0;
                for (std::size_t i = 0; i < c; ++i) {
                    const bool sel = std::binary_search(m.selected.begin(), m.selected.end(), i);
                    if (sel) ASSERT_EQ(mult[i], m.k);
                    else ASSERT_EQ(mult[i], 1.0);
                    not_one += mult[i] != 1.0;
                }
                ASSERT_LE(not_one, m.selected.size());
            }
}

TEST(Perturb, MasksAreFreshPerCall) {
    RngStream rng(1, "fresh");
    const ScalingMask a = make_scaling_mask(64, 0.5, rng);
    const ScalingMask b = make_scaling_mask(64, 0.5, rng);
    EXPECT_TRUE(a.selected != b.selected || a.k != b.k);
}

TEST(Perturb, SelectionIsRoughlyUniform) {
    RngStream rng(2, "uniform");
    std::vector<std::size_t> hits(10, 0);
    const int trials = 20000;
    for (int t = 0; t < trials; ++t)
        for (std::size_t c : make_scaling_mask(10, 0.3, rng).selected) ++hits[c];
    for (std::size_t h : hits) EXPECT_NEAR(static_cast<double>(h) / trials, 0.3, 0.02);
}

TEST(Perturb, KIsRoughlyUniform) {
    RngStream rng(4, "k");
    double s = 0, s2 = 0;
    const int n = 20000;
    for (int t = 0; t < n; ++t) {
        const double k = make_scaling_mask(4, 0.5, rng).k;
        s += k;
        s2 += k * k;
    }
    EXPECT_NEAR(s / n, 0.5, 0.01);
    EXPECT_NEAR(s2 / n - (s / n) * (s / n), 1.0 / 12.0, 0.005);
}

TEST(Perturb, RatioOutsideUnitIntervalIsRejected) {
    RngStream rng(0, "bad");
    EXPECT_THROW(make_scaling_mask(8, -0.1, rng), ContractViolation);
    EXPECT_THROW(make_scaling_mask(8, 1.5, rng), ContractViolation);
    EXPECT_THROW(make_scaling_mask(0, 0.5, rng), ContractViolation);
    EXPECT_THROW(PerturbVariant::pconv(2.0).validate(), ContractViolation);
}

TEST(Perturb, InferenceAndZeroRatioAreIdentity) {
    const Tensor x = oracle::randn({2, 4, 3, 3}, 5);
    const Tensor w = oracle::randn({3, 4, 3, 3}, 6);
    RngStream rng(9, "pconv");
    Tape t;
    const Var vx = t.constant(x), vw = t.constant(w);
    const Tensor plain = ops::conv2d(vx, vw, 1, 1).value();
    EXPECT_EQ(pconv_forward(vx, vw, 0.5, rng, false, 1, 1).value(), plain);
    EXPECT_EQ(rng.counter(), 0u);
    EXPECT_EQ(pconv_forward(vx, vw, 0.0, rng, true, 1, 1).value(), plain);
    for (auto v : {PerturbVariant::sdrop(0.3), PerturbVariant::sdrop_gaussian(0.3)})
        EXPECT_EQ(sdrop_forward(vx, v, rng, false).value(), x);
}

TEST(Perturb, PConvEqualsConvOfMaskedInput) {
    const Tensor x = oracle::randn({2, 8, 4, 4}, 7);
    const Tensor w = oracle::randn({5, 8, 3, 3}, 8);
    RngStream a(11, "l"), b(11, "l");
    Tape t;
    const Tensor y = pconv_forward(t.constant(x), t.constant(w), 0.5, a, true, 1, 1).value();
    const Tensor mult = make_scaling_mask(8, 0.5, b).multipliers();
    Tensor xm = x;
    for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t c = 0; c < 8; ++c)
            for (std::size_t i = 0; i < 16; ++i) xm[(n * 8 + c) * 16 + i] *= mult[c];
    EXPECT_LT(max_abs_diff(y, oracle::conv2d(xm, w, 1, 1)), 1e-12);
    ASSERT_EQ(t.masks().size(), 1u);
    EXPECT_EQ(t.masks()[0].label, "pconv");
}

TEST(Perturb, BackwardReusesTheForwardMask) {
    Parameter x("x", oracle::randn({2, 6, 3, 3}, 12));
    Parameter w("w", oracle::randn({4, 6, 3, 3}, 13));
    const Tensor r = oracle::randn({2, 4, 3, 3}, 14);
    Fragment frag{{&x, &w}, [&](Tape& t, std::uint64_t seed) {
                      RngStream rng(seed, "pc");
                      return ops::sum(
                          ops::mul(pconv_forward(t.parameter(x), t.parameter(w), 0.5, rng, true, 1, 1), t.constant(r)));
                  }};
    EXPECT_LT(grad_check(frag, 17).max_rel_error, 1e-6);

    // Input gradient of the selected channels is k times the unmasked one.
    RngStream rng(17, "pc");
    Tape t;
    const Var vx = t.parameter(x);
    backward(t, ops::sum(ops::mul(pconv_forward(vx, t.parameter(w), 0.5, rng, true, 1, 1), t.constant(r))));
    Tape t2;
    Parameter x2("x", x.value), w2("w", w.value);
    backward(t2, ops::sum(ops::mul(ops::conv2d(t2.parameter(x2), t2.parameter(w2), 1, 1), t2.constant(r))));
    const auto& mult = t.masks()[0].multipliers;
    for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t c = 0; c < 6; ++c)
            for (std::size_t i = 0; i < 9; ++i) {
                const std::size_t j = (n * 6 + c) * 9 + i;
                EXPECT_NEAR(x.grad[j], mult[c] * x2.grad[j], 1e-12);
            }
}

TEST(Perturb, SpatialDropoutZeroesWithoutRescaling) {
    RngStream rng(21, "sd");
    for (int rep = 0; rep < 50; ++rep) {
        const Tensor m = draw_multipliers(PerturbVariant::sdrop(0.25), 16, rng);
        std::size_t zeros = 0;
        for (double v : m.data()) {
            ASSERT_TRUE(v == 0.0 || v == 1.0);
            zeros += v == 0.0;
        }
        ASSERT_EQ(zeros, 4u);
    }
}

TEST(Perturb, RandomRatioDropoutStaysInWindow) {
    RngStream rng(22, "sd*");
    std::set<std::size_t> counts;
    for (int rep = 0; rep < 500; ++rep) {
        const Tensor m = draw_multipliers(PerturbVariant::sdrop_random_ratio(0.3, 0.1), 100, rng);
        std::size_t zeros = 0;
        for (double v : m.data()) zeros += v == 0.0;
        ASSERT_GE(zeros, 20u);
        ASSERT_LE(zeros, 40u);
        counts.insert(zeros);
    }
    EXPECT_GT(counts.size(), 10u);
}

TEST(Perturb, GaussianDropoutMoments) {
    RngStream rng(23, "sd+");
    const double r = 0.2;
    double s = 0, s2 = 0;
    std::size_t n = 0;
    for (int rep = 0; rep < 400; ++rep) {
        const Tensor m = draw_multipliers(PerturbVariant::sdrop_gaussian(r), 50, rng);
        for (double v : m.data()) {
            s += v;
            s2 += v * v;
            ++n;
        }
    }
    const double mean = s / n;
    EXPECT_NEAR(mean, 1.0, 0.01);
    EXPECT_NEAR(s2 / n - mean * mean, r * (1 - r), 0.01);
}

TEST(Perturb, PerSampleMasksDifferAcrossRows) {
    RngStream rng(24, "ps");
    Tape t;
    const Var x = t.constant(Tensor(Shape{4, 16}, 1.0));
    const Tensor y = perturb_input(x, PerturbVariant::pconv(0.5), rng, true, true).value();
    bool differ = false;
    for (std::size_t c = 0; c < 16; ++c) differ |= y.at(0, c) != y.at(1, c);
    EXPECT_TRUE(differ);
    EXPECT_EQ(t.masks()[0].multipliers.size(), 64u);
}

TEST(Perturb, VariantNames) {
    for (auto k : {PerturbKind::none, PerturbKind::pconv, PerturbKind::sdrop_bernoulli, PerturbKind::sdrop_random_ratio,
                   PerturbKind::sdrop_gaussian})
        EXPECT_EQ(parse_perturb_kind(kind_name(k)), k);
    EXPECT_EQ(parse_perturb_kind("sdrop*"), PerturbKind::sdrop_random_ratio);
    EXPECT_THROW(parse_perturb_kind("dropout"), ConfigError);
}
