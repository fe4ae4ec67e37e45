#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pconv/errors.hpp"
#include "pconv/gradcheck.hpp"
#include "pconv/objectives.hpp"

using namespace pconv;

namespace {

double eval_d(AdvLossKind k, std::vector<double> real, std::vector<double> fake) {
    Tape t;
    const auto n = real.size();
    return d_loss(k, t.constant(Tensor(Shape{n, 1}, std::move(real))), t.constant(Tensor(Shape{n, 1}, std::move(fake))))
        .value()
        .item();
}

double eval_g(AdvLossKind k, std::vector<double> fake) {
    Tape t;
    const auto n = fake.size();
    return g_loss(k, t.constant(Tensor(Shape{n, 1}, std::move(fake)))).value().item();
}

double log_sigmoid(double x) { return -std::log1p(std::exp(-x)); }

}  // namespace

TEST(Objectives, HingeValues) {
    EXPECT_DOUBLE_EQ(eval_d(AdvLossKind::hinge, {2.0, 0.5}, {-3.0, 0.0}), (0.0 + 0.5 + 0.0 + 1.0) / 2);
    EXPECT_DOUBLE_EQ(eval_g(AdvLossKind::hinge, {1.0, -3.0}), 1.0);
}

TEST(Objectives, CrossEntropyValues) {
    const double r = 0.7, f = -0.4;
    EXPECT_NEAR(eval_d(AdvLossKind::cross_entropy, {r}, {f}), -log_sigmoid(r) - log_sigmoid(-f), 1e-14);
    EXPECT_NEAR(eval_g(AdvLossKind::cross_entropy, {f}), -log_sigmoid(f), 1e-14);
    // Saturated logits stay finite.
    EXPECT_TRUE(std::isfinite(eval_d(AdvLossKind::cross_entropy, {-500.0}, {500.0})));
    EXPECT_NEAR(eval_g(AdvLossKind::cross_entropy, {-500.0}), 500.0, 1e-9);
}

TEST(Objectives, LeastSquaresValues) {
    EXPECT_DOUBLE_EQ(eval_d(AdvLossKind::least_squares, {1.0, 3.0}, {0.0, 2.0}), 0.5 * 2.0 + 0.5 * 2.0);
    EXPECT_DOUBLE_EQ(eval_g(AdvLossKind::least_squares, {3.0}), 2.0);
}

TEST(Objectives, Gradients) {
    for (auto k : {AdvLossKind::cross_entropy, AdvLossKind::hinge, AdvLossKind::least_squares}) {
        Parameter real("real", oracle::randn({7, 1}, 1, 1.5)), fake("fake", oracle::randn({7, 1}, 2, 1.5));
        Fragment fd{{&real, &fake}, [&](Tape& t, std::uint64_t) {
                        return d_loss(k, t.parameter(real), t.parameter(fake));
                    }};
        EXPECT_LT(grad_check(fd, 0).max_rel_error, 1e-6) << loss_name(k);
        Fragment fg{{&fake}, [&](Tape& t, std::uint64_t) { return g_loss(k, t.parameter(fake)); }};
        EXPECT_LT(grad_check(fg, 0).max_rel_error, 1e-6) << loss_name(k);
    }
}

TEST(Objectives, ShapeMismatchIsRejected) {
    Tape t;
    EXPECT_THROW(d_loss(AdvLossKind::hinge, t.constant(Tensor(Shape{3, 1})), t.constant(Tensor(Shape{3, 2}))),
                 ContractViolation);
}

TEST(Objectives, Names) {
    for (auto k : {AdvLossKind::cross_entropy, AdvLossKind::hinge, AdvLossKind::least_squares})
        EXPECT_EQ(parse_loss_kind(loss_name(k)), k);
    EXPECT_THROW(parse_loss_kind("wgan"), ConfigError);
    EXPECT_TRUE(real_fake_decision(1e-9));
    EXPECT_FALSE(real_fake_decision(0.0));
}
