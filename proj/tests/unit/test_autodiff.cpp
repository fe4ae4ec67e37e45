#include <gtest/gtest.h>

#include <cmath>

#include "pconv/autodiff.hpp"
#include "pconv/errors.hpp"
#include "pconv/ops.hpp"

using namespace pconv;

TEST(Autodiff, ChainRuleThroughSquareAndSum) {
    Parameter p("p", Tensor::from({1.0, -2.0, 3.0}));
    Tape tape;
    const Var loss = ops::sum(ops::square(tape.parameter(p)));
    EXPECT_EQ(loss.value().item(), 14.0);
    const GradientMap g = backward(tape, loss);
    ASSERT_TRUE(g.contains("p"));
    EXPECT_EQ(g.at("p"), Tensor::from({2.0, -4.0, 6.0}));
    EXPECT_EQ(p.grad, g.at("p"));
}

TEST(Autodiff, ReusedParameterAccumulates) {
    Parameter p("p", Tensor::from({3.0}));
    Tape tape;
    const Var a = tape.parameter(p);
    const Var b = tape.parameter(p);
    const Var loss = ops::sum(ops::mul(a, b));
    const GradientMap g = backward(tape, loss);
    EXPECT_EQ(g.at("p")[0], 6.0);
}

TEST(Autodiff, LossMustBeScalar) {
    Parameter p("p", Tensor::from({1.0, 2.0}));
    Tape tape;
    EXPECT_THROW(backward(tape, tape.parameter(p)), ContractViolation);
}

TEST(Autodiff, BackwardRunsOnce) {
    Parameter p("p", Tensor::from({1.0}));
    Tape tape;
    const Var loss = ops::sum(tape.parameter(p));
    backward(tape, loss);
    EXPECT_THROW(backward(tape, loss), ContractViolation);
}

TEST(Autodiff, ConstantLossGivesNoGradients) {
    Tape tape;
    const Var loss = ops::sum(tape.constant(Tensor::from({1.0, 2.0})));
    EXPECT_TRUE(backward(tape, loss).empty());
}

TEST(Autodiff, FrozenParametersReceiveNothing) {
    Parameter a("a", Tensor::from({2.0})), b("b", Tensor::from({5.0}));
    Tape tape;
    const Var va = tape.parameter(a);
    tape.freeze_parameters(true);
    const Var vb = tape.parameter(b);
    tape.freeze_parameters(false);
    const GradientMap g = backward(tape, ops::sum(ops::mul(va, vb)));
    EXPECT_EQ(g.size(), 1u);
    EXPECT_EQ(g.at("a")[0], 5.0);
    EXPECT_EQ(b.grad[0], 0.0);
}

TEST(Autodiff, ForeignVarIsRejected) {
    Tape t1, t2;
    const Var x = t1.constant(Tensor::from({1.0}));
    const Var y = t2.constant(Tensor::from({1.0}));
    EXPECT_THROW(ops::add(x, y), ContractViolation);
    EXPECT_THROW(Var().value(), ContractViolation);
}

TEST(Autodiff, NonFiniteValuesAreCaught) {
    Tape tape;
    EXPECT_THROW(tape.constant(Tensor::from({std::nan("")})), NumericError);
    Parameter p("p", Tensor::from({1e300}));
    const Var x = tape.parameter(p);
    EXPECT_THROW(ops::square(x), NumericError);
}
