#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <memory>
#include <set>

#include "oracles.hpp"
#include "pconv/gradcheck.hpp"
#include "pconv/layers.hpp"

using namespace pconv;

TEST(Layers, OrthogonalInitHasOrthonormalRows) {
    RngStream rng(1, "orth");
    for (const Shape s : {Shape{8, 20}, Shape{16, 3, 3, 3}, Shape{20, 8}}) {
        const Tensor w = orthogonal_init(s, rng, 1.0);
        const std::size_t r = s[0], c = w.size() / r;
        Eigen::MatrixXd m(r, c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) m(i, j) = w[i * c + j];
        const Eigen::MatrixXd g = r <= c ? Eigen::MatrixXd(m * m.transpose()) : Eigen::MatrixXd(m.transpose() * m);
        EXPECT_LT((g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff(), 1e-10) << to_string(s);
    }
}

TEST(Layers, DenseComputesAffineMap) {
    Dense d("d", 3, 2, {}, 7);
    const Tensor x = oracle::randn({4, 3}, 2);
    Tape t;
    const Tensor y = d.forward(t.constant(x), true).value();
    for (std::size_t n = 0; n < 4; ++n)
        for (std::size_t o = 0; o < 2; ++o) {
            double ref = d.bias().value[o];
            for (std::size_t i = 0; i < 3; ++i) ref += x.at(n, i) * d.weight().value.at(o, i);
            EXPECT_NEAR(y.at(n, o), ref, 1e-14);
        }
}

TEST(Layers, ConvUsesSamePadding) {
    Conv2d c("c", 2, 4, 3, {}, 3);
    Tape t;
    EXPECT_EQ(c.forward(t.constant(oracle::randn({1, 2, 5, 7}, 1)), true).shape(), (Shape{1, 4, 5, 7}));
    Conv2d c1("c1", 2, 4, 1, {}, 3);
    EXPECT_EQ(c1.forward(t.constant(oracle::randn({1, 2, 5, 7}, 1)), true).shape(), (Shape{1, 4, 5, 7}));
}

TEST(Layers, ParameterIdsAreUniquePaths) {
    DiscResBlock b("D/0", 3, 8, true, true, {true, 1, {}, false}, 1);
    std::vector<Parameter*> ps;
    b.collect_parameters(ps);
    std::set<std::string> ids;
    for (auto* p : ps) {
        EXPECT_EQ(p->id.rfind("D/0/", 0), 0u) << p->id;
        ids.insert(p->id);
    }
    EXPECT_EQ(ids.size(), ps.size());
}

TEST(Layers, BlockShapes) {
    Tape t;
    DiscResBlock down("d", 3, 8, true, true, {true, 1, {}, false}, 1);
    EXPECT_EQ(down.forward(t.constant(oracle::randn({2, 3, 8, 8}, 1)), true).shape(), (Shape{2, 8, 4, 4}));
    DiscResBlock same("s", 8, 8, false, false, {true, 1, {}, false}, 2);
    EXPECT_EQ(same.forward(t.constant(oracle::randn({2, 8, 4, 4}, 2)), true).shape(), (Shape{2, 8, 4, 4}));
    GenResBlock up("g", 8, 4, true, {}, 3);
    EXPECT_EQ(up.forward(t.constant(oracle::randn({2, 8, 4, 4}, 3)), true).shape(), (Shape{2, 4, 8, 8}));
}

TEST(Layers, ResBlockGradients) {
    LayerOptions opt{true, 1, PerturbVariant::pconv(0.5), false};
    Parameter x("x", oracle::randn({2, 4, 4, 4}, 9));
    Fragment frag;
    auto block = std::make_shared<DiscResBlock>("b", 4, 6, true, false, opt, 5);
    block->collect_parameters(frag.params);
    frag.params.push_back(&x);
    const Tensor r = oracle::randn({2, 6, 2, 2}, 10);
    Archive snapshot;
    block->save_state(snapshot);
    frag.loss = [&, block](Tape& t, std::uint64_t) {
        block->load_state(snapshot);  // same masks and power-iteration start every call
        return ops::sum(ops::mul(block->forward(t.parameter(x), true), t.constant(r)));
    };
    EXPECT_LT(grad_check(frag, 0).max_rel_error, 1e-5);
}

TEST(Layers, StateRoundTripRestoresStreams) {
    LayerOptions opt{true, 1, PerturbVariant::pconv(0.5), false};
    Conv2d a("c", 4, 4, 3, opt, 1), b("c", 4, 4, 3, opt, 1);
    const Tensor x = oracle::randn({1, 4, 3, 3}, 4);
    Tape t0;
    a.forward(t0.constant(x), true);  // advance a's streams
    Archive st;
    a.save_state(st);
    b.load_state(st);
    std::vector<Parameter*> pa, pb;
    a.collect_parameters(pa);
    b.collect_parameters(pb);
    for (std::size_t i = 0; i < pa.size(); ++i) pb[i]->value = pa[i]->value;
    Tape t1, t2;
    EXPECT_EQ(a.forward(t1.constant(x), true).value(), b.forward(t2.constant(x), true).value());
}
