#include <gtest/gtest.h>

#include "pconv/config.hpp"
#include "pconv/errors.hpp"

using namespace pconv;

TEST(Config, ParsesValuesCommentsAndBlankLines) {
    const ConfigMap c = ConfigMap::parse("# header\n\ntrain.lr = 0.001  # inline\n  train.loss=ce\nexperiment.variants = conv, pconv@0.2\n");
    EXPECT_DOUBLE_EQ(c.get_double("train.lr", 0), 0.001);
    EXPECT_EQ(c.get_string("train.loss", ""), "ce");
    EXPECT_EQ(c.get_list("experiment.variants", {}), (std::vector<std::string>{"conv", "pconv@0.2"}));
    EXPECT_EQ(c.get_size("missing", 7), 7u);
}

TEST(Config, RejectsMalformedInput) {
    EXPECT_THROW(ConfigMap::parse("just words\n"), ConfigError);
    EXPECT_THROW(ConfigMap::parse("= 3\n"), ConfigError);
    EXPECT_THROW(ConfigMap::parse("a = 1\na = 2\n"), ConfigError);
    const ConfigMap c = ConfigMap::parse("a = x\nb = -1\nc = maybe\n");
    EXPECT_THROW(c.get_double("a", 0), ConfigError);
    EXPECT_THROW(c.get_size("b", 0), ConfigError);
    EXPECT_THROW(c.get_bool("c", false), ConfigError);
    EXPECT_THROW(ConfigMap().set_override("novalue"), ConfigError);
}

TEST(Config, UnreadKeysAreReported) {
    const ConfigMap c = ConfigMap::parse("train.lr = 1\ntrain.lrr = 2\n");
    c.get_double("train.lr", 0);
    try {
        c.require_all_used();
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("train.lrr"), std::string::npos);
    }
}

TEST(Config, OverridesReplaceFileValues) {
    ConfigMap c = ConfigMap::parse("train.seed = 1\n");
    c.set_override("train.seed=5");
    c.set_override("train.lr=0.5");
    EXPECT_EQ(c.get_int("train.seed", 0), 5);
    EXPECT_EQ(c.to_text(), "train.lr = 0.5\ntrain.seed = 5\n");
}

TEST(Config, TrainConfigDefaults) {
    const TrainConfig t = train_config_from(ConfigMap());
    EXPECT_EQ(t.d_steps_per_g, 5u);
    EXPECT_EQ(t.g_batch, 2 * t.d_batch);
    EXPECT_EQ(t.beta1, 0.0);
    EXPECT_EQ(t.beta2, 0.9);
    EXPECT_EQ(t.lr, 2e-4);
    EXPECT_EQ(t.latent_dim, 2u);
    EXPECT_EQ(train_config_from(ConfigMap::parse("model.preset = tiny32\n")).latent_dim, 128u);
    EXPECT_EQ(train_config_from(ConfigMap::parse("train.d_batch = 10\n")).g_batch, 20u);
}

TEST(Config, TrainConfigRoundTrips) {
    const TrainConfig a = train_config_from(ConfigMap::parse(
        "model.preset = tiny32\ntrain.loss = lsgan\nperturb.variant = sdrop_star\nperturb.ratio = 0.3\n"
        "train.d_batch = 8\ntrain.total_g_iters = 20\ntrain.decay_window = 5\ntrain.seed = 9\n"
        "dataset.kind = synthetic\ndataset.resolution = 16\ndataset.n_heldout = 4\ndataset.fraction = 0.5\n"));
    const TrainConfig b = train_config_from(ConfigMap::parse(to_config_text(a)));
    EXPECT_EQ(to_config_text(a), to_config_text(b));
    EXPECT_EQ(b.perturb, a.perturb);
    EXPECT_EQ(b.dataset.fraction, 0.5);
    EXPECT_EQ(b.g_batch, 16u);
}

TEST(Config, ValidationCatchesBadRecipes) {
    auto bad = [](const std::string& text) { return train_config_from(ConfigMap::parse(text)).validate(); };
    EXPECT_THROW(bad("model.preset = big\n"), ConfigError);
    EXPECT_THROW(bad("train.total_g_iters = 10\ntrain.decay_window = 11\n"), ConfigError);
    EXPECT_THROW(bad("train.beta2 = 1\n"), ConfigError);
    EXPECT_THROW(bad("perturb.variant = pconv\nperturb.ratio = 1.5\n"), ConfigError);
    EXPECT_THROW(bad("model.preset = tiny32\ndataset.kind = gmm8\n"), ConfigError);
    EXPECT_THROW(bad("train.loss = wgan\n"), ConfigError);
    EXPECT_NO_THROW(bad("train.loss = ce\n"));
}
