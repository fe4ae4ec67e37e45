#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "pconv/dataset.hpp"
#include "pconv/errors.hpp"

using namespace pconv;
namespace fs = std::filesystem;

namespace {

void write_ppm(const fs::path& p, std::size_t w, std::size_t h, unsigned char base) {
    std::ofstream out(p, std::ios::binary);
    out << "P6\n# test\n" << w << ' ' << h << "\n255\n";
    for (std::size_t i = 0; i < w * h; ++i) {
        const unsigned char px[3] = {base, static_cast<unsigned char>(i % 256), 255};
        out.write(reinterpret_cast<const char*>(px), 3);
    }
}

}  // namespace

TEST(Dataset, GmmCentersLieOnCircle) {
    const auto c = gmm_centers(8, 2.0);
    ASSERT_EQ(c.size(), 8u);
    for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_NEAR(std::hypot(c[i][0], c[i][1]), 2.0, 1e-12);
        const auto& n = c[(i + 1) % 8];
        EXPECT_NEAR(std::hypot(c[i][0] - n[0], c[i][1] - n[1]), 2 * 2.0 * std::sin(std::numbers::pi / 8), 1e-12);
    }
}

TEST(Dataset, GmmSamplesClusterAroundModes) {
    DatasetSpec s;
    s.n_train = 4000;
    const Dataset d = make_dataset(s);
    const auto c = gmm_centers(8, 2.0);
    std::vector<std::size_t> hits(8, 0);
    for (std::size_t i = 0; i < 4000; ++i) {
        std::size_t best = 0;
        double bd = 1e9;
        for (std::size_t m = 0; m < 8; ++m) {
            const double dd = std::hypot(d.train.at(i, 0) - c[m][0], d.train.at(i, 1) - c[m][1]);
            if (dd < bd) bd = dd, best = m;
        }
        EXPECT_LT(bd, 6 * s.sigma);
        ++hits[best];
    }
    for (std::size_t h : hits) EXPECT_NEAR(h / 4000.0, 0.125, 0.03);
}

TEST(Dataset, FractionTakesFloorAndLeavesHeldoutAlone) {
    DatasetSpec s;
    s.kind = DatasetKind::synthetic_images;
    s.resolution = 8;
    s.n_train = 10;
    s.n_heldout = 3;
    const Dataset full = make_dataset(s);
    for (double f : {1.0, 0.5, 0.25, 0.3}) {
        s.fraction = f;
        const Dataset d = make_dataset(s);
        EXPECT_EQ(d.train.extent(0), static_cast<std::size_t>(std::floor(10 * f + 1e-9)));
        EXPECT_EQ(d.heldout, full.heldout);
        EXPECT_EQ(d.train, slice_rows(full.train, 0, d.train.extent(0)));
    }
    s.fraction = 0.0;
    EXPECT_THROW(make_dataset(s), ConfigError);
}

TEST(Dataset, SyntheticImagesAreInRangeAndVaried) {
    DatasetSpec s;
    s.kind = DatasetKind::synthetic_images;
    s.resolution = 16;
    s.n_train = 20;
    const Dataset d = make_dataset(s);
    EXPECT_EQ(d.train.shape(), (Shape{20, 3, 16, 16}));
    for (double v : d.train.data()) {
        ASSERT_GE(v, -1.0);
        ASSERT_LE(v, 1.0);
    }
    EXPECT_NE(slice_rows(d.train, 0, 1).reshaped({768}), slice_rows(d.train, 1, 2).reshaped({768}));
    EXPECT_EQ(make_dataset(s).train, d.train);
    s.recipe = "faces";
    EXPECT_THROW(make_dataset(s), ConfigError);
}

TEST(Dataset, SamplerNeverRepeatsWithinBatchAndCoversEpoch) {
    EpochSampler s(10, 3);
    for (int b = 0; b < 30; ++b) {
        const auto idx = s.next(4);
        ASSERT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), 4u);
    }
    EpochSampler e(12, 1);
    std::set<std::size_t> seen;
    for (int b = 0; b < 3; ++b)
        for (auto i : e.next(4)) seen.insert(i);
    EXPECT_EQ(seen.size(), 12u);
}

TEST(Dataset, SamplerRestoreContinuesExactly) {
    EpochSampler a(17, 5);
    for (int i = 0; i < 7; ++i) a.next(3);
    EpochSampler b(17, 5);
    b.restore(a.epoch(), a.cursor());
    for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next(3), b.next(3));
}

TEST(Dataset, ReadsNetpbmFolders) {
    const fs::path dir = fs::temp_directory_path() / "pconv_ppm_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (int i = 0; i < 5; ++i) write_ppm(dir / ("img" + std::to_string(i) + ".ppm"), 16, 16, static_cast<unsigned char>(i * 50));
    std::ofstream(dir / "notes.txt") << "ignored";

    const Tensor one = read_netpbm((dir / "img0.ppm").string(), 8);
    EXPECT_EQ(one.shape(), (Shape{3, 8, 8}));
    EXPECT_EQ(one[0], -1.0);
    EXPECT_EQ(one[2 * 64], 1.0);

    DatasetSpec s;
    s.kind = DatasetKind::image_dir;
    s.path = dir.string();
    s.resolution = 8;
    s.n_heldout = 2;
    const Dataset d = make_dataset(s);
    EXPECT_EQ(d.train.extent(0), 3u);
    EXPECT_EQ(d.heldout.extent(0), 2u);
    s.n_heldout = 5;
    EXPECT_THROW(make_dataset(s), ConfigError);

    std::ofstream(dir / "bad.ppm") << "P3\n1 1\n255\n0 0 0\n";
    EXPECT_THROW(read_netpbm((dir / "bad.ppm").string(), 8), IoError);
    std::ofstream(dir / "short.ppm", std::ios::binary) << "P6\n4 4\n255\nabc";
    EXPECT_THROW(read_netpbm((dir / "short.ppm").string(), 8), IoError);
    fs::remove_all(dir);

    s.path = (dir / "missing").string();
    s.n_heldout = 0;
    EXPECT_THROW(make_dataset(s), IoError);
}
