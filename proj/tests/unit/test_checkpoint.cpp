#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "oracles.hpp"
#include "pconv/checkpoint.hpp"
#include "pconv/errors.hpp"
#include "pconv/rng.hpp"

using namespace pconv;
namespace fs = std::filesystem;

namespace {

class CheckpointFile : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("pconv_ckpt_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    Archive sample() const {
        Archive a;
        a.put("t/x", oracle::randn({3, 4}, 1));
        Tensor odd = Tensor::from({-0.0, std::numeric_limits<double>::denorm_min(), 1.0 / 3.0});
        a.put("t/odd", odd);
        a.put("t/empty", Tensor(Shape{0, 5}));
        a.put("n", std::uint64_t{0xfedcba9876543210ull});
        a.put("f", 0.1);
        a.put("s", std::string("hello\nworld"));
        return a;
    }

    std::vector<char> bytes(const fs::path& p) const {
        std::ifstream in(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(in), {}};
    }
    void write(const fs::path& p, const std::vector<char>& b) const {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        out.write(b.data(), static_cast<std::streamsize>(b.size()));
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CheckpointFile, RoundTripIsBitExact) {
    const Archive a = sample();
    a.save(dir_ / "a.ckpt");
    const Archive b = Archive::load(dir_ / "a.ckpt");
    EXPECT_EQ(a, b);
    EXPECT_TRUE(std::signbit(b.tensor("t/odd")[0]));
    EXPECT_EQ(b.u64("n"), 0xfedcba9876543210ull);
    EXPECT_EQ(b.text("s"), "hello\nworld");
    EXPECT_EQ(b.keys("t/"), (std::vector<std::string>{"t/empty", "t/odd", "t/x"}));
}

TEST_F(CheckpointFile, WrongTypeOrMissingKeyThrows) {
    const Archive a = sample();
    EXPECT_THROW(a.tensor("n"), IoError);
    EXPECT_THROW(a.u64("missing"), IoError);
}

TEST_F(CheckpointFile, CorruptionIsDetected) {
    sample().save(dir_ / "a.ckpt");
    auto b = bytes(dir_ / "a.ckpt");
    b[b.size() / 2] ^= 0x01;
    write(dir_ / "c.ckpt", b);
    EXPECT_THROW(Archive::load(dir_ / "c.ckpt"), IoError);
}

TEST_F(CheckpointFile, TruncationIsDetected) {
    sample().save(dir_ / "a.ckpt");
    const auto b = bytes(dir_ / "a.ckpt");
    for (std::size_t keep : {std::size_t{0}, std::size_t{5}, std::size_t{12}, b.size() / 2, b.size() - 1}) {
        write(dir_ / "t.ckpt", {b.begin(), b.begin() + static_cast<std::ptrdiff_t>(keep)});
        EXPECT_THROW(Archive::load(dir_ / "t.ckpt"), IoError) << keep;
    }
}

TEST_F(CheckpointFile, VersionMismatchIsRejected) {
    sample().save(dir_ / "a.ckpt");
    auto b = bytes(dir_ / "a.ckpt");
    b[8] = static_cast<char>(Archive::kFormatVersion + 1);
    // Re-seal so only the version is wrong.
    const std::size_t body = b.size() - 8;
    const std::uint64_t sum = hash_label(std::string_view(b.data(), body));
    for (int i = 0; i < 8; ++i) b[body + i] = static_cast<char>((sum >> (8 * i)) & 0xff);
    write(dir_ / "v.ckpt", b);
    try {
        Archive::load(dir_ / "v.ckpt");
        FAIL() << "expected IoError";
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("version"), std::string::npos) << e.what();
    }
}

TEST_F(CheckpointFile, BadMagicAndMissingFile) {
    write(dir_ / "m.ckpt", std::vector<char>(64, 'x'));
    EXPECT_THROW(Archive::load(dir_ / "m.ckpt"), IoError);
    EXPECT_THROW(Archive::load(dir_ / "nope.ckpt"), IoError);
}
