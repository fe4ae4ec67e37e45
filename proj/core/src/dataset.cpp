#include "pconv/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>

#include "pconv/errors.hpp"

namespace pconv {

std::vector<std::array<double, 2>> gmm_centers(std::size_t modes, double radius) {
    std::vector<std::array<double, 2>> c(modes);
    for (std::size_t i = 0; i < modes; ++i) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(modes);
        c[i] = {radius * std::cos(a), radius * std::sin(a)};
    }
    return c;
}

namespace {

Tensor gmm_points(const DatasetSpec& spec, std::size_t n, RngStream& rng) {
    const auto centers = gmm_centers(spec.modes, spec.radius);
    Tensor out(Shape{n, 2});
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = centers[rng.below(centers.size())];
        out.at(i, 0) = c[0] + spec.sigma * rng.normal();
        out.at(i, 1) = c[1] + spec.sigma * rng.normal();
    }
    return out;
}

Tensor image_batch(const std::string& recipe, std::size_t r, std::size_t n, RngStream& rng) {
    Tensor out(Shape{n, 3, r, r});
    const std::size_t per = 3 * r * r;
    for (std::size_t i = 0; i < n; ++i) {
        RngStream one = rng.split(std::to_string(i));
        const Tensor img = synthetic_image(recipe, r, one);
        std::copy(img.data().begin(), img.data().end(), out.raw() + i * per);
    }
    return out;
}

std::size_t used_rows(std::size_t n, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("dataset fraction must lie in (0, 1]");
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction + 1e-9));
}

}  // namespace

Tensor synthetic_image(const std::string& recipe, std::size_t r, RngStream& rng) {
    if (recipe != "shapes") throw ConfigError("unknown synthetic image recipe '" + recipe + "'");
    // Linear two-colour background gradient plus one to three filled shapes
    // (discs or axis-aligned rectangles) of random colour.
    Tensor img(Shape{3, r, r});
    std::array<double, 3> c0{}, c1{};
    for (auto& v : c0) v = rng.uniform(-1.0, 1.0);
    for (auto& v : c1) v = rng.uniform(-1.0, 1.0);
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double dx = std::cos(angle), dy = std::sin(angle);
    const double rr = static_cast<double>(r);
    for (std::size_t y = 0; y < r; ++y)
        for (std::size_t x = 0; x < r; ++x) {
            const double t = 0.5 + 0.5 * ((static_cast<double>(x) / rr - 0.5) * dx + (static_cast<double>(y) / rr - 0.5) * dy);
            for (std::size_t c = 0; c < 3; ++c) img[(c * r + y) * r + x] = (1.0 - t) * c0[c] + t * c1[c];
        }

    const std::size_t shapes = 1 + rng.below(3);
    for (std::size_t s = 0; s < shapes; ++s) {
        std::array<double, 3> col{};
        for (auto& v : col) v = rng.uniform(-1.0, 1.0);
        const bool disc = rng.uniform() < 0.5;
        const double cx = rng.uniform(0.15, 0.85) * rr, cy = rng.uniform(0.15, 0.85) * rr;
        const double hx = rng.uniform(0.08, 0.3) * rr, hy = disc ? hx : rng.uniform(0.08, 0.3) * rr;
        for (std::size_t y = 0; y < r; ++y)
            for (std::size_t x = 0; x < r; ++x) {
                const double px = static_cast<double>(x) + 0.5 - cx, py = static_cast<double>(y) + 0.5 - cy;
                const bool inside = disc ? (px * px + py * py <= hx * hx) : (std::abs(px) <= hx && std::abs(py) <= hy);
                if (!inside) continue;
                for (std::size_t c = 0; c < 3; ++c) img[(c * r + y) * r + x] = col[c];
            }
    }
    return img;
}

Tensor read_netpbm(const std::string& path, std::size_t resolution) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image '" + path + "'");
    auto token = [&]() {
        std::string t;
        char ch;
        while (in.get(ch)) {
            if (ch == '#') {
                std::string skip;
                std::getline(in, skip);
            } else if (std::isspace(static_cast<unsigned char>(ch))) {
                if (!t.empty()) break;
            } else {
                t += ch;
            }
        }
        return t;
    };
    const std::string magic = token();
    if (magic != "P6" && magic != "P5") throw IoError("'" + path + "' is not a binary PPM/PGM file");
    std::size_t w = 0, h = 0, maxval = 0;
    try {
        w = std::stoul(token());
        h = std::stoul(token());
        maxval = std::stoul(token());
    } catch (const std::exception&) {
        throw IoError("'" + path + "' has a malformed header");
    }
    if (w == 0 || h == 0 || maxval == 0 || maxval > 255) throw IoError("'" + path + "' has unsupported dimensions");
    const std::size_t channels = magic == "P6" ? 3 : 1;
    std::vector<unsigned char> pix(w * h * channels);
    in.read(reinterpret_cast<char*>(pix.data()), static_cast<std::streamsize>(pix.size()));
    if (!in) throw IoError("'" + path + "' is truncated");

    Tensor img(Shape{3, resolution, resolution});
    for (std::size_t y = 0; y < resolution; ++y)
        for (std::size_t x = 0; x < resolution; ++x) {
            const std::size_t sy = y * h / resolution, sx = x * w / resolution;
            for (std::size_t c = 0; c < 3; ++c) {
                const unsigned char v = pix[(sy * w + sx) * channels + (channels == 3 ? c : 0)];
                img[(c * resolution + y) * resolution + x] = 2.0 * v / static_cast<double>(maxval) - 1.0;
            }
        }
    return img;
}

Dataset make_dataset(const DatasetSpec& spec) {
    Dataset d;
    const std::size_t used = used_rows(spec.n_train, spec.fraction);
    RngStream rng(spec.seed, "dataset");
    switch (spec.kind) {
        case DatasetKind::gmm8: {
            if (spec.modes == 0) throw ConfigError("gmm8 dataset needs at least one mode");
            RngStream tr = rng.split("train"), ho = rng.split("heldout");
            d.train = slice_rows(gmm_points(spec, spec.n_train, tr), 0, used);
            d.heldout = gmm_points(spec, spec.n_heldout, ho);
            d.sample_shape = {2};
            break;
        }
        case DatasetKind::synthetic_images: {
            if (spec.resolution == 0 || spec.resolution > 32) throw ConfigError("synthetic resolution must be in [1, 32]");
            RngStream tr = rng.split("train"), ho = rng.split("heldout");
            d.train = slice_rows(image_batch(spec.recipe, spec.resolution, spec.n_train, tr), 0, used);
            d.heldout = image_batch(spec.recipe, spec.resolution, spec.n_heldout, ho);
            d.sample_shape = {3, spec.resolution, spec.resolution};
            break;
        }
        case DatasetKind::image_dir: {
            namespace fs = std::filesystem;
            std::vector<fs::path> files;
            std::error_code ec;
            for (const auto& e : fs::directory_iterator(spec.path, ec)) {
                const auto ext = e.path().extension().string();
                if (e.is_regular_file() && (ext == ".ppm" || ext == ".pgm")) files.push_back(e.path());
            }
            if (ec) throw IoError("cannot list image folder '" + spec.path + "': " + ec.message());
            std::sort(files.begin(), files.end());
            if (files.size() <= spec.n_heldout) {
                throw ConfigError("image folder '" + spec.path + "' has " + std::to_string(files.size()) +
                                  " images, not enough for a held-out split of " + std::to_string(spec.n_heldout));
            }
            const std::size_t n_tr = files.size() - spec.n_heldout;
            const std::size_t r = spec.resolution;
            std::vector<Tensor> imgs;
            for (const auto& f : files) imgs.push_back(read_netpbm(f.string(), r).reshaped({1, 3, r, r}));
            const Tensor all = concat_rows(imgs);
            d.train = slice_rows(all, 0, used_rows(n_tr, spec.fraction));
            d.heldout = slice_rows(all, n_tr, files.size());
            d.sample_shape = {3, r, r};
            break;
        }
    }
    return d;
}

EpochSampler::EpochSampler(std::size_t n, std::uint64_t seed) : n_(n), seed_(seed) { reshuffle(); }

void EpochSampler::reshuffle() {
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    RngStream rng(seed_, "epoch/" + std::to_string(epoch_));
    for (std::size_t i = n_; i > 1; --i) std::swap(order_[i - 1], order_[rng.below(i)]);
}

std::vector<std::size_t> EpochSampler::next(std::size_t batch) {
    if (batch == 0 || batch > n_) {
        throw ContractViolation("batch of " + std::to_string(batch) + " from a dataset of " + std::to_string(n_));
    }
    if (cursor_ + batch > n_) {
        ++epoch_;
        cursor_ = 0;
        reshuffle();
    }
    std::vector<std::size_t> out(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                                 order_.begin() + static_cast<std::ptrdiff_t>(cursor_ + batch));
    cursor_ += batch;
    return out;
}

void EpochSampler::restore(std::uint64_t epoch, std::size_t cursor) {
    epoch_ = epoch;
    cursor_ = cursor;
    reshuffle();
}

}  // namespace pconv
