#include "pconv/encoder.hpp"

#include <cmath>

#include "pconv/autodiff.hpp"
#include "pconv/errors.hpp"
#include "pconv/ops.hpp"
#include "pconv/rng.hpp"

namespace pconv {

FeatureEncoder::FeatureEncoder(std::uint64_t seed) {
    const std::size_t widths[] = {3, 16, 32, 32, kFeatures};
    for (std::size_t l = 0; l < 4; ++l) {
        const std::size_t in = widths[l], out = widths[l + 1];
        RngStream rng(seed, "encoder/" + std::to_string(l));
        Tensor w(Shape{out, in, 3, 3});
        const double sd = std::sqrt(2.0 / static_cast<double>(in * 9));
        for (double& v : w.data()) v = sd * rng.normal();
        Tensor b(Shape{out});
        for (double& v : b.data()) v = 0.1 * rng.normal();
        weights_.push_back(std::move(w));
        biases_.push_back(std::move(b));
    }
}

Tensor FeatureEncoder::encode(const Tensor& images) const {
    const Shape& s = images.shape();
    if (s.size() != 4 || s[1] != 3 || s[2] % 8 || s[3] % 8 || s[2] == 0 || s[3] == 0) {
        throw ContractViolation("encoder expects N x 3 x H x W with H, W divisible by 8, got " + to_string(s));
    }
    const std::size_t n = s[0];
    constexpr std::size_t chunk = 128;
    std::vector<Tensor> parts;
    for (std::size_t done = 0; done < n; done += chunk) {
        const std::size_t m = std::min(chunk, n - done);
        Tape tape;
        Var h = tape.constant(slice_rows(images, done, done + m));
        for (std::size_t l = 0; l < 4; ++l) {
            h = ops::relu(ops::add_bias(ops::conv2d(h, tape.constant(weights_[l]), 1, 1), tape.constant(biases_[l])));
            if (l < 3) h = ops::avg_pool2d(h);
        }
        const double area = static_cast<double>(h.shape()[2] * h.shape()[3]);
        parts.push_back(ops::scale(ops::global_sum_pool(h), 1.0 / area).value());
    }
    if (parts.empty()) return Tensor(Shape{0, kFeatures});
    return concat_rows(parts);
}

}  // namespace pconv
