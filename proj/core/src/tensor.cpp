#include "pconv/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>

#include "pconv/errors.hpp"

namespace pconv {

std::size_t numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

std::string to_string(const Shape& shape) {
    std::string out = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(shape[i]);
    }
    return out + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (numel(shape_) != data_.size()) {
        throw ContractViolation("tensor shape " + to_string(shape_) + " holds " + std::to_string(numel(shape_)) +
                                " values, got " + std::to_string(data_.size()));
    }
}

Tensor Tensor::scalar(double value) { return Tensor(Shape{1}, std::vector<double>{value}); }

Tensor Tensor::from(std::initializer_list<double> values) {
    return Tensor(Shape{values.size()}, std::vector<double>(values));
}

std::size_t Tensor::extent(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw ContractViolation("axis " + std::to_string(axis) + " out of range for shape " + to_string(shape_));
    }
    return shape_[axis];
}

double& Tensor::at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
double Tensor::at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

double& Tensor::at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
}
double Tensor::at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
}

double Tensor::item() const {
    if (data_.size() != 1) throw ContractViolation("item() on tensor of shape " + to_string(shape_));
    return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
    if (numel(shape) != data_.size()) {
        throw ContractViolation("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
    }
    return Tensor(std::move(shape), data_);
}

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double value) noexcept { std::fill(data_.begin(), data_.end(), value); }

void Tensor::add_inplace(const Tensor& other) {
    if (other.shape_ != shape_) {
        throw ContractViolation("add_inplace shape mismatch " + to_string(shape_) + " vs " + to_string(other.shape_));
    }
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
}

bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ &&
           (a.data_.empty() || std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(double)) == 0);
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ContractViolation("max_abs_diff shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Tensor slice_rows(const Tensor& t, std::size_t begin, std::size_t end) {
    if (t.rank() == 0 || begin > end || end > t.extent(0)) {
        throw ContractViolation("slice_rows [" + std::to_string(begin) + "," + std::to_string(end) + ") of " +
                                to_string(t.shape()));
    }
    const std::size_t row = t.extent(0) ? t.size() / t.extent(0) : 0;
    Shape shape = t.shape();
    shape[0] = end - begin;
    std::vector<double> data(t.data().begin() + begin * row, t.data().begin() + end * row);
    return Tensor(std::move(shape), std::move(data));
}

Tensor gather_rows(const Tensor& t, std::span<const std::size_t> rows) {
    const std::size_t n = t.extent(0);
    const std::size_t row = n ? t.size() / n : 0;
    Shape shape = t.shape();
    shape[0] = rows.size();
    Tensor out(shape);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= n) throw ContractViolation("gather_rows index out of range");
        std::copy_n(t.raw() + rows[i] * row, row, out.raw() + i * row);
    }
    return out;
}

Tensor concat_rows(std::span<const Tensor> parts) {
    if (parts.empty()) throw ContractViolation("concat_rows of nothing");
    Shape shape = parts.front().shape();
    std::size_t rows = 0;
    for (const auto& p : parts) {
        if (p.rank() != shape.size() || !std::equal(p.shape().begin() + 1, p.shape().end(), shape.begin() + 1)) {
            throw ContractViolation("concat_rows trailing extents differ: " + to_string(p.shape()) + " vs " +
                                    to_string(shape));
        }
        rows += p.extent(0);
    }
    shape[0] = rows;
    std::vector<double> data;
    data.reserve(numel(shape));
    for (const auto& p : parts) data.insert(data.end(), p.data().begin(), p.data().end());
    return Tensor(std::move(shape), std::move(data));
}

}  // namespace pconv
