#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace pconv {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

/// Dense row-major array of doubles.
///
/// 4-D tensors use the N x C x H x W layout, 2-D tensors N x F. A tensor is a
/// plain value: copies are deep, and nothing aliases between instances.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor scalar(double value);
    static Tensor from(std::initializer_list<double> values);
    static Tensor like(const Tensor& other, double fill = 0.0) { return Tensor(other.shape_, fill); }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t extent(std::size_t axis) const;
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    double* raw() noexcept { return data_.data(); }
    const double* raw() const noexcept { return data_.data(); }

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    /// Element access for 2-D and 4-D tensors.
    double& at(std::size_t i, std::size_t j);
    double at(std::size_t i, std::size_t j) const;
    double& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w);
    double at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const;

    /// The single value of a one-element tensor.
    double item() const;

    Tensor reshaped(Shape shape) const;
    bool all_finite() const noexcept;

    void fill(double value) noexcept;
    /// this += other (shapes must match).
    void add_inplace(const Tensor& other);

    /// Bitwise equality of shape and contents.
    friend bool operator==(const Tensor& a, const Tensor& b);

private:
    Shape shape_;
    std::vector<double> data_;
};

/// Largest absolute elementwise difference; shapes must match.
double max_abs_diff(const Tensor& a, const Tensor& b);

/// Rows [begin, end) along the leading axis.
Tensor slice_rows(const Tensor& t, std::size_t begin, std::size_t end);

/// Gathers leading-axis rows by index.
Tensor gather_rows(const Tensor& t, std::span<const std::size_t> rows);

/// Concatenates along the leading axis; trailing extents must agree.
Tensor concat_rows(std::span<const Tensor> parts);

}  // namespace pconv
