#include "pconv/spectral_norm.hpp"

#include <Eigen/Core>
#include <algorithm>

#include "pconv/errors.hpp"
#include "pconv/ops.hpp"

namespace pconv {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::pair<std::size_t, std::size_t> matrix_view(const Tensor& w) {
    if (w.rank() == 0 || w.size() == 0) throw ContractViolation("spectral norm of an empty weight");
    return {w.extent(0), w.size() / w.extent(0)};
}

void normalize(Eigen::Map<Eigen::VectorXd> x) { x /= std::max(x.norm(), 1e-12); }

}  // namespace

SpectralNormState init_spectral_norm(const Tensor& w, RngStream& rng, std::size_t power_iterations) {
    const auto [rows, cols] = matrix_view(w);
    SpectralNormState s{Tensor(Shape{rows}), Tensor(Shape{cols}), power_iterations};
    for (auto& e : s.u.data()) e = rng.normal();
    normalize(Eigen::Map<Eigen::VectorXd>(s.u.raw(), rows));
    Eigen::Map<const RowMat> W(w.raw(), rows, cols);
    Eigen::Map<Eigen::VectorXd> v(s.v.raw(), cols);
    v = W.transpose() * Eigen::Map<const Eigen::VectorXd>(s.u.raw(), rows);
    normalize(v);
    return s;
}

void power_iterate(const Tensor& w, SpectralNormState& state, std::size_t iterations) {
    const auto [rows, cols] = matrix_view(w);
    if (state.u.size() != rows || state.v.size() != cols) {
        throw ContractViolation("spectral norm state does not match weight " + to_string(w.shape()));
    }
    Eigen::Map<const RowMat> W(w.raw(), rows, cols);
    Eigen::Map<Eigen::VectorXd> u(state.u.raw(), rows), v(state.v.raw(), cols);
    for (std::size_t i = 0; i < iterations; ++i) {
        v = W.transpose() * u;
        normalize(v);
        u = W * v;
        normalize(u);
    }
}

double sigma_estimate(const Tensor& w, const SpectralNormState& state) {
    const auto [rows, cols] = matrix_view(w);
    Eigen::Map<const RowMat> W(w.raw(), rows, cols);
    Eigen::Map<const Eigen::VectorXd> u(state.u.raw(), rows), v(state.v.raw(), cols);
    return std::max(u.dot(W * v), 1e-12);
}

Var spectral_normalize(const Var& w, SpectralNormState& state, bool update) {
    if (update) power_iterate(w.value(), state, state.power_iterations);
    return ops::spectral_normalized(w, state.u, state.v);
}

}  // namespace pconv
