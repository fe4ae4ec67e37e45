#pragma once

#include <cstddef>

#include "pconv/autodiff.hpp"
#include "pconv/tensor.hpp"

/// Differentiable primitives. Every function evaluates eagerly, records its
/// backward rule on the operands' tape and throws ContractViolation on shape
/// errors.
namespace pconv::ops {

Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& x, double factor);
Var add_scalar(const Var& x, double offset);
/// Adds a per-channel bias `b` [C] along axis 1 of a 2-D or 4-D tensor.
Var add_bias(const Var& x, const Var& b);

Var relu(const Var& x);
Var tanh(const Var& x);
/// log(1 + exp(x)), stable for large |x|.
Var softplus(const Var& x);
Var square(const Var& x);

Var sum(const Var& x);
Var mean(const Var& x);
Var reshape(const Var& x, Shape shape);

/// 2-D cross-correlation with zero padding. x: N x C x H x W, w: F x C x kh x kw.
Var conv2d(const Var& x, const Var& w, std::size_t stride, std::size_t pad);
/// 2 x 2 average pooling with stride 2; spatial extents must be even.
Var avg_pool2d(const Var& x);
/// Nearest-neighbour upsampling by a factor of 2.
Var upsample_nearest2d(const Var& x);
/// Sum over spatial positions: N x C x H x W -> N x C.
Var global_sum_pool(const Var& x);

/// Multiplies channel c (axis 1) by a constant. `multipliers` is [C] (shared
/// over the batch) or [N x C] (one row per sample). The multipliers are
/// constants of the differentiation.
Var channel_scale(const Var& x, const Tensor& multipliers);

struct BatchNormState {
    Tensor running_mean;
    Tensor running_var;
    double momentum = 0.9;
    double eps = 1e-5;

    explicit BatchNormState(std::size_t channels = 0)
        : running_mean(Shape{channels}, 0.0), running_var(Shape{channels}, 1.0) {}
};

/// Batch normalization over every axis except 1. In training mode batch
/// statistics are used and folded into the running averages
/// (running = momentum * running + (1 - momentum) * batch); otherwise the
/// running averages are used.
Var batch_norm(const Var& x, const Var& gamma, const Var& beta, BatchNormState& state, bool training);

/// w / sigma with sigma = u^T W v, W being w viewed as shape[0] x rest. u and v
/// are constants; the gradient flows through sigma's dependence on W.
Var spectral_normalized(const Var& w, const Tensor& u, const Tensor& v);

enum class PrimitiveKind { relu, tanh, softplus, square, avg_pool2d, upsample_nearest2d, global_sum_pool };

const char* name(PrimitiveKind kind);
/// Dispatches to the unary primitive of that kind.
Var apply_primitive(PrimitiveKind kind, const Var& x);

}  // namespace pconv::ops
