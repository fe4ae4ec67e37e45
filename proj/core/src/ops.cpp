#include "pconv/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "pconv/errors.hpp"

namespace pconv::ops {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

void require(bool ok, const std::string& what) {
    if (!ok) throw ContractViolation(what);
}

void same_tape(const Var& a, const Var& b) {
    require(&a.tape() == &b.tape(), "operands live on different tapes");
}

void require_same_shape(const char* op, const Var& a, const Var& b) {
    same_tape(a, b);
    require(a.shape() == b.shape(),
            std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
}

// Size of the block that follows axis 1 (1 for 2-D tensors).
std::size_t inner_extent(const Shape& s) {
    std::size_t inner = 1;
    for (std::size_t i = 2; i < s.size(); ++i) inner *= s[i];
    return inner;
}

template <class F, class G>
Var unary(const Var& x, F forward, G derivative) {
    const Tensor& in = x.value();
    Tensor out = Tensor::like(in);
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = forward(in[i]);
    return x.tape().record(std::move(out), {x}, [x, derivative](Tape& t, const Tensor& g) {
        const Tensor& in = x.value();
        Tensor dx = Tensor::like(in);
        for (std::size_t i = 0; i < in.size(); ++i) dx[i] = g[i] * derivative(in[i]);
        t.accumulate(x, dx);
    });
}

void require_4d(const char* op, const Var& x) {
    require(x.shape().size() == 4, std::string(op) + ": expected N x C x H x W, got " + to_string(x.shape()));
}

// Unrolls one image (C x H x W) into a (C*kh*kw) x (Ho*Wo) matrix.
void im2col(const double* img, std::size_t C, std::size_t H, std::size_t W, std::size_t kh, std::size_t kw,
            std::size_t stride, std::size_t pad, std::size_t Ho, std::size_t Wo, double* cols) {
    const std::size_t P = Ho * Wo;
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t i = 0; i < kh; ++i) {
            for (std::size_t j = 0; j < kw; ++j) {
                double* row = cols + ((c * kh + i) * kw + j) * P;
                for (std::size_t oh = 0; oh < Ho; ++oh) {
                    const long ih = static_cast<long>(oh * stride + i) - static_cast<long>(pad);
                    double* dst = row + oh * Wo;
                    if (ih < 0 || ih >= static_cast<long>(H)) {
                        std::fill_n(dst, Wo, 0.0);
                        continue;
                    }
                    const double* src = img + (c * H + static_cast<std::size_t>(ih)) * W;
                    if (stride == 1) {
                        // Valid columns form one contiguous run.
                        const long off = static_cast<long>(j) - static_cast<long>(pad);
                        const long lo = std::clamp(-off, 0L, static_cast<long>(Wo));
                        const long hi = std::clamp(static_cast<long>(W) - off, lo, static_cast<long>(Wo));
                        std::fill(dst, dst + lo, 0.0);
                        std::copy(src + lo + off, src + hi + off, dst + lo);
                        std::fill(dst + hi, dst + Wo, 0.0);
                        continue;
                    }
                    for (std::size_t ow = 0; ow < Wo; ++ow) {
                        const long iw = static_cast<long>(ow * stride + j) - static_cast<long>(pad);
                        dst[ow] = (iw < 0 || iw >= static_cast<long>(W)) ? 0.0 : src[iw];
                    }
                }
            }
        }
    }
}

void col2im_add(const double* cols, std::size_t C, std::size_t H, std::size_t W, std::size_t kh, std::size_t kw,
                std::size_t stride, std::size_t pad, std::size_t Ho, std::size_t Wo, double* img) {
    const std::size_t P = Ho * Wo;
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t i = 0; i < kh; ++i) {
            for (std::size_t j = 0; j < kw; ++j) {
                const double* row = cols + ((c * kh + i) * kw + j) * P;
                for (std::size_t oh = 0; oh < Ho; ++oh) {
                    const long ih = static_cast<long>(oh * stride + i) - static_cast<long>(pad);
                    if (ih < 0 || ih >= static_cast<long>(H)) continue;
                    double* dst = img + (c * H + static_cast<std::size_t>(ih)) * W;
                    const double* src = row + oh * Wo;
                    if (stride == 1) {
                        const long off = static_cast<long>(j) - static_cast<long>(pad);
                        const long lo = std::clamp(-off, 0L, static_cast<long>(Wo));
                        const long hi = std::clamp(static_cast<long>(W) - off, lo, static_cast<long>(Wo));
                        for (long ow = lo; ow < hi; ++ow) dst[ow + off] += src[ow];
                        continue;
                    }
                    for (std::size_t ow = 0; ow < Wo; ++ow) {
                        const long iw = static_cast<long>(ow * stride + j) - static_cast<long>(pad);
                        if (iw >= 0 && iw < static_cast<long>(W)) dst[iw] += src[ow];
                    }
                }
            }
        }
    }
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
    same_tape(a, b);
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    require(sa.size() == 2 && sb.size() == 2 && sa[1] == sb[0],
            "matmul: shape mismatch " + to_string(sa) + " x " + to_string(sb));
    const std::size_t m = sa[0], k = sa[1], n = sb[1];
    Tensor out(Shape{m, n});
    MapMat(out.raw(), m, n).noalias() = ConstMapMat(a.value().raw(), m, k) * ConstMapMat(b.value().raw(), k, n);
    return a.tape().record(std::move(out), {a, b}, [a, b, m, k, n](Tape& t, const Tensor& g) {
        ConstMapMat G(g.raw(), m, n);
        if (t.needs_grad(a.index())) {
            Tensor da(Shape{m, k});
            MapMat(da.raw(), m, k).noalias() = G * ConstMapMat(b.value().raw(), k, n).transpose();
            t.accumulate(a, da);
        }
        if (t.needs_grad(b.index())) {
            Tensor db(Shape{k, n});
            MapMat(db.raw(), k, n).noalias() = ConstMapMat(a.value().raw(), m, k).transpose() * G;
            t.accumulate(b, db);
        }
    });
}

Var transpose(const Var& a) {
    require(a.shape().size() == 2, "transpose: expected 2-D, got " + to_string(a.shape()));
    const std::size_t m = a.shape()[0], n = a.shape()[1];
    Tensor out(Shape{n, m});
    MapMat(out.raw(), n, m) = ConstMapMat(a.value().raw(), m, n).transpose();
    return a.tape().record(std::move(out), {a}, [a, m, n](Tape& t, const Tensor& g) {
        Tensor da(Shape{m, n});
        MapMat(da.raw(), m, n) = ConstMapMat(g.raw(), n, m).transpose();
        t.accumulate(a, da);
    });
}

Var add(const Var& a, const Var& b) {
    require_same_shape("add", a, b);
    Tensor out = a.value();
    out.add_inplace(b.value());
    return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
        t.accumulate(a, g);
        t.accumulate(b, g);
    });
}

Var sub(const Var& a, const Var& b) {
    require_same_shape("sub", a, b);
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
    return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
        t.accumulate(a, g);
        Tensor neg = g;
        for (auto& v : neg.data()) v = -v;
        t.accumulate(b, neg);
    });
}

Var mul(const Var& a, const Var& b) {
    require_same_shape("mul", a, b);
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
    return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
        if (t.needs_grad(a.index())) {
            Tensor da = g;
            for (std::size_t i = 0; i < da.size(); ++i) da[i] *= b.value()[i];
            t.accumulate(a, da);
        }
        if (t.needs_grad(b.index())) {
            Tensor db = g;
            for (std::size_t i = 0; i < db.size(); ++i) db[i] *= a.value()[i];
            t.accumulate(b, db);
        }
    });
}

Var scale(const Var& x, double factor) {
    return unary(x, [factor](double v) { return v * factor; }, [factor](double) { return factor; });
}

Var add_scalar(const Var& x, double offset) {
    return unary(x, [offset](double v) { return v + offset; }, [](double) { return 1.0; });
}

Var add_bias(const Var& x, const Var& b) {
    same_tape(x, b);
    const Shape& s = x.shape();
    require((s.size() == 2 || s.size() == 4) && b.shape().size() == 1 && b.shape()[0] == s[1],
            "add_bias: bias " + to_string(b.shape()) + " does not match " + to_string(s));
    const std::size_t N = s[0], C = s[1], inner = inner_extent(s);
    Tensor out = x.value();
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t c = 0; c < C; ++c) {
            double* p = out.raw() + (n * C + c) * inner;
            const double bc = b.value()[c];
            for (std::size_t i = 0; i < inner; ++i) p[i] += bc;
        }
    return x.tape().record(std::move(out), {x, b}, [x, b, N, C, inner](Tape& t, const Tensor& g) {
        t.accumulate(x, g);
        if (t.needs_grad(b.index())) {
            Tensor db(Shape{C});
            for (std::size_t n = 0; n < N; ++n)
                for (std::size_t c = 0; c < C; ++c) {
                    const double* p = g.raw() + (n * C + c) * inner;
                    double acc = 0.0;
                    for (std::size_t i = 0; i < inner; ++i) acc += p[i];
                    db[c] += acc;
                }
            t.accumulate(b, db);
        }
    });
}

Var relu(const Var& x) {
    return unary(x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

Var tanh(const Var& x) {
    return unary(
        x, [](double v) { return std::tanh(v); },
        [](double v) {
            const double t = std::tanh(v);
            return 1.0 - t * t;
        });
}

Var softplus(const Var& x) {
    return unary(
        x, [](double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); },
        [](double v) { return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)); });
}

Var square(const Var& x) {
    return unary(x, [](double v) { return v * v; }, [](double v) { return 2.0 * v; });
}

Var sum(const Var& x) {
    double acc = 0.0;
    for (double v : x.value().data()) acc += v;
    return x.tape().record(Tensor::scalar(acc), {x}, [x](Tape& t, const Tensor& g) {
        t.accumulate(x, Tensor::like(x.value(), g[0]));
    });
}

Var mean(const Var& x) {
    require(x.value().size() > 0, "mean of an empty tensor");
    return scale(sum(x), 1.0 / static_cast<double>(x.value().size()));
}

Var reshape(const Var& x, Shape shape) {
    Tensor out = x.value().reshaped(std::move(shape));
    return x.tape().record(std::move(out), {x}, [x](Tape& t, const Tensor& g) {
        t.accumulate(x, g.reshaped(x.shape()));
    });
}

Var conv2d(const Var& x, const Var& w, std::size_t stride, std::size_t pad) {
    same_tape(x, w);
    require_4d("conv2d", x);
    require(w.shape().size() == 4, "conv2d: kernel must be F x C x kh x kw, got " + to_string(w.shape()));
    const Shape& sx = x.shape();
    const Shape& sw = w.shape();
    const std::size_t N = sx[0], C = sx[1], H = sx[2], W = sx[3];
    const std::size_t F = sw[0], kh = sw[2], kw = sw[3];
    require(sw[1] == C, "conv2d: input " + to_string(sx) + " has " + std::to_string(C) + " channels, kernel " +
                            to_string(sw) + " expects " + std::to_string(sw[1]));
    require(stride >= 1, "conv2d: stride must be >= 1");
    require(kh <= H + 2 * pad && kw <= W + 2 * pad, "conv2d: kernel larger than padded input");
    require((H + 2 * pad - kh) % stride == 0 && (W + 2 * pad - kw) % stride == 0,
            "conv2d: non-integral output extent for input " + to_string(sx) + ", kernel " + to_string(sw) +
                ", stride " + std::to_string(stride) + ", pad " + std::to_string(pad));
    const std::size_t Ho = (H + 2 * pad - kh) / stride + 1;
    const std::size_t Wo = (W + 2 * pad - kw) / stride + 1;
    const std::size_t K = C * kh * kw, P = Ho * Wo;

    Tensor out(Shape{N, F, Ho, Wo});
    std::vector<double> cols(K * P);
    ConstMapMat Wm(w.value().raw(), F, K);
    for (std::size_t n = 0; n < N; ++n) {
        im2col(x.value().raw() + n * C * H * W, C, H, W, kh, kw, stride, pad, Ho, Wo, cols.data());
        MapMat(out.raw() + n * F * P, F, P).noalias() = Wm * ConstMapMat(cols.data(), K, P);
    }

    return x.tape().record(std::move(out), {x, w}, [=](Tape& t, const Tensor& g) {
        const bool gx = t.needs_grad(x.index());
        const bool gw = t.needs_grad(w.index());
        std::vector<double> col(K * P);
        std::vector<double> dcol(gx ? K * P : 0);
        Tensor dw = gw ? Tensor(Shape{F, C, kh, kw}) : Tensor{};
        Tensor dx = gx ? Tensor(Shape{N, C, H, W}) : Tensor{};
        ConstMapMat Wm(w.value().raw(), F, K);
        for (std::size_t n = 0; n < N; ++n) {
            ConstMapMat Gn(g.raw() + n * F * P, F, P);
            if (gw) {
                im2col(x.value().raw() + n * C * H * W, C, H, W, kh, kw, stride, pad, Ho, Wo, col.data());
                MapMat(dw.raw(), F, K).noalias() += Gn * ConstMapMat(col.data(), K, P).transpose();
            }
            if (gx) {
                MapMat(dcol.data(), K, P).noalias() = Wm.transpose() * Gn;
                col2im_add(dcol.data(), C, H, W, kh, kw, stride, pad, Ho, Wo, dx.raw() + n * C * H * W);
            }
        }
        if (gw) t.accumulate(w, dw);
        if (gx) t.accumulate(x, dx);
    });
}

Var avg_pool2d(const Var& x) {
    require_4d("avg_pool2d", x);
    const Shape& s = x.shape();
    require(s[2] % 2 == 0 && s[3] % 2 == 0, "avg_pool2d: odd spatial extents in " + to_string(s));
    const std::size_t NC = s[0] * s[1], H = s[2], W = s[3], Ho = H / 2, Wo = W / 2;
    Tensor out(Shape{s[0], s[1], Ho, Wo});
    const double* in = x.value().raw();
    for (std::size_t p = 0; p < NC; ++p)
        for (std::size_t i = 0; i < Ho; ++i)
            for (std::size_t j = 0; j < Wo; ++j) {
                const double* a = in + (p * H + 2 * i) * W + 2 * j;
                out[(p * Ho + i) * Wo + j] = 0.25 * (a[0] + a[1] + a[W] + a[W + 1]);
            }
    return x.tape().record(std::move(out), {x}, [x, NC, H, W, Ho, Wo](Tape& t, const Tensor& g) {
        Tensor dx = Tensor::like(x.value());
        for (std::size_t p = 0; p < NC; ++p)
            for (std::size_t i = 0; i < Ho; ++i)
                for (std::size_t j = 0; j < Wo; ++j) {
                    const double v = 0.25 * g[(p * Ho + i) * Wo + j];
                    double* a = dx.raw() + (p * H + 2 * i) * W + 2 * j;
                    a[0] += v;
                    a[1] += v;
                    a[W] += v;
                    a[W + 1] += v;
                }
        t.accumulate(x, dx);
    });
}

Var upsample_nearest2d(const Var& x) {
    require_4d("upsample_nearest2d", x);
    const Shape& s = x.shape();
    const std::size_t NC = s[0] * s[1], H = s[2], W = s[3], Ho = 2 * H, Wo = 2 * W;
    Tensor out(Shape{s[0], s[1], Ho, Wo});
    const double* in = x.value().raw();
    for (std::size_t p = 0; p < NC; ++p)
        for (std::size_t i = 0; i < Ho; ++i)
            for (std::size_t j = 0; j < Wo; ++j) out[(p * Ho + i) * Wo + j] = in[(p * H + i / 2) * W + j / 2];
    return x.tape().record(std::move(out), {x}, [x, NC, H, W, Ho, Wo](Tape& t, const Tensor& g) {
        Tensor dx = Tensor::like(x.value());
        for (std::size_t p = 0; p < NC; ++p)
            for (std::size_t i = 0; i < Ho; ++i)
                for (std::size_t j = 0; j < Wo; ++j) dx[(p * H + i / 2) * W + j / 2] += g[(p * Ho + i) * Wo + j];
        t.accumulate(x, dx);
    });
}

Var global_sum_pool(const Var& x) {
    require_4d("global_sum_pool", x);
    const Shape& s = x.shape();
    const std::size_t NC = s[0] * s[1], HW = s[2] * s[3];
    Tensor out(Shape{s[0], s[1]});
    for (std::size_t p = 0; p < NC; ++p) {
        double acc = 0.0;
        for (std::size_t i = 0; i < HW; ++i) acc += x.value()[p * HW + i];
        out[p] = acc;
    }
    return x.tape().record(std::move(out), {x}, [x, NC, HW](Tape& t, const Tensor& g) {
        Tensor dx = Tensor::like(x.value());
        for (std::size_t p = 0; p < NC; ++p) std::fill_n(dx.raw() + p * HW, HW, g[p]);
        t.accumulate(x, dx);
    });
}

Var channel_scale(const Var& x, const Tensor& multipliers) {
    const Shape& s = x.shape();
    require(s.size() >= 2, "channel_scale: expected at least 2-D input, got " + to_string(s));
    const std::size_t N = s[0], C = s[1], inner = inner_extent(s);
    const Shape& m = multipliers.shape();
    const bool per_sample = m.size() == 2;
    require((m.size() == 1 && m[0] == C) || (per_sample && m[0] == N && m[1] == C),
            "channel_scale: multipliers " + to_string(m) + " do not match input " + to_string(s));

    auto apply = [=](const Tensor& src, const Tensor& mult) {
        Tensor dst = src;
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t c = 0; c < C; ++c) {
                const double k = per_sample ? mult[n * C + c] : mult[c];
                double* p = dst.raw() + (n * C + c) * inner;
                for (std::size_t i = 0; i < inner; ++i) p[i] *= k;
            }
        return dst;
    };
    return x.tape().record(apply(x.value(), multipliers), {x},
                           [x, multipliers, apply](Tape& t, const Tensor& g) { t.accumulate(x, apply(g, multipliers)); });
}

Var batch_norm(const Var& x, const Var& gamma, const Var& beta, BatchNormState& state, bool training) {
    same_tape(x, gamma);
    same_tape(x, beta);
    const Shape& s = x.shape();
    require(s.size() == 2 || s.size() == 4, "batch_norm: expected 2-D or 4-D input, got " + to_string(s));
    const std::size_t N = s[0], C = s[1], inner = inner_extent(s);
    require(gamma.shape() == Shape{C} && beta.shape() == Shape{C} && state.running_mean.shape() == Shape{C},
            "batch_norm: parameter extents do not match " + std::to_string(C) + " channels");
    const std::size_t count = N * inner;
    require(!training || count > 1, "batch_norm: training mode needs more than one value per channel");

    Tensor mu(Shape{C}), inv_std(Shape{C});
    const Tensor& in = x.value();
    if (training) {
        for (std::size_t c = 0; c < C; ++c) {
            double acc = 0.0;
            for (std::size_t n = 0; n < N; ++n) {
                const double* p = in.raw() + (n * C + c) * inner;
                for (std::size_t i = 0; i < inner; ++i) acc += p[i];
            }
            const double m = acc / static_cast<double>(count);
            double var = 0.0;
            for (std::size_t n = 0; n < N; ++n) {
                const double* p = in.raw() + (n * C + c) * inner;
                for (std::size_t i = 0; i < inner; ++i) var += (p[i] - m) * (p[i] - m);
            }
            const double biased = var / static_cast<double>(count);
            const double unbiased = var / static_cast<double>(count - 1);
            mu[c] = m;
            inv_std[c] = 1.0 / std::sqrt(biased + state.eps);
            state.running_mean[c] = state.momentum * state.running_mean[c] + (1.0 - state.momentum) * m;
            state.running_var[c] = state.momentum * state.running_var[c] + (1.0 - state.momentum) * unbiased;
        }
    } else {
        for (std::size_t c = 0; c < C; ++c) {
            mu[c] = state.running_mean[c];
            inv_std[c] = 1.0 / std::sqrt(state.running_var[c] + state.eps);
        }
    }

    Tensor xhat = Tensor::like(in);
    Tensor out = Tensor::like(in);
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t c = 0; c < C; ++c) {
            const std::size_t off = (n * C + c) * inner;
            for (std::size_t i = 0; i < inner; ++i) {
                xhat[off + i] = (in[off + i] - mu[c]) * inv_std[c];
                out[off + i] = gamma.value()[c] * xhat[off + i] + beta.value()[c];
            }
        }

    return x.tape().record(
        std::move(out), {x, gamma, beta},
        [x, gamma, beta, xhat = std::move(xhat), inv_std, N, C, inner, count, training](Tape& t, const Tensor& g) {
            Tensor dgamma(Shape{C}), dbeta(Shape{C});
            for (std::size_t n = 0; n < N; ++n)
                for (std::size_t c = 0; c < C; ++c) {
                    const std::size_t off = (n * C + c) * inner;
                    for (std::size_t i = 0; i < inner; ++i) {
                        dgamma[c] += g[off + i] * xhat[off + i];
                        dbeta[c] += g[off + i];
                    }
                }
            if (t.needs_grad(x.index())) {
                Tensor dx = Tensor::like(x.value());
                const double m = static_cast<double>(count);
                for (std::size_t n = 0; n < N; ++n)
                    for (std::size_t c = 0; c < C; ++c) {
                        const std::size_t off = (n * C + c) * inner;
                        const double gc = gamma.value()[c];
                        for (std::size_t i = 0; i < inner; ++i) {
                            if (training) {
                                dx[off + i] = gc * inv_std[c] / m *
                                              (m * g[off + i] - dbeta[c] - xhat[off + i] * dgamma[c]);
                            } else {
                                dx[off + i] = gc * inv_std[c] * g[off + i];
                            }
                        }
                    }
                t.accumulate(x, dx);
            }
            t.accumulate(gamma, dgamma);
            t.accumulate(beta, dbeta);
        });
}

Var spectral_normalized(const Var& w, const Tensor& u, const Tensor& v) {
    const Shape& s = w.shape();
    require(!s.empty(), "spectral_normalized: scalar weight");
    const std::size_t rows = s[0], cols = w.value().size() / rows;
    require(u.size() == rows && v.size() == cols,
            "spectral_normalized: singular vectors do not match weight " + to_string(s));
    ConstMapMat Wm(w.value().raw(), rows, cols);
    Eigen::Map<const Eigen::VectorXd> um(u.raw(), rows), vm(v.raw(), cols);
    const double sigma = std::max(um.dot(Wm * vm), 1e-12);
    Tensor out = w.value();
    for (auto& e : out.data()) e /= sigma;
    return w.tape().record(std::move(out), {w}, [w, u, v, rows, cols, sigma](Tape& t, const Tensor& g) {
        ConstMapMat G(g.raw(), rows, cols);
        ConstMapMat Wm(w.value().raw(), rows, cols);
        Eigen::Map<const Eigen::VectorXd> um(u.raw(), rows), vm(v.raw(), cols);
        const double inner = (G.array() * Wm.array()).sum();
        Tensor dw = Tensor::like(w.value());
        MapMat(dw.raw(), rows, cols) = G / sigma - (inner / (sigma * sigma)) * (um * vm.transpose());
        t.accumulate(w, dw);
    });
}

const char* name(PrimitiveKind kind) {
    switch (kind) {
        case PrimitiveKind::relu: return "relu";
        case PrimitiveKind::tanh: return "tanh";
        case PrimitiveKind::softplus: return "softplus";
        case PrimitiveKind::square: return "square";
        case PrimitiveKind::avg_pool2d: return "avg_pool2d";
        case PrimitiveKind::upsample_nearest2d: return "upsample_nearest2d";
        case PrimitiveKind::global_sum_pool: return "global_sum_pool";
    }
    return "?";
}

Var apply_primitive(PrimitiveKind kind, const Var& x) {
    switch (kind) {
        case PrimitiveKind::relu: return relu(x);
        case PrimitiveKind::tanh: return tanh(x);
        case PrimitiveKind::softplus: return softplus(x);
        case PrimitiveKind::square: return square(x);
        case PrimitiveKind::avg_pool2d: return avg_pool2d(x);
        case PrimitiveKind::upsample_nearest2d: return upsample_nearest2d(x);
        case PrimitiveKind::global_sum_pool: return global_sum_pool(x);
    }
    throw ContractViolation("unknown primitive kind");
}

}  // namespace pconv::ops
