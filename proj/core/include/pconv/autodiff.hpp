#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pconv/tensor.hpp"

namespace pconv {

using ParamId = std::string;

/// A trainable tensor plus its gradient accumulator.
struct Parameter {
    ParamId id;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(ParamId id_, Tensor value_) : id(std::move(id_)), value(std::move(value_)), grad(Tensor::like(value)) {}

    void zero_grad() { grad = Tensor::like(value); }
};

using GradientMap = std::map<ParamId, Tensor>;

class Tape;

/// Handle to a value recorded on a tape.
class Var {
public:
    Var() = default;

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    Tape& tape() const;
    std::size_t index() const noexcept { return index_; }
    bool valid() const noexcept { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

    Tape* tape_ = nullptr;
    std::size_t index_ = 0;
};

/// Record of a random channel mask drawn during a forward pass.
struct MaskRecord {
    std::string label;
    std::uint64_t counter_before = 0;
    std::vector<double> multipliers;
};

/// Reverse-mode tape.
///
/// Primitives evaluate eagerly and append a node holding the result and a
/// backward closure. Anything random a primitive consumed (channel masks) is
/// captured in the closure and logged via `record_mask`, so the backward pass
/// never draws again.
class Tape {
public:
    /// Backward closure: receives the upstream gradient of the node's output.
    using BackwardFn = std::function<void(Tape&, const Tensor& upstream)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    /// Parameter leaf; recorded as a constant while parameters are frozen.
    Var parameter(Parameter& p);

    /// While frozen, no gradient flows into parameters that enter the tape
    /// (used for the other player's network and for inference passes).
    void freeze_parameters(bool frozen) noexcept { frozen_ = frozen; }
    bool parameters_frozen() const noexcept { return frozen_; }

    /// Appends a primitive result. `inputs` are the operands the closure may
    /// push gradient into; the node needs a gradient iff any input does.
    Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);

    const Tensor& value(std::size_t index) const { return nodes_.at(index).value; }
    bool needs_grad(std::size_t index) const { return nodes_.at(index).needs_grad; }
    std::size_t size() const noexcept { return nodes_.size(); }

    /// grad(index) += delta, allocating the accumulator on first use. Ignored
    /// for nodes that do not need a gradient.
    void accumulate(const Var& v, const Tensor& delta);
    /// Direct access to a node's gradient buffer (allocated on demand).
    Tensor& grad_buffer(const Var& v);

    void record_mask(MaskRecord record) { masks_.push_back(std::move(record)); }
    const std::vector<MaskRecord>& masks() const noexcept { return masks_; }

    void check_owner(const Var& v) const;

private:
    friend GradientMap backward(Tape& tape, const Var& loss);

    struct Node {
        Tensor value;
        Tensor grad;
        bool needs_grad = false;
        BackwardFn backward;
        Parameter* param = nullptr;
    };

    std::vector<Node> nodes_;
    std::vector<MaskRecord> masks_;
    bool consumed_ = false;
    bool frozen_ = false;
};

/// Runs the reverse sweep from a scalar loss. Each parameter leaf reached gets
/// its gradient added to `Parameter::grad`; the returned map holds this call's
/// contribution keyed by parameter id. A tape supports one backward sweep.
GradientMap backward(Tape& tape, const Var& loss);

}  // namespace pconv
