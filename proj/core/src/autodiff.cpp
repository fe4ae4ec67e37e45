#include "pconv/autodiff.hpp"

#include "pconv/errors.hpp"

namespace pconv {

const Tensor& Var::value() const {
    if (!tape_) throw ContractViolation("use of an unbound Var");
    return tape_->value(index_);
}

Tape& Var::tape() const {
    if (!tape_) throw ContractViolation("use of an unbound Var");
    return *tape_;
}

void Tape::check_owner(const Var& v) const {
    if (!v.valid() || &v.tape() != this || v.index() >= nodes_.size()) {
        throw ContractViolation("dangling tape reference: Var does not belong to this tape");
    }
}

Var Tape::constant(Tensor value) {
    if (!value.all_finite()) throw NumericError("non-finite constant recorded on tape");
    nodes_.push_back(Node{std::move(value), {}, false, {}, nullptr});
    return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& p) {
    if (!p.value.all_finite()) throw NumericError("parameter '" + p.id + "' holds non-finite values");
    if (frozen_) {
        nodes_.push_back(Node{p.value, {}, false, {}, nullptr});
    } else {
        nodes_.push_back(Node{p.value, {}, true, {}, &p});
    }
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
    if (!value.all_finite()) throw NumericError("primitive produced non-finite output of shape " + to_string(value.shape()));
    bool needs = false;
    for (const auto& in : inputs) {
        check_owner(in);
        needs = needs || nodes_[in.index()].needs_grad;
    }
    nodes_.push_back(Node{std::move(value), {}, needs, needs ? std::move(backward) : BackwardFn{}, nullptr});
    return Var(this, nodes_.size() - 1);
}

Tensor& Tape::grad_buffer(const Var& v) {
    check_owner(v);
    Node& n = nodes_[v.index()];
    if (n.grad.shape() != n.value.shape()) n.grad = Tensor::like(n.value);
    return n.grad;
}

void Tape::accumulate(const Var& v, const Tensor& delta) {
    check_owner(v);
    if (!nodes_[v.index()].needs_grad) return;
    grad_buffer(v).add_inplace(delta);
}

GradientMap backward(Tape& tape, const Var& loss) {
    tape.check_owner(loss);
    if (loss.value().size() != 1) {
        throw ContractViolation("backward needs a scalar loss, got shape " + to_string(loss.shape()));
    }
    if (tape.consumed_) throw ContractViolation("backward already ran on this tape");
    tape.consumed_ = true;

    GradientMap grads;
    if (!tape.nodes_[loss.index()].needs_grad) return grads;

    tape.grad_buffer(loss).fill(1.0);
    for (std::size_t i = loss.index() + 1; i-- > 0;) {
        auto& node = tape.nodes_[i];
        if (!node.needs_grad || node.grad.shape() != node.value.shape()) continue;
        if (node.param) {
            node.param->grad.add_inplace(node.grad);
            auto [it, inserted] = grads.try_emplace(node.param->id, node.grad);
            if (!inserted) it->second.add_inplace(node.grad);
        } else if (node.backward) {
            // Move out so the closure can touch other nodes freely.
            const Tensor upstream = std::move(node.grad);
            node.backward(tape, upstream);
            node.backward = {};
        }
    }
    return grads;
}

}  // namespace pconv
