#include "pconv/layers.hpp"

#include <Eigen/QR>
#include <cmath>

#include "pconv/errors.hpp"

namespace pconv {

Tensor orthogonal_init(const Shape& shape, RngStream& rng, double gain) {
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const std::size_t rows = shape.at(0);
    const std::size_t cols = numel(shape) / rows;
    const bool wide = rows < cols;
    const std::size_t tall_rows = wide ? cols : rows;
    const std::size_t tall_cols = wide ? rows : cols;

    Eigen::MatrixXd a(tall_rows, tall_cols);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(tall_rows, tall_cols);
    // Sign fix makes the draw uniform over orthogonal matrices.
    const Eigen::MatrixXd r = qr.matrixQR();
    for (Eigen::Index j = 0; j < q.cols(); ++j)
        if (r(j, j) < 0) q.col(j) *= -1.0;

    Tensor out(shape);
    Eigen::Map<RowMat> m(out.raw(), rows, cols);
    if (wide) {
        m = gain * q.transpose();
    } else {
        m = gain * q;
    }
    return out;
}

// ---- PerturbStage ---------------------------------------------------------

PerturbStage::PerturbStage(std::string id, const LayerOptions& options, std::uint64_t seed)
    : id_(std::move(id)),
      variant_(options.perturb),
      per_sample_(options.per_sample_mask),
      rng_(seed, "perturb/" + id_) {
    variant_.validate();
}

Var PerturbStage::apply(const Var& x, bool training) {
    return perturb_input(x, variant_, rng_, training, per_sample_, id_);
}

void PerturbStage::save_state(Archive& a) const { a.put("rng/" + id_, rng_.counter()); }

void PerturbStage::load_state(const Archive& a) { rng_.set_counter(a.u64("rng/" + id_)); }

namespace {

std::optional<SpectralNormState> make_sn(const std::string& id, const Tensor& w, const LayerOptions& o,
                                         std::uint64_t seed) {
    if (!o.spectral_norm) return std::nullopt;
    RngStream rng(seed, "sn/" + id);
    return init_spectral_norm(w, rng, o.sn_iterations);
}

void save_sn(Archive& a, const std::string& id, const std::optional<SpectralNormState>& sn) {
    if (!sn) return;
    a.put("sn/" + id + "/u", sn->u);
    a.put("sn/" + id + "/v", sn->v);
}

void load_sn(const Archive& a, const std::string& id, std::optional<SpectralNormState>& sn) {
    if (!sn) return;
    const Tensor& u = a.tensor("sn/" + id + "/u");
    const Tensor& v = a.tensor("sn/" + id + "/v");
    if (u.shape() != sn->u.shape() || v.shape() != sn->v.shape()) {
        throw ContractViolation("spectral state shape mismatch for '" + id + "'");
    }
    sn->u = u;
    sn->v = v;
}

Var weight_var(Tape& tape, Parameter& w, std::optional<SpectralNormState>& sn, bool training) {
    const Var raw = tape.parameter(w);
    return sn ? spectral_normalize(raw, *sn, training) : raw;
}

}  // namespace

// ---- Dense ----------------------------------------------------------------

Dense::Dense(std::string id, std::size_t in, std::size_t out, const LayerOptions& options, std::uint64_t seed)
    : id_(std::move(id)), perturb_(id_, options, seed) {
    RngStream init(seed, "init/" + id_);
    weight_ = Parameter(id_ + "/weight", orthogonal_init({out, in}, init));
    bias_ = Parameter(id_ + "/bias", Tensor(Shape{out}));
    sn_ = make_sn(id_, weight_.value, options, seed);
}

Var Dense::forward(const Var& x, bool training) {
    if (x.shape().size() != 2 || x.shape()[1] != weight_.value.extent(1)) {
        throw ContractViolation("dense '" + id_ + "': input " + to_string(x.shape()) + " does not match weight " +
                                to_string(weight_.value.shape()));
    }
    Tape& tape = x.tape();
    const Var in = perturb_.apply(x, training);
    const Var w = weight_var(tape, weight_, sn_, training);
    return ops::add_bias(ops::matmul(in, ops::transpose(w)), tape.parameter(bias_));
}

void Dense::collect_parameters(std::vector<Parameter*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
}

void Dense::save_state(Archive& a) const {
    save_sn(a, id_, sn_);
    perturb_.save_state(a);
}

void Dense::load_state(const Archive& a) {
    load_sn(a, id_, sn_);
    perturb_.load_state(a);
}

// ---- Conv2d ---------------------------------------------------------------

Conv2d::Conv2d(std::string id, std::size_t in, std::size_t out, std::size_t kernel, const LayerOptions& options,
               std::uint64_t seed)
    : id_(std::move(id)), pad_((kernel - 1) / 2), perturb_(id_, options, seed) {
    if (kernel % 2 == 0) throw ContractViolation("conv '" + id_ + "': kernel size must be odd");
    RngStream init(seed, "init/" + id_);
    weight_ = Parameter(id_ + "/weight", orthogonal_init({out, in, kernel, kernel}, init));
    bias_ = Parameter(id_ + "/bias", Tensor(Shape{out}));
    sn_ = make_sn(id_, weight_.value, options, seed);
}

Var Conv2d::forward(const Var& x, bool training) {
    Tape& tape = x.tape();
    const Var in = perturb_.apply(x, training);
    const Var w = weight_var(tape, weight_, sn_, training);
    return ops::add_bias(ops::conv2d(in, w, 1, pad_), tape.parameter(bias_));
}

void Conv2d::collect_parameters(std::vector<Parameter*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
}

void Conv2d::save_state(Archive& a) const {
    save_sn(a, id_, sn_);
    perturb_.save_state(a);
}

void Conv2d::load_state(const Archive& a) {
    load_sn(a, id_, sn_);
    perturb_.load_state(a);
}

// ---- BatchNorm ------------------------------------------------------------

BatchNorm::BatchNorm(std::string id, std::size_t channels)
    : id_(std::move(id)),
      gamma_(id_ + "/gamma", Tensor(Shape{channels}, 1.0)),
      beta_(id_ + "/beta", Tensor(Shape{channels})),
      state_(channels) {}

Var BatchNorm::forward(const Var& x, bool training) {
    Tape& tape = x.tape();
    return ops::batch_norm(x, tape.parameter(gamma_), tape.parameter(beta_), state_, training);
}

void BatchNorm::collect_parameters(std::vector<Parameter*>& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
}

void BatchNorm::save_state(Archive& a) const {
    a.put("bn/" + id_ + "/mean", state_.running_mean);
    a.put("bn/" + id_ + "/var", state_.running_var);
}

void BatchNorm::load_state(const Archive& a) {
    const Tensor& m = a.tensor("bn/" + id_ + "/mean");
    const Tensor& v = a.tensor("bn/" + id_ + "/var");
    if (m.shape() != state_.running_mean.shape() || v.shape() != state_.running_var.shape()) {
        throw ContractViolation("batch-norm state shape mismatch for '" + id_ + "'");
    }
    state_.running_mean = m;
    state_.running_var = v;
}

// ---- Reshape --------------------------------------------------------------

Var Reshape::forward(const Var& x, bool) {
    Shape s{x.shape().at(0)};
    s.insert(s.end(), per_sample_.begin(), per_sample_.end());
    return ops::reshape(x, std::move(s));
}

// ---- DiscResBlock ---------------------------------------------------------

DiscResBlock::DiscResBlock(std::string id, std::size_t in, std::size_t out, bool down, bool first,
                           const LayerOptions& options, std::uint64_t seed)
    : down_(down),
      first_(first),
      conv1_(id + "/conv1", in, out, 3, options, seed),
      conv2_(id + "/conv2", out, out, 3, options, seed) {
    if (first || down || in != out) shortcut_.emplace(id + "/shortcut", in, out, 1, options, seed);
}

Var DiscResBlock::forward(const Var& x, bool training) {
    Var h = first_ ? x : ops::relu(x);
    h = conv1_.forward(h, training);
    h = conv2_.forward(ops::relu(h), training);
    if (down_) h = ops::avg_pool2d(h);

    Var skip = x;
    if (first_) {
        skip = shortcut_->forward(down_ ? ops::avg_pool2d(x) : x, training);
    } else if (shortcut_) {
        skip = shortcut_->forward(x, training);
        if (down_) skip = ops::avg_pool2d(skip);
    }
    return ops::add(h, skip);
}

void DiscResBlock::collect_parameters(std::vector<Parameter*>& out) {
    conv1_.collect_parameters(out);
    conv2_.collect_parameters(out);
    if (shortcut_) shortcut_->collect_parameters(out);
}

void DiscResBlock::save_state(Archive& a) const {
    conv1_.save_state(a);
    conv2_.save_state(a);
    if (shortcut_) shortcut_->save_state(a);
}

void DiscResBlock::load_state(const Archive& a) {
    conv1_.load_state(a);
    conv2_.load_state(a);
    if (shortcut_) shortcut_->load_state(a);
}

// ---- GenResBlock ----------------------------------------------------------

GenResBlock::GenResBlock(std::string id, std::size_t in, std::size_t out, bool up, const LayerOptions& options,
                         std::uint64_t seed)
    : up_(up),
      bn1_(id + "/bn1", in),
      conv1_(id + "/conv1", in, out, 3, options, seed),
      bn2_(id + "/bn2", out),
      conv2_(id + "/conv2", out, out, 3, options, seed) {
    if (up || in != out) shortcut_.emplace(id + "/shortcut", in, out, 1, options, seed);
}

Var GenResBlock::forward(const Var& x, bool training) {
    Var h = ops::relu(bn1_.forward(x, training));
    if (up_) h = ops::upsample_nearest2d(h);
    h = conv1_.forward(h, training);
    h = conv2_.forward(ops::relu(bn2_.forward(h, training)), training);

    Var skip = x;
    if (shortcut_) skip = shortcut_->forward(up_ ? ops::upsample_nearest2d(x) : x, training);
    return ops::add(h, skip);
}

void GenResBlock::collect_parameters(std::vector<Parameter*>& out) {
    bn1_.collect_parameters(out);
    conv1_.collect_parameters(out);
    bn2_.collect_parameters(out);
    conv2_.collect_parameters(out);
    if (shortcut_) shortcut_->collect_parameters(out);
}

void GenResBlock::save_state(Archive& a) const {
    bn1_.save_state(a);
    conv1_.save_state(a);
    bn2_.save_state(a);
    conv2_.save_state(a);
    if (shortcut_) shortcut_->save_state(a);
}

void GenResBlock::load_state(const Archive& a) {
    bn1_.load_state(a);
    conv1_.load_state(a);
    bn2_.load_state(a);
    conv2_.load_state(a);
    if (shortcut_) shortcut_->load_state(a);
}

}  // namespace pconv
