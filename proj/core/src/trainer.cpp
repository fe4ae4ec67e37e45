#include "pconv/trainer.hpp"

#include <sstream>

#include "pconv/checkpoint.hpp"
#include "pconv/errors.hpp"
#include "pconv/objectives.hpp"

namespace pconv {
namespace {

constexpr std::size_t kInferenceChunk = 256;

double mean_of(const Tensor& t) {
    double s = 0.0;
    for (double v : t.data()) s += v;
    return t.size() ? s / static_cast<double>(t.size()) : 0.0;
}

void zero_grads(std::span<Parameter* const> ps) {
    for (Parameter* p : ps) p->zero_grad();
}

Tensor generate(Network& g, const Tensor& z, bool training) {
    Tape tape;
    tape.freeze_parameters(true);
    return g.forward(tape.constant(z), training).value();
}

void save_adam(Archive& a, const std::string& prefix, const AdamState& s) {
    a.put(prefix + "/step", s.step);
    for (const auto& [id, m] : s.moments) {
        a.put(prefix + "/m/" + id, m.first);
        a.put(prefix + "/v/" + id, m.second);
    }
}

void load_adam(const Archive& a, const std::string& prefix, AdamState& s) {
    s.step = a.u64(prefix + "/step");
    s.moments.clear();
    const std::string mp = prefix + "/m/";
    for (const auto& key : a.keys(mp)) {
        const std::string id = key.substr(mp.size());
        s.moments[id] = AdamMoments{a.tensor(key), a.tensor(prefix + "/v/" + id)};
    }
}

}  // namespace

ModelPreset preset_for(const TrainConfig& c) {
    if (c.preset == "gmm8") return gmm8_preset(c.latent_dim, c.width);
    if (c.preset == "tiny32") return tiny32_preset(c.latent_dim, c.width_divisor, c.dataset.resolution);
    throw ConfigError("unknown model preset '" + c.preset + "'");
}

RunState init_run(const TrainConfig& config) {
    config.validate();
    ModelPreset preset = preset_for(config);
    Models models = build_models(preset, config.perturb, config.seed, config.per_sample_mask, config.sn_iterations);
    Dataset data = make_dataset(config.dataset);
    if (data.train.rank() == 0 || data.train.extent(0) < config.d_batch) {
        throw ConfigError("training split smaller than one discriminator batch");
    }
    RunState s{config, std::move(preset), std::move(models), {}, {}, std::move(data), {}, RngStream(config.seed, "latent"),
               0, {}};
    s.sampler = EpochSampler(s.data.train.extent(0), config.seed);
    for (AdamState* a : {&s.adam_g, &s.adam_d}) {
        a->beta1 = config.beta1;
        a->beta2 = config.beta2;
    }
    return s;
}

double lr_schedule(std::uint64_t g_iter, const TrainConfig& c) {
    if (g_iter > c.total_g_iters) {
        throw ContractViolation("g_iter " + std::to_string(g_iter) + " beyond total " + std::to_string(c.total_g_iters));
    }
    if (g_iter >= c.total_g_iters) return 0.0;
    const std::uint64_t start = c.total_g_iters - c.decay_window;
    if (g_iter <= start) return c.lr;
    return c.lr * static_cast<double>(c.total_g_iters - g_iter) / static_cast<double>(c.decay_window);
}

Tensor draw_latent(RngStream& rng, std::size_t n, std::size_t latent_dim) {
    Tensor z(Shape{n, latent_dim});
    for (double& v : z.data()) v = rng.normal();
    return z;
}

void train_step(RunState& s) {
    const TrainConfig& c = s.config;
    if (s.g_iter >= c.total_g_iters) throw ContractViolation("run already finished");
    const double lr = lr_schedule(s.g_iter, c);
    Network& g = s.models.generator;
    Network& d = s.models.discriminator;
    const auto d_params = d.parameters();
    const auto g_params = g.parameters();

    HistoryRow row;
    row.g_iter = s.g_iter + 1;
    row.lr = lr;

    for (std::size_t step = 0; step < c.d_steps_per_g; ++step) {
        const Tensor real = gather_rows(s.data.train, s.sampler.next(c.d_batch));
        const Tensor fake = generate(g, draw_latent(s.latent, c.d_batch, c.latent_dim), true);
        Tape tape;
        const Var d_real = d.forward(tape.constant(real), true);
        const Var d_fake = d.forward(tape.constant(fake), true);
        const Var loss = d_loss(c.loss, d_real, d_fake);
        zero_grads(d_params);
        const GradientMap grads = backward(tape, loss);
        adam_step(d_params, grads, s.adam_d, lr);
        row.d_loss = loss.value().item();
        row.d_real = mean_of(d_real.value());
        row.d_fake = mean_of(d_fake.value());
    }

    Tape tape;
    const Var fake = g.forward(tape.constant(draw_latent(s.latent, c.g_batch, c.latent_dim)), true);
    tape.freeze_parameters(true);
    const Var score = d.forward(fake, true);
    tape.freeze_parameters(false);
    const Var loss = g_loss(c.loss, score);
    zero_grads(g_params);
    const GradientMap grads = backward(tape, loss);
    adam_step(g_params, grads, s.adam_g, lr);
    row.g_loss = loss.value().item();

    ++s.g_iter;
    s.history.push_back(row);
}

void train(RunState& state, const std::function<void(RunState&)>& after_step) {
    while (state.g_iter < state.config.total_g_iters) {
        train_step(state);
        if (after_step) after_step(state);
    }
}

Tensor sample_generator(RunState& s, std::size_t n, std::uint64_t seed) {
    Shape shape = s.models.generator.output_shape();
    shape.insert(shape.begin(), n);
    if (n == 0) return Tensor(shape);
    RngStream rng(seed, "sample");
    std::vector<Tensor> parts;
    for (std::size_t done = 0; done < n; done += kInferenceChunk) {
        const std::size_t m = std::min(kInferenceChunk, n - done);
        parts.push_back(generate(s.models.generator, draw_latent(rng, m, s.config.latent_dim), false));
    }
    return concat_rows(parts);
}

std::vector<double> score_discriminator(Network& d, const Tensor& x) {
    std::vector<double> out;
    const std::size_t n = x.rank() ? x.extent(0) : 0;
    out.reserve(n);
    for (std::size_t done = 0; done < n; done += kInferenceChunk) {
        const std::size_t m = std::min(kInferenceChunk, n - done);
        Tape tape;
        tape.freeze_parameters(true);
        const Tensor y = d.forward(tape.constant(slice_rows(x, done, done + m)), false).value();
        out.insert(out.end(), y.data().begin(), y.data().end());
    }
    return out;
}

void checkpoint_save(const RunState& s, const std::filesystem::path& path) {
    Archive a;
    a.put("meta/config", to_config_text(s.config));
    a.put("meta/g_iter", s.g_iter);
    s.models.generator.save(a);
    s.models.discriminator.save(a);
    save_adam(a, "adam/G", s.adam_g);
    save_adam(a, "adam/D", s.adam_d);
    a.put("sampler/epoch", s.sampler.epoch());
    a.put("sampler/cursor", static_cast<std::uint64_t>(s.sampler.cursor()));
    a.put("rng/latent", s.latent.counter());
    Tensor hist(Shape{s.history.size(), 6});
    for (std::size_t i = 0; i < s.history.size(); ++i) {
        const HistoryRow& r = s.history[i];
        const double vals[] = {static_cast<double>(r.g_iter), r.lr, r.d_loss, r.g_loss, r.d_real, r.d_fake};
        for (std::size_t j = 0; j < 6; ++j) hist.at(i, j) = vals[j];
    }
    a.put("history", std::move(hist));
    a.save(path);
}

void checkpoint_load(RunState& s, const std::filesystem::path& path) {
    const Archive a = Archive::load(path);
    s.models.generator.load(a);
    s.models.discriminator.load(a);
    load_adam(a, "adam/G", s.adam_g);
    load_adam(a, "adam/D", s.adam_d);
    s.sampler.restore(a.u64("sampler/epoch"), a.u64("sampler/cursor"));
    s.latent.set_counter(a.u64("rng/latent"));
    s.g_iter = a.u64("meta/g_iter");
    const Tensor& hist = a.tensor("history");
    s.history.clear();
    for (std::size_t i = 0; i < hist.extent(0); ++i) {
        s.history.push_back(HistoryRow{static_cast<std::uint64_t>(hist.at(i, 0)), hist.at(i, 1), hist.at(i, 2),
                                       hist.at(i, 3), hist.at(i, 4), hist.at(i, 5)});
    }
}

RunState resume_run(const std::filesystem::path& path) {
    const Archive a = Archive::load(path);
    RunState s = init_run(train_config_from(ConfigMap::parse(a.text("meta/config"))));
    checkpoint_load(s, path);
    return s;
}

std::string history_csv(const std::vector<HistoryRow>& rows) {
    std::ostringstream os;
    os.precision(17);
    os << "g_iter,lr,d_loss,g_loss,d_real,d_fake\n";
    for (const auto& r : rows) {
        os << r.g_iter << ',' << r.lr << ',' << r.d_loss << ',' << r.g_loss << ',' << r.d_real << ',' << r.d_fake << '\n';
    }
    return os.str();
}

}  // namespace pconv
