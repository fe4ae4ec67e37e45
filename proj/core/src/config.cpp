#include "pconv/config.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "pconv/errors.hpp"

namespace pconv {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

ConfigMap ConfigMap::parse(const std::string& text) {
    ConfigMap m;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(t).substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (m.values_.contains(key)) throw ConfigError("config key '" + key + "' given twice");
        m.values_[key] = trim(std::string_view(t).substr(eq + 1));
    }
    return m;
}

ConfigMap ConfigMap::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void ConfigMap::set_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
    values_[trim(std::string_view(assignment).substr(0, eq))] = trim(std::string_view(assignment).substr(eq + 1));
}

const std::string* ConfigMap::find(const std::string& key) const {
    used_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
    const auto* v = find(key);
    return v ? *v : fallback;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        const double d = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument(*v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + *v + "' is not a number");
    }
}

std::int64_t ConfigMap::get_int(const std::string& key, std::int64_t fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size()) {
        throw ConfigError("config key '" + key + "': '" + *v + "' is not an integer");
    }
    return out;
}

std::size_t ConfigMap::get_size(const std::string& key, std::size_t fallback) const {
    const std::int64_t v = get_int(key, static_cast<std::int64_t>(fallback));
    if (v < 0) throw ConfigError("config key '" + key + "' must be non-negative");
    return static_cast<std::size_t>(v);
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError("config key '" + key + "': '" + *v + "' is not a boolean");
}

std::vector<std::string> ConfigMap::get_list(const std::string& key, const std::vector<std::string>& fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    std::vector<std::string> out;
    std::istringstream in(*v);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void ConfigMap::require_all_used() const {
    std::string unknown;
    for (const auto& [k, v] : values_) {
        if (!used_.contains(k)) unknown += (unknown.empty() ? "" : ", ") + k;
    }
    if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

std::string ConfigMap::to_text() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
}

void TrainConfig::validate() const {
    if (preset != "gmm8" && preset != "tiny32") throw ConfigError("unknown model preset '" + preset + "'");
    try {
        perturb.validate();
    } catch (const ContractViolation& e) {
        throw ConfigError(e.what());
    }
    if (d_steps_per_g == 0) throw ConfigError("train.d_steps_per_g must be positive");
    if (d_batch == 0 || g_batch == 0) throw ConfigError("batch sizes must be positive");
    if (decay_window > total_g_iters) throw ConfigError("train.decay_window exceeds train.total_g_iters");
    if (!(lr >= 0.0)) throw ConfigError("train.lr must be non-negative");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must be in [0, 1)");
    if (latent_dim == 0) throw ConfigError("model.latent_dim must be positive");
    if (preset == "gmm8" && dataset.kind != DatasetKind::gmm8) throw ConfigError("preset gmm8 needs dataset.kind = gmm8");
    if (preset == "tiny32" && dataset.kind == DatasetKind::gmm8) throw ConfigError("preset tiny32 needs an image dataset");
}

TrainConfig train_config_from(const ConfigMap& c) {
    TrainConfig t;
    t.preset = c.get_string("model.preset", t.preset);
    t.loss = parse_loss_kind(c.get_string("train.loss", loss_name(t.loss)));
    t.perturb.kind = parse_perturb_kind(c.get_string("perturb.variant", kind_name(t.perturb.kind)));
    t.perturb.ratio = c.get_double("perturb.ratio", t.perturb.ratio);
    t.perturb.halfwidth = c.get_double("perturb.halfwidth", t.perturb.halfwidth);
    t.per_sample_mask = c.get_bool("perturb.per_sample", t.per_sample_mask);

    t.d_steps_per_g = c.get_size("train.d_steps_per_g", t.d_steps_per_g);
    t.d_batch = c.get_size("train.d_batch", t.d_batch);
    t.g_batch = c.get_size("train.g_batch", 2 * t.d_batch);
    t.total_g_iters = c.get_size("train.total_g_iters", t.total_g_iters);
    t.decay_window = c.get_size("train.decay_window", t.decay_window);
    t.lr = c.get_double("train.lr", t.lr);
    t.beta1 = c.get_double("train.beta1", t.beta1);
    t.beta2 = c.get_double("train.beta2", t.beta2);
    t.seed = static_cast<std::uint64_t>(c.get_int("train.seed", static_cast<std::int64_t>(t.seed)));
    t.eval_every = c.get_size("train.eval_every", t.eval_every);
    t.checkpoint_every = c.get_size("train.checkpoint_every", t.checkpoint_every);

    const bool images = t.preset == "tiny32";
    t.latent_dim = c.get_size("model.latent_dim", images ? 128 : 2);
    t.width = c.get_size("model.width", t.width);
    t.width_divisor = c.get_size("model.width_divisor", t.width_divisor);
    t.sn_iterations = c.get_size("model.sn_iterations", t.sn_iterations);

    const std::string kind = c.get_string("dataset.kind", images ? "synthetic" : "gmm8");
    if (kind == "gmm8") {
        t.dataset.kind = DatasetKind::gmm8;
    } else if (kind == "synthetic") {
        t.dataset.kind = DatasetKind::synthetic_images;
    } else if (kind == "image_dir") {
        t.dataset.kind = DatasetKind::image_dir;
    } else {
        throw ConfigError("unknown dataset.kind '" + kind + "'");
    }
    t.dataset.modes = c.get_size("dataset.modes", t.dataset.modes);
    t.dataset.radius = c.get_double("dataset.radius", t.dataset.radius);
    t.dataset.sigma = c.get_double("dataset.sigma", t.dataset.sigma);
    t.dataset.resolution = c.get_size("dataset.resolution", t.dataset.resolution);
    t.dataset.recipe = c.get_string("dataset.recipe", t.dataset.recipe);
    t.dataset.path = c.get_string("dataset.path", t.dataset.path);
    t.dataset.n_train = c.get_size("dataset.n_train", t.dataset.n_train);
    t.dataset.n_heldout = c.get_size("dataset.n_heldout", t.dataset.n_heldout);
    t.dataset.fraction = c.get_double("dataset.fraction", t.dataset.fraction);
    t.dataset.seed = static_cast<std::uint64_t>(c.get_int("dataset.seed", 0));

    t.validate();
    return t;
}

std::string to_config_text(const TrainConfig& t) {
    ConfigMap c;
    c.set("model.preset", t.preset);
    c.set("train.loss", loss_name(t.loss));
    c.set("perturb.variant", kind_name(t.perturb.kind));
    c.set("perturb.ratio", format_double(t.perturb.ratio));
    c.set("perturb.halfwidth", format_double(t.perturb.halfwidth));
    c.set("perturb.per_sample", t.per_sample_mask ? "true" : "false");
    c.set("train.d_steps_per_g", std::to_string(t.d_steps_per_g));
    c.set("train.d_batch", std::to_string(t.d_batch));
    c.set("train.g_batch", std::to_string(t.g_batch));
    c.set("train.total_g_iters", std::to_string(t.total_g_iters));
    c.set("train.decay_window", std::to_string(t.decay_window));
    c.set("train.lr", format_double(t.lr));
    c.set("train.beta1", format_double(t.beta1));
    c.set("train.beta2", format_double(t.beta2));
    c.set("train.seed", std::to_string(t.seed));
    c.set("train.eval_every", std::to_string(t.eval_every));
    c.set("train.checkpoint_every", std::to_string(t.checkpoint_every));
    c.set("model.latent_dim", std::to_string(t.latent_dim));
    c.set("model.width", std::to_string(t.width));
    c.set("model.width_divisor", std::to_string(t.width_divisor));
    c.set("model.sn_iterations", std::to_string(t.sn_iterations));
    const char* kinds[] = {"gmm8", "synthetic", "image_dir"};
    c.set("dataset.kind", kinds[static_cast<int>(t.dataset.kind)]);
    c.set("dataset.modes", std::to_string(t.dataset.modes));
    c.set("dataset.radius", format_double(t.dataset.radius));
    c.set("dataset.sigma", format_double(t.dataset.sigma));
    c.set("dataset.resolution", std::to_string(t.dataset.resolution));
    c.set("dataset.recipe", t.dataset.recipe);
    c.set("dataset.path", t.dataset.path);
    c.set("dataset.n_train", std::to_string(t.dataset.n_train));
    c.set("dataset.n_heldout", std::to_string(t.dataset.n_heldout));
    c.set("dataset.fraction", format_double(t.dataset.fraction));
    c.set("dataset.seed", std::to_string(t.dataset.seed));
    return c.to_text();
}

}  // namespace pconv
