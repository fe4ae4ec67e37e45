#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pconv/dataset.hpp"
#include "pconv/objectives.hpp"
#include "pconv/perturb.hpp"

namespace pconv {

/// Flat `key = value` configuration.
///
/// One entry per line; `#` starts a comment; blank lines are ignored. Keys
/// are dotted names (`train.lr`, `dataset.kind`). Every read is tracked so a
/// command can reject keys it never looked at (typos).
class ConfigMap {
public:
    ConfigMap() = default;
    static ConfigMap parse(const std::string& text);
    static ConfigMap load(const std::filesystem::path& path);

    /// Applies a `key=value` override.
    void set_override(const std::string& assignment);
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    bool has(const std::string& key) const { return values_.contains(key); }
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const;

    /// Throws ConfigError naming every key that was never read.
    void require_all_used() const;

    /// Canonical text (sorted keys), used for hashing and embedding.
    std::string to_text() const;
    const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
    const std::string* find(const std::string& key) const;

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

/// Complete recipe of one adversarial training run.
struct TrainConfig {
    std::string preset = "gmm8";   ///< "gmm8" or "tiny32"
    AdvLossKind loss = AdvLossKind::hinge;
    PerturbVariant perturb;        ///< discriminator input perturbation
    bool per_sample_mask = false;

    std::size_t d_steps_per_g = 5;
    std::size_t d_batch = 64;
    std::size_t g_batch = 128;     ///< 2 * d_batch unless set explicitly
    std::size_t total_g_iters = 1000;
    std::size_t decay_window = 0;  ///< linear decay to 0 over the last iterations
    double lr = 2e-4;
    double beta1 = 0.0;
    double beta2 = 0.9;
    std::uint64_t seed = 0;

    std::size_t latent_dim = 2;
    std::size_t width = 128;         ///< gmm8 hidden width
    std::size_t width_divisor = 4;   ///< tiny32 channel divisor
    std::size_t sn_iterations = 1;

    DatasetSpec dataset;

    std::size_t eval_every = 0;
    std::size_t checkpoint_every = 0;

    /// Throws ConfigError on violated invariants.
    void validate() const;
};

/// Reads every `train.*`, `model.*` and `dataset.*` key (see README for the schema).
TrainConfig train_config_from(const ConfigMap& cfg);
/// Serializes a TrainConfig back to ConfigMap text (round-trips through train_config_from).
std::string to_config_text(const TrainConfig& cfg);

}  // namespace pconv
