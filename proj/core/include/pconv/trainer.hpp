#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "pconv/adam.hpp"
#include "pconv/config.hpp"
#include "pconv/dataset.hpp"
#include "pconv/models.hpp"
#include "pconv/rng.hpp"

namespace pconv {

/// One row of the metric history (one per generator iteration).
struct HistoryRow {
    std::uint64_t g_iter = 0;
    double lr = 0.0;
    double d_loss = 0.0;
    double g_loss = 0.0;
    double d_real = 0.0;  ///< mean D output on the last real batch
    double d_fake = 0.0;  ///< mean D output on the last fake batch
};

/// Everything a run needs to continue: networks, optimizers, data order,
/// random streams and counters.
struct RunState {
    TrainConfig config;
    ModelPreset preset;
    Models models;
    AdamState adam_g;
    AdamState adam_d;
    Dataset data;
    EpochSampler sampler;
    RngStream latent;
    std::uint64_t g_iter = 0;
    std::vector<HistoryRow> history;
};

ModelPreset preset_for(const TrainConfig& config);

/// Fresh run: models initialized from config.seed, dataset from dataset.seed.
RunState init_run(const TrainConfig& config);

/// Learning rate at generator iteration `g_iter`: constant, then linear
/// decay to 0 over the final `decay_window` iterations.
double lr_schedule(std::uint64_t g_iter, const TrainConfig& config);

/// d_steps_per_g discriminator updates (fresh real batch and fresh latents
/// each) followed by one generator update on g_batch latents.
void train_step(RunState& state);

/// Runs train_step until g_iter reaches total_g_iters, calling `after_step`
/// after every generator iteration.
void train(RunState& state, const std::function<void(RunState&)>& after_step = {});

/// z ~ N(0, I), n x latent_dim.
Tensor draw_latent(RngStream& rng, std::size_t n, std::size_t latent_dim);

/// n generator samples with BN in inference mode. Depends only on the
/// weights, the BN statistics and `seed`.
Tensor sample_generator(RunState& state, std::size_t n, std::uint64_t seed);

/// Discriminator scores in inference mode (perturbation off), n values.
std::vector<double> score_discriminator(Network& d, const Tensor& x);

void checkpoint_save(const RunState& state, const std::filesystem::path& path);
/// Restores into an existing state. Throws ContractViolation when the
/// stored parameter shapes disagree with the state's architecture.
void checkpoint_load(RunState& state, const std::filesystem::path& path);
/// Rebuilds a run from the configuration embedded in a checkpoint.
RunState resume_run(const std::filesystem::path& path);

/// History as CSV: g_iter,lr,d_loss,g_loss,d_real,d_fake.
std::string history_csv(const std::vector<HistoryRow>& rows);

}  // namespace pconv
