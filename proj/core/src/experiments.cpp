#include "pconv/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <ostream>
#include <sstream>
#include <thread>

#include "pconv/config.hpp"
#include "pconv/encoder.hpp"
#include "pconv/errors.hpp"
#include "pconv/metrics.hpp"
#include "pconv/trainer.hpp"
#include "report_io.hpp"

#ifndef PCONV_VERSION
#define PCONV_VERSION "unknown"
#endif

namespace pconv {

namespace fs = std::filesystem;
using io::json;

const std::vector<std::string>& experiment_commands() {
    static const std::vector<std::string> names{"gmm8", "probmap", "deltay", "tinygan", "fid", "memorization"};
    return names;
}

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const NumericError*>(&e)) return 2;
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e)) return 3;
    return 1;
}

std::pair<double, double> mean_stddev(std::span<const double> v) {
    if (v.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

PerturbVariant parse_variant(const std::string& text, double default_ratio) {
    const auto at = text.find('@');
    PerturbVariant v;
    v.kind = parse_perturb_kind(text.substr(0, at));
    v.ratio = v.kind == PerturbKind::none ? 0.0 : default_ratio;
    if (at != std::string::npos) {
        try {
            std::size_t pos = 0;
            v.ratio = std::stod(text.substr(at + 1), &pos);
            if (pos != text.size() - at - 1) throw std::invalid_argument(text);
        } catch (const std::exception&) {
            throw ConfigError("bad variant ratio in '" + text + "'");
        }
    }
    try {
        v.validate();
    } catch (const ContractViolation& e) {
        throw ConfigError(e.what());
    }
    return v;
}

std::string variant_label(const PerturbVariant& v) {
    if (v.kind == PerturbKind::none) return "conv";
    std::ostringstream os;
    os << kind_name(v.kind) << '-' << v.ratio;
    return os.str();
}

namespace {

struct Context {
    const ExperimentSpec& spec;
    ConfigMap cfg;
    std::vector<std::uint64_t> seeds;
    fs::path stage;
    std::ostream* log;
    std::mutex log_mutex;

    void say(const std::string& line) {
        if (!log) return;
        std::lock_guard lock(log_mutex);
        *log << line << std::endl;
    }
    fs::path run_dir(const std::string& group, std::uint64_t seed) const {
        return stage / group / std::to_string(seed);
    }
};

std::size_t thread_count() {
    if (const char* env = std::getenv("PCONV_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
        throw ConfigError(std::string("PCONV_THREADS must be a positive integer, got '") + env + "'");
    }
    return 1;
}

void run_jobs(std::vector<std::function<void()>>& jobs) {
    const std::size_t workers = std::min(thread_count(), jobs.size());
    if (workers <= 1) {
        for (auto& j : jobs) j();
        return;
    }
    std::mutex m;
    std::size_t next = 0;
    std::exception_ptr first;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i;
                {
                    std::lock_guard lock(m);
                    if (next >= jobs.size() || first) return;
                    i = next++;
                }
                try {
                    jobs[i]();
                } catch (...) {
                    std::lock_guard lock(m);
                    if (!first) first = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

std::vector<PerturbVariant> variants_from(const ConfigMap& cfg, const std::string& key,
                                          const std::vector<std::string>& fallback, double default_ratio) {
    std::vector<PerturbVariant> out;
    for (const auto& s : cfg.get_list(key, fallback)) out.push_back(parse_variant(s, default_ratio));
    if (out.empty()) throw ConfigError(key + " lists no variants");
    return out;
}

std::vector<double> doubles_from(const ConfigMap& cfg, const std::string& key, const std::vector<std::string>& fb) {
    std::vector<double> out;
    for (const auto& s : cfg.get_list(key, fb)) {
        try {
            out.push_back(std::stod(s));
        } catch (const std::exception&) {
            throw ConfigError(key + ": '" + s + "' is not a number");
        }
    }
    return out;
}

void write_json(const fs::path& path, const json& j) { io::write_text(path, j.dump(2) + "\n"); }

/// Reads metric fields (dotted paths into report.json) of every seed of
/// every group back from disk and aggregates them.
std::vector<AggregateRow> aggregate_from_files(Context& ctx, const std::vector<std::string>& groups,
                                               const std::vector<std::string>& metrics, const std::string& file) {
    std::vector<AggregateRow> rows;
    json agg = json::object();
    for (const auto& g : groups) {
        for (const auto& metric : metrics) {
            std::vector<double> vals;
            for (std::uint64_t seed : ctx.seeds) {
                const json rep = json::parse(io::read_text(ctx.run_dir(g, seed) / file));
                const json* node = &rep;
                std::istringstream path(metric);
                std::string part;
                while (std::getline(path, part, '.')) {
                    if (!node->contains(part)) {
                        node = nullptr;
                        break;
                    }
                    node = &(*node)[part];
                }
                if (node && node->is_number()) vals.push_back(node->get<double>());
            }
            if (vals.empty()) continue;
            const auto [mean, sd] = mean_stddev(vals);
            rows.push_back({g, metric, mean, sd, vals.size()});
            agg[g][metric] = json{{"mean", mean}, {"stddev", sd}, {"n", vals.size()}, {"values", vals}};
        }
    }
    write_json(ctx.stage / "aggregate.json", json{{"schema", io::kSchemaVersion}, {"groups", agg}});
    std::ostringstream csv;
    csv.precision(17);
    csv << "group,metric,mean,stddev,n\n";
    for (const auto& r : rows) csv << r.group << ',' << r.metric << ',' << r.mean << ',' << r.stddev << ',' << r.n << '\n';
    io::write_text(ctx.stage / "aggregate.csv", csv.str());
    return rows;
}

TrainConfig base_train_config(ConfigMap& cfg, const std::string& preset) {
    if (!cfg.has("model.preset")) cfg.set("model.preset", preset);
    TrainConfig tc = train_config_from(cfg);
    if (tc.preset != preset) throw ConfigError("command expects model.preset = " + preset);
    return tc;
}

std::set<std::uint64_t> iters_from(const ConfigMap& cfg, const std::string& key) {
    std::set<std::uint64_t> out;
    for (const auto& s : cfg.get_list(key, {})) {
        try {
            out.insert(std::stoull(s));
        } catch (const std::exception&) {
            throw ConfigError(key + ": '" + s + "' is not an iteration count");
        }
    }
    return out;
}

// ---- gmm8 -------------------------------------------------------------------

std::vector<AggregateRow> cmd_gmm8(Context& ctx) {
    const TrainConfig base = base_train_config(ctx.cfg, "gmm8");
    const auto variants = variants_from(ctx.cfg, "experiment.variants", {"conv", "pconv"}, base.perturb.ratio);
    const std::size_t n_eval = ctx.cfg.get_size("experiment.samples", 10000);
    const auto snapshots = iters_from(ctx.cfg, "experiment.snapshots");
    ctx.cfg.require_all_used();
    const auto centers = gmm_centers(base.dataset.modes, base.dataset.radius);
    const double extent = base.dataset.radius * 1.5;

    std::vector<std::function<void()>> jobs;
    std::vector<std::string> groups;
    for (const auto& v : variants) {
        const std::string group = variant_label(v);
        groups.push_back(group);
        for (std::uint64_t seed : ctx.seeds) {
            jobs.emplace_back([&, v, group, seed] {
                TrainConfig tc = base;
                tc.seed = seed;
                tc.perturb = v;
                const fs::path dir = ctx.run_dir(group, seed);
                RunState st = init_run(tc);
                json snaps = json::array();
                auto snapshot = [&](RunState& s) {
                    if (!snapshots.contains(s.g_iter)) return;
                    const Tensor samples = sample_generator(s, n_eval, seed);
                    snaps.push_back(json{{"g_iter", s.g_iter}, {"coverage", io::to_json(mode_coverage(samples, centers, tc.dataset.sigma))}});
                    io::write_text(dir / ("samples_" + std::to_string(s.g_iter) + ".svg"),
                                   io::svg_scatter(samples, centers, -extent, extent,
                                                   group + " seed " + std::to_string(seed) + " iter " +
                                                       std::to_string(s.g_iter)));
                };
                snapshot(st);
                train(st, snapshot);
                const Tensor samples = sample_generator(st, n_eval, seed);
                const ModeCoverageReport cov = mode_coverage(samples, centers, tc.dataset.sigma);
                io::write_text(dir / "history.csv", history_csv(st.history));
                io::write_text(dir / "samples.csv", io::matrix_csv(samples));
                io::write_text(dir / "samples_final.svg",
                               io::svg_scatter(samples, centers, -extent, extent,
                                               group + " seed " + std::to_string(seed) + " final"));
                json rep = io::to_json(cov);
                rep["variant"] = io::to_json(v);
                rep["seed"] = seed;
                rep["g_iters"] = st.g_iter;
                rep["snapshots"] = snaps;
                write_json(dir / "report.json", rep);
                ctx.say("gmm8 " + group + " seed " + std::to_string(seed) + ": covered_modes " +
                        std::to_string(cov.covered_modes));
            });
        }
    }
    run_jobs(jobs);
    return aggregate_from_files(ctx, groups, {"covered_modes", "hq_fraction"}, "report.json");
}

// ---- probmap ----------------------------------------------------------------

std::vector<AggregateRow> cmd_probmap(Context& ctx) {
    const double ratio = ctx.cfg.get_double("probmap.ratio", 0.5);
    const std::size_t n = ctx.cfg.get_size("probmap.samples", 10000);
    const auto variants = variants_from(ctx.cfg, "experiment.variants", {"sdrop", "pconv"}, ratio);
    ctx.cfg.require_all_used();
    std::vector<std::string> groups;
    for (const auto& v : variants) {
        const std::string group = variant_label(v);
        groups.push_back(group);
        const auto reach = reachable_cells(v);
        for (std::uint64_t seed : ctx.seeds) {
            RngStream rng(seed, "probmap/" + group);
            const ProbMap pm = probmap(v, n, rng);
            std::size_t reachable = 0, hit = 0;
            for (std::size_t i = 0; i < reach.size(); ++i) {
                reachable += reach[i];
                hit += reach[i] && pm.counts[i] > 0;
            }
            json rep = io::to_json(pm);
            rep["reachable_cells"] = reachable;
            rep["reachable_occupied"] = hit;
            rep["reachable_fraction"] = reachable ? static_cast<double>(hit) / static_cast<double>(reachable) : 0.0;
            const fs::path dir = ctx.run_dir(group, seed);
            write_json(dir / "report.json", rep);
            io::write_text(dir / "histogram.csv", io::probmap_csv(pm));
            io::write_text(dir / "probmap.svg", io::svg_heatmap(pm, group + " on v = (1, 1)"));
            ctx.say("probmap " + group + ": " + std::to_string(pm.occupied()) + " cells");
        }
    }
    return aggregate_from_files(ctx, groups, {"occupied_cells", "reachable_fraction"}, "report.json");
}

// ---- deltay -----------------------------------------------------------------

std::vector<AggregateRow> cmd_deltay(Context& ctx) {
    const std::size_t n = ctx.cfg.get_size("deltay.n", 10);
    const auto ratios = doubles_from(ctx.cfg, "deltay.ratios", {"0.1", "0.2", "0.3"});
    const auto kinds = ctx.cfg.get_list("deltay.variants", {"sdrop", "sdrop_star", "sdrop_dagger", "pconv"});
    DeltaYOptions opt;
    opt.sampling = ctx.cfg.get_bool("deltay.sampling", false);
    opt.trials = ctx.cfg.get_size("deltay.trials", 10000);
    opt.k_grid = ctx.cfg.get_size("deltay.k_grid", 11);
    ctx.cfg.require_all_used();
    if (n == 0) throw ConfigError("deltay.n must be positive");
    if (n > 20 && !opt.sampling) throw ConfigError("deltay.n > 20 needs deltay.sampling = true");

    std::vector<std::string> groups;
    for (const auto& kind : kinds)
        for (double r : ratios) {
            const PerturbVariant v = parse_variant(kind, r);
            const std::string group = variant_label(v);
            groups.push_back(group);
            for (std::uint64_t seed : ctx.seeds) {
                // x sorted in decreasing order, both x and w non-negative.
                RngStream rng(seed, "deltay/input");
                std::vector<double> x(n), w(n);
                for (auto& xi : x) xi = rng.uniform();
                for (auto& wi : w) wi = rng.uniform();
                std::sort(x.begin(), x.end(), std::greater<>());
                DeltaYOptions o = opt;
                o.seed = seed;
                json rep = io::to_json(delta_y_range(x, w, v, o));
                rep["x"] = x;
                rep["w"] = w;
                write_json(ctx.run_dir(group, seed) / "report.json", rep);
            }
        }
    ctx.say("deltay: " + std::to_string(groups.size()) + " reports per seed");
    return aggregate_from_files(ctx, groups,
                                {"analytic_min", "analytic_max", "empirical_min", "empirical_max", "empirical_min_abs"},
                                "report.json");
}

// ---- tinygan ----------------------------------------------------------------

GaussianStats feature_stats(const FeatureEncoder& enc, const Tensor& images) {
    return gaussian_stats(enc.encode(images));
}

std::vector<AggregateRow> cmd_tinygan(Context& ctx) {
    const TrainConfig base = base_train_config(ctx.cfg, "tiny32");
    const auto losses = ctx.cfg.get_list("experiment.losses", {"hinge"});
    const auto variants = variants_from(ctx.cfg, "experiment.variants", {"conv", "pconv@0.1"}, base.perturb.ratio);
    const std::size_t fid_samples = ctx.cfg.get_size("experiment.fid_samples", 1000);
    const std::size_t fid_every = ctx.cfg.get_size("experiment.fid_every", 0);
    const auto enc_seed = static_cast<std::uint64_t>(ctx.cfg.get_int("experiment.encoder_seed", 0));
    const bool keep_ckpt = ctx.cfg.get_bool("experiment.checkpoint", true);
    ctx.cfg.require_all_used();
    std::vector<AdvLossKind> loss_kinds;
    for (const auto& l : losses) loss_kinds.push_back(parse_loss_kind(l));

    const FeatureEncoder encoder(enc_seed);
    const Dataset data = make_dataset(base.dataset);
    const GaussianStats reference = feature_stats(encoder, data.train);

    std::vector<std::function<void()>> jobs;
    std::vector<std::string> groups;
    for (AdvLossKind loss : loss_kinds)
        for (const auto& v : variants) {
            const std::string group = loss_name(loss) + "-" + variant_label(v);
            groups.push_back(group);
            for (std::uint64_t seed : ctx.seeds) {
                jobs.emplace_back([&, loss, v, group, seed] {
                    TrainConfig tc = base;
                    tc.loss = loss;
                    tc.perturb = v;
                    tc.seed = seed;
                    const fs::path dir = ctx.run_dir(group, seed);
                    RunState st = init_run(tc);
                    std::ostringstream fid_csv;
                    fid_csv.precision(17);
                    fid_csv << "g_iter,fid\n";
                    auto desk_fid = [&](RunState& s) {
                        const double f = fid(reference, feature_stats(encoder, sample_generator(s, fid_samples, seed)));
                        fid_csv << s.g_iter << ',' << f << '\n';
                        return f;
                    };
                    train(st, [&](RunState& s) {
                        if (fid_every && s.g_iter % fid_every == 0 && s.g_iter != s.config.total_g_iters) desk_fid(s);
                    });
                    const double final_fid = desk_fid(st);
                    json rep{{"schema", io::kSchemaVersion}, {"loss", loss_name(loss)}, {"variant", io::to_json(v)},
                             {"seed", seed},                 {"g_iters", st.g_iter},  {"fid", final_fid},
                             {"fid_samples", fid_samples}};
                    if (st.data.heldout.rank() && st.data.heldout.extent(0) > 0) {
                        rep["memorization"] = io::to_json(
                            memorization_gap(st.models.discriminator, st.data.train, st.data.heldout));
                    }
                    io::write_text(dir / "history.csv", history_csv(st.history));
                    io::write_text(dir / "fid.csv", fid_csv.str());
                    if (keep_ckpt) checkpoint_save(st, dir / "final.ckpt");
                    write_json(dir / "report.json", rep);
                    ctx.say("tinygan " + group + " seed " + std::to_string(seed) + ": desk-FID " +
                            std::to_string(final_fid));
                });
            }
        }
    run_jobs(jobs);
    return aggregate_from_files(
        ctx, groups, {"fid", "memorization.gap", "memorization.train_real_acc", "memorization.test_real_acc"},
        "report.json");
}

// ---- fid --------------------------------------------------------------------

std::vector<AggregateRow> cmd_fid(Context& ctx) {
    const std::string a = ctx.cfg.get_string("fid.a", "");
    const std::string b = ctx.cfg.get_string("fid.b", "");
    const std::size_t samples = ctx.cfg.get_size("fid.samples", 1000);
    const std::size_t resolution = ctx.cfg.get_size("fid.image_resolution", 0);
    const auto enc_seed = static_cast<std::uint64_t>(ctx.cfg.get_int("experiment.encoder_seed", 0));
    ctx.cfg.require_all_used();
    if (a.empty() || b.empty()) throw ConfigError("fid needs fid.a and fid.b (CSV sample files or checkpoints)");
    const FeatureEncoder encoder(enc_seed);

    for (std::uint64_t seed : ctx.seeds) {
        std::string space = "raw";
        auto load = [&](const std::string& path) {
            Tensor x;
            if (fs::path(path).extension() == ".ckpt") {
                RunState st = resume_run(path);
                x = sample_generator(st, samples, seed);
            } else {
                x = io::read_csv_matrix(path);
                if (resolution) {
                    const std::size_t per = 3 * resolution * resolution;
                    if (x.rank() != 2 || x.extent(1) != per) {
                        throw ContractViolation("'" + path + "' rows are not 3 x " + std::to_string(resolution) +
                                                "^2 images");
                    }
                    x = x.reshaped({x.extent(0), 3, resolution, resolution});
                }
            }
            if (x.rank() == 4) {
                space = "desk-encoder";
                x = encoder.encode(x);
            }
            return x;
        };
        const Tensor xa = load(a), xb = load(b);
        if (xa.size() / std::max<std::size_t>(xa.extent(0), 1) != xb.size() / std::max<std::size_t>(xb.extent(0), 1)) {
            throw ContractViolation("fid: sample sets have different dimensions");
        }
        const double value = fid(gaussian_stats(xa), gaussian_stats(xb));
        write_json(ctx.run_dir("default", seed) / "report.json",
                   json{{"schema", io::kSchemaVersion}, {"fid", value}, {"space", space}, {"n_a", xa.extent(0)},
                        {"n_b", xb.extent(0)}, {"dim", xa.size() / xa.extent(0)}});
        ctx.say("fid: " + std::to_string(value));
    }
    return aggregate_from_files(ctx, {"default"}, {"fid"}, "report.json");
}

// ---- memorization -----------------------------------------------------------

std::vector<AggregateRow> cmd_memorization(Context& ctx) {
    const auto entries = ctx.cfg.get_list("memorization.checkpoints", {});
    ctx.cfg.require_all_used();
    if (entries.empty()) throw ConfigError("memorization.checkpoints lists no 'name=path' entries");
    std::vector<std::string> groups;
    for (const auto& e : entries) {
        const auto eq = e.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("memorization entry '" + e + "' is not name=path");
        const std::string group = e.substr(0, eq);
        const fs::path path = e.substr(eq + 1);
        groups.push_back(group);
        RunState st = resume_run(path);
        if (st.data.heldout.rank() == 0 || st.data.heldout.extent(0) == 0) {
            throw ConfigError("checkpoint '" + path.string() + "' was trained without a held-out split");
        }
        const json rep = io::to_json(memorization_gap(st.models.discriminator, st.data.train, st.data.heldout));
        for (std::uint64_t seed : ctx.seeds) write_json(ctx.run_dir(group, seed) / "report.json", rep);
        ctx.say("memorization " + group + ": gap " + std::to_string(rep["gap"].get<double>()));
    }
    return aggregate_from_files(ctx, groups, {"gap", "train_real_acc", "test_real_acc"}, "report.json");
}

std::string timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

}  // namespace

ResultBundle run_experiment(const ExperimentSpec& spec, std::ostream* log) {
    const auto& names = experiment_commands();
    if (std::find(names.begin(), names.end(), spec.command) == names.end()) {
        throw ConfigError("unknown command '" + spec.command + "'");
    }
    Context ctx{spec, spec.config.empty() ? ConfigMap{} : ConfigMap::load(spec.config), spec.seeds, {}, log, {}};
    for (const auto& o : spec.overrides) ctx.cfg.set_override(o);
    if (ctx.seeds.empty()) ctx.seeds = {0};
    const std::string config_text = ctx.cfg.to_text();

    const fs::path final_dir = spec.out / spec.command;
    if (fs::exists(final_dir) && !spec.force) {
        throw ConfigError("'" + final_dir.string() + "' already exists; pass --force to replace it");
    }
    ctx.stage = spec.out / ("." + spec.command + ".staging");
    fs::remove_all(ctx.stage);
    fs::create_directories(ctx.stage);

    std::vector<AggregateRow> rows;
    try {
        if (spec.command == "gmm8") rows = cmd_gmm8(ctx);
        else if (spec.command == "probmap") rows = cmd_probmap(ctx);
        else if (spec.command == "deltay") rows = cmd_deltay(ctx);
        else if (spec.command == "tinygan") rows = cmd_tinygan(ctx);
        else if (spec.command == "fid") rows = cmd_fid(ctx);
        else rows = cmd_memorization(ctx);

        std::ostringstream hash;
        hash << std::hex << std::setw(16) << std::setfill('0') << hash_label(spec.command + "\n" + config_text);
        write_json(ctx.stage / "manifest.json",
                   json{{"schema", io::kSchemaVersion},
                        {"command", spec.command},
                        {"config_hash", hash.str()},
                        {"config", config_text},
                        {"seeds", ctx.seeds},
                        {"code_version", PCONV_VERSION},
                        {"created", timestamp()}});
    } catch (...) {
        std::error_code ec;
        fs::remove_all(ctx.stage, ec);
        throw;
    }
    if (fs::exists(final_dir)) fs::remove_all(final_dir);
    fs::rename(ctx.stage, final_dir);
    return ResultBundle{final_dir, std::move(rows)};
}

}  // namespace pconv
