#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pconv/perturb.hpp"

namespace pconv {

/// One command-line invocation.
struct ExperimentSpec {
    std::string command;                ///< gmm8 | probmap | deltay | tinygan | fid | memorization
    std::filesystem::path config;       ///< optional; empty means defaults only
    std::vector<std::uint64_t> seeds;   ///< empty means {0}
    std::filesystem::path out = "results";
    std::vector<std::string> overrides; ///< key=value, applied after the file
    bool force = false;                 ///< replace an existing <out>/<command>
};

struct AggregateRow {
    std::string group;
    std::string metric;
    double mean = 0.0;
    double stddev = 0.0;  ///< sample standard deviation (0 for one seed)
    std::size_t n = 0;
};

struct ResultBundle {
    std::filesystem::path dir;  ///< <out>/<command>
    std::vector<AggregateRow> aggregate;
};

const std::vector<std::string>& experiment_commands();

/// Runs a command and writes <out>/<command>/<group>/<seed>/... plus
/// aggregate.json, aggregate.csv and manifest.json. The directory is built
/// under a staging name and renamed into place when complete; an existing
/// result directory is only replaced with `force`.
///
/// Seeds run on PCONV_THREADS worker threads (default 1), each owning its
/// own run state.
ResultBundle run_experiment(const ExperimentSpec& spec, std::ostream* log = nullptr);

/// 0 success, 1 configuration error, 2 numeric failure, 3 I/O error.
int exit_code_for(const std::exception& e) noexcept;

/// Mean and sample standard deviation.
std::pair<double, double> mean_stddev(std::span<const double> values);

/// "pconv@0.1" style variant spec; the ratio defaults to `default_ratio`.
PerturbVariant parse_variant(const std::string& text, double default_ratio);
/// Directory name of a variant: "conv", "pconv-0.1", "sdrop_star-0.2"...
std::string variant_label(const PerturbVariant& v);

}  // namespace pconv
