// pconv: run the experiments (gmm8, probmap, deltay, tinygan, fid, memorization).

#include <iostream>

#include "CLI11.hpp"
#include "pconv/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Perturbed-convolution GAN experiments"};
    app.require_subcommand(1);

    pconv::ExperimentSpec spec;
    std::string out = "results";
    for (const auto& name : pconv::experiment_commands()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", spec.config, "key = value config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", spec.seeds, "seed (repeatable)");
        sub->add_option("--out", out, "output root")->capture_default_str();
        sub->add_option("--set", spec.overrides, "override key=value (repeatable)");
        sub->add_flag("--force", spec.force, "replace existing results");
        sub->callback([&spec, name] { spec.command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    spec.out = out;

    try {
        const auto bundle = pconv::run_experiment(spec, &std::cerr);
        for (const auto& row : bundle.aggregate) {
            std::cout << row.group << ' ' << row.metric << ' ' << row.mean << " +- " << row.stddev << " (n=" << row.n
                      << ")\n";
        }
        std::cout << "results in " << bundle.dir.string() << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return pconv::exit_code_for(e);
    }
}
