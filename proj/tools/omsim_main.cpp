#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "omsim/experiments.hpp"

namespace {

const std::vector<std::string> kExperiments = {"wigner-movie",       "eta-scan",
                                               "eta-dissipation-scan", "overlap-scan",
                                               "periodicity-check",  "vacuum-analysis"};

struct Overrides {
    std::string config_path;
    std::string out_dir;
    int workers = -1;
    long long seed = -1;
    int nc = 0, nm = 0;
    double tolerance = -1.0;
};

int run(const std::string& experiment, const Overrides& ov) {
    omsim::ExperimentConfig cfg = omsim::load_config(ov.config_path);
    if (cfg.experiment.empty()) cfg.experiment = experiment;
    if (cfg.experiment != experiment)
        throw std::runtime_error("config declares experiment \"" + cfg.experiment +
                                 "\" but subcommand is \"" + experiment + "\"");
    if (!ov.out_dir.empty()) {
        const auto name = std::filesystem::path(cfg.out_prefix).filename();
        cfg.out_prefix = (std::filesystem::path(ov.out_dir) / name).string();
    }
    if (ov.workers >= 0) cfg.workers = ov.workers;
    if (ov.seed >= 0) cfg.seed = std::uint64_t(ov.seed);
    if (ov.nc > 0) cfg.hilbert.n_cavity = ov.nc;
    if (ov.nm > 0) cfg.hilbert.n_mech = ov.nm;
    if (ov.tolerance > 0) cfg.tolerance = ov.tolerance;

    const auto files = omsim::run_experiment(cfg);
    for (const auto& f : files) std::printf("%s\n", f.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cavity-optomechanics transient simulator: named experiments emitting CSV data"};
    app.require_subcommand(1);

    Overrides ov;
    std::string chosen;
    for (const auto& name : kExperiments) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", ov.config_path, "experiment config file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", ov.out_dir, "output directory (overrides the config prefix dir)");
        sub->add_option("--workers", ov.workers, "worker threads (default: all cores)");
        sub->add_option("--seed", ov.seed, "random seed override");
        sub->add_option("--nc", ov.nc, "cavity truncation override");
        sub->add_option("--nm", ov.nm, "mechanical truncation override");
        sub->add_option("--tolerance", ov.tolerance, "integrator relative tolerance override");
        sub->callback([&chosen, name] { chosen = name; });
    }

    CLI11_PARSE(app, argc, argv);
    try {
        return run(chosen, ov);
    } catch (const std::exception& ex) {
        const nlohmann::json err = {{"error", ex.what()}, {"experiment", chosen}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 1;
    }
}
