// swarmdc: config-driven reproduction of the density-control experiments.
//
// Exit codes: 0 success, 2 config error, 3 numerical abort (partial results
// are still written).

#include "swarm/errors.hpp"
#include "swarm/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct CommonOpts {
    std::string config_path;
    std::string preset;
    std::string out_dir;
    int jobs = 2;
    int seeds = 0; // 0: use config value
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_seeds = false) {
    cmd->add_option("--config", o.config_path, "experiment config file");
    cmd->add_option("--preset", o.preset, "built-in preset name");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--jobs", o.jobs, "parallel workers for sweep points / seeds");
    if (with_seeds) cmd->add_option("--seeds", o.seeds, "override the ensemble seed count");
}

swarm::ExperimentSpec load_spec(const CommonOpts& o) {
    if (!o.config_path.empty() && !o.preset.empty())
        throw swarm::ConfigError("give either --config or --preset, not both");
    if (!o.config_path.empty())
        return swarm::parse_experiment(swarm::config::File::load(o.config_path));
    if (!o.preset.empty())
        return swarm::parse_experiment(swarm::config::File::parse(swarm::preset_config(o.preset)));
    throw swarm::ConfigError("either --config or --preset is required");
}

std::string default_out(const CommonOpts& o, const swarm::ExperimentSpec& spec) {
    if (!o.out_dir.empty()) return o.out_dir;
    if (!o.preset.empty()) return "out/" + o.preset;
    return "out/" + swarm::to_string(spec.kind);
}

int run_spec(const CommonOpts& o, const swarm::ExperimentSpec& spec) {
    const std::string out = default_out(o, spec);
    const auto info = swarm::run_experiment(
        spec, out, o.jobs, o.seeds > 0 ? std::optional<int>(o.seeds) : std::nullopt);
    std::cout << info.summary << "\n";
    std::cout << "outputs in " << out << "/";
    for (const auto& f : info.files) std::cout << " " << f;
    std::cout << "\n";
    return info.exit_code;
}

int expect_kind(const swarm::ExperimentSpec& spec, swarm::ExperimentKind kind,
                const std::string& cmd) {
    if (spec.kind != kind)
        throw swarm::ConfigError("subcommand '" + cmd + "' requires kind = " +
                                 swarm::to_string(kind) + ", config has " +
                                 swarm::to_string(spec.kind));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for swarm density control via leader-follower plasticity"};
    app.require_subcommand(1);

    CommonOpts sim_o, ana_o, sweep_o, abm_o, poisson_o;
    std::string figure_id;
    CommonOpts repro_o;

    auto* sim = app.add_subcommand("simulate", "run a continuum closed-loop simulation");
    add_common(sim, sim_o);
    auto* ana = app.add_subcommand("analyze",
                                   "feasibility threshold, stability margin, steady profiles");
    add_common(ana, ana_o);
    auto* swp = app.add_subcommand("sweep", "robustness sweep over the plasticity fraction");
    add_common(swp, sweep_o);
    auto* abm = app.add_subcommand("abm", "agent-based ensemble");
    add_common(abm, abm_o, true);
    auto* poi = app.add_subcommand("poisson-check", "spectral Poisson recovery residuals");
    add_common(poi, poisson_o);
    auto* rep = app.add_subcommand("reproduce", "run a publication experiment by figure id");
    rep->add_option("figure", figure_id, "figure id: 4.1, 4.2a, 4.2b, 5, or 6.3")->required();
    add_common(rep, repro_o, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            auto spec = load_spec(sim_o);
            if (spec.kind != swarm::ExperimentKind::Continuum1D &&
                spec.kind != swarm::ExperimentKind::ContinuumND)
                throw swarm::ConfigError("simulate requires a continuum_1d or continuum_nd config");
            return run_spec(sim_o, spec);
        }
        if (ana->parsed()) {
            auto spec = load_spec(ana_o);
            // analyze accepts any 1D config; only the model block is used
            spec.kind = swarm::ExperimentKind::Feasibility;
            return run_spec(ana_o, spec);
        }
        if (swp->parsed()) {
            auto spec = load_spec(sweep_o);
            expect_kind(spec, swarm::ExperimentKind::RobustnessSweep, "sweep");
            return run_spec(sweep_o, spec);
        }
        if (abm->parsed()) {
            auto spec = load_spec(abm_o);
            expect_kind(spec, swarm::ExperimentKind::Abm, "abm");
            return run_spec(abm_o, spec);
        }
        if (poi->parsed()) {
            if (poisson_o.config_path.empty() && poisson_o.preset.empty())
                poisson_o.preset = "poisson_check";
            auto spec = load_spec(poisson_o);
            expect_kind(spec, swarm::ExperimentKind::PoissonCheck, "poisson-check");
            return run_spec(poisson_o, spec);
        }
        if (rep->parsed()) {
            repro_o.preset = swarm::preset_for_figure(figure_id);
            auto spec = load_spec(repro_o);
            return run_spec(repro_o, spec);
        }
    } catch (const swarm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
