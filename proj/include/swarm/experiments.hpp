#pragma once

#include "swarm/agents.hpp"
#include "swarm/config.hpp"
#include "swarm/control_1d.hpp"
#include "swarm/control_nd.hpp"
#include "swarm/steady_state.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace swarm {

enum class ExperimentKind {
    Continuum1D,
    ContinuumND,
    Abm,
    Feasibility,
    RobustnessSweep,
    PoissonCheck,
};

std::string to_string(ExperimentKind k);

/// A robustness sweep perturbation: the plant is perturbed, the controller
/// keeps the nominal model.
enum class PerturbationKind { None, Diffusion, Kernel };

struct SweepSpec {
    std::vector<double> p_values;
    PerturbationKind perturbation = PerturbationKind::None;
    double D_follower_factor = 2.0; ///< diffusion case: plant follower D multiplier
    double L_a_factor = 0.8;        ///< kernel case: plant L_a multiplier
    double L_r_factor = 1.2;        ///< kernel case: plant L_r multiplier
    double leader_mass = 0.04;      ///< diffusion case: steady leader mass held per p
    double r_hat = 0.5;             ///< kernel case: fixed mass ratio
    double rate_scale = 2.0;
};

/// Fully resolved experiment: parsed config plus constructed objects.
struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::Continuum1D;
    std::string config_text;

    // common
    std::vector<int> n;
    ControlParams control;
    MorseParams kernel;
    RunParams run;
    double M_L0 = 0.3;
    double M_F0 = 0.3;

    // targets (grid-resolved lazily by runners)
    TargetKind target_kind = TargetKind::Monomodal;
    std::vector<double> target_mu; // one per mode (1D bimodal) or per axis (nD)
    std::vector<double> target_k;

    // abm
    AbmParams abm;
    int abm_seeds = 50;

    // sweep
    SweepSpec sweep;

    std::uint64_t seed = 1;

    TargetDensity make_target_1d(Grid1D g) const;
    TargetDensityND make_target_nd(GridND g) const;
    MorseParams plant_kernel() const; ///< sweep kernel perturbation applied
};

ExperimentSpec parse_experiment(const config::File& file);

struct ExperimentResultInfo {
    int exit_code = 0; ///< 0 ok, 3 numerical abort (partial results written)
    std::string status;
    std::string summary;                  ///< one-paragraph human summary
    std::vector<std::string> files;       ///< outputs written (relative to out dir)
};

/// Runs the experiment and persists time series, snapshots, and the run
/// manifest (which embeds the exact config text) under out_dir.
ExperimentResultInfo run_experiment(const ExperimentSpec& spec,
                                    const std::filesystem::path& out_dir, int jobs = 1,
                                    std::optional<int> seeds_override = std::nullopt);

/// Named presets reproducing the publication experiments.
std::vector<std::string> preset_names();
std::string preset_config(const std::string& name);
/// Figure ids (4.1, 4.2a, 4.2b, 5, 6.3) map onto preset names.
std::string preset_for_figure(const std::string& figure_id);

// Lower-level runners (used by the CLI `analyze` and by tests).
struct SweepPointResult {
    double p = 0.0;
    double D_KL_ss = 0.0;
    double M_L_ss = 0.0;
    bool aborted = false;
    double abort_t = -1.0;
    std::string status;
};

struct SweepResult {
    std::vector<SweepPointResult> points;
    double p_hat = 0.0; ///< nominal threshold marker (single source of truth)
};

SweepResult run_robustness_sweep(const ExperimentSpec& spec, int jobs = 1);

struct AbmEnsembleResult {
    std::vector<AbmResult> per_seed;
    double mean_D_KL_ss = 0.0;
    double std_D_KL_ss = 0.0;
    double mean_ratio = 0.0;
    double std_ratio = 0.0;
};

AbmEnsembleResult run_abm_ensemble(const ExperimentSpec& spec, int seeds, int jobs = 1);

/// Writes a CSV with an optional '#'-preamble; values rendered with %.17g
/// so reruns are byte-identical.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows, const std::string& preamble = "");

} // namespace swarm
