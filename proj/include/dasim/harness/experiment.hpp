#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dasim/harness/config.hpp"
#include "dasim/harness/csv.hpp"

namespace dasim::harness {

struct RunOptions {
    std::filesystem::path out_dir = "out";
    int jobs = 1;
};

struct RepOutcome {
    int run = 0;
    std::uint64_t seed = 0;
    std::optional<MetricsReport> metrics;  // absent when the rep failed
    std::string error_code;
    std::string error;
};

struct ExperimentResult {
    std::vector<RepOutcome> reps;
    std::vector<SummaryRow> summary;
    std::vector<std::filesystem::path> files;
};

/// Seed of replication i: derive_seed(master_seed, i).
std::uint64_t replication_seed(std::uint64_t master_seed, int i);

/// Plays cfg.reps games and writes transactions.csv, metrics.csv,
/// summary.csv, errors.csv and, when enabled, events.csv and
/// svg/run_<i>.svg. A failing rep is recorded in errors.csv and skipped.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts);

struct EgtResult {
    egt::HeuristicGame game;
    egt::EquilibriumSearch search;
    std::vector<std::filesystem::path> files;
};

/// Builds the payoff matrix for cfg.egt, searches for equilibria and writes
/// payoffs.csv, equilibria.csv, trajectories.csv and simplex.svg (S = 3).
EgtResult run_egt(const ExperimentConfig& cfg, const RunOptions& opts);

struct EvolveResult {
    opt::GaResult ga;
    std::vector<std::filesystem::path> files;
};

/// GA over the target in cfg.evolve; writes evolution.csv.
EvolveResult run_evolve(const ExperimentConfig& cfg, const RunOptions& opts);

struct AdaptResult {
    std::vector<opt::BanditPull> pulls;
    std::vector<std::filesystem::path> files;
};

/// Epsilon-greedy mechanism adaptation; writes bandit.csv.
AdaptResult run_adapt(const ExperimentConfig& cfg, const RunOptions& opts);

/// Human-readable text for the egt command.
std::string basin_report(const egt::HeuristicGame& g, const egt::EquilibriumSearch& search);

}  // namespace dasim::harness
