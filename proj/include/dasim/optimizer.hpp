#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dasim/egt.hpp"
#include "dasim/metrics.hpp"
#include "dasim/strategies.hpp"

namespace dasim::opt {

struct GeneBounds {
    double lo = 0.0;
    double hi = 1.0;

    friend bool operator==(const GeneBounds&, const GeneBounds&) = default;
};

struct Genotype {
    std::vector<double> genes;
    std::vector<GeneBounds> bounds;

    void clamp();
    bool in_bounds() const;
};

struct GaConfig {
    int population = 30;
    int generations = 100;
    int tournament_size = 2;
    double crossover_prob = 0.7;
    double mutation_sigma_frac = 0.05;
    int elitism = 1;
    int fitness_reps = 10;
    int jobs = 1;

    /// Throws Error(ConfigInvalid).
    void validate() const;

    friend bool operator==(const GaConfig&, const GaConfig&) = default;
};

struct GenerationStats {
    int generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    double best_ever = 0.0;
    std::vector<double> best_genes;
};

struct GaResult {
    Genotype best;
    double best_fitness = 0.0;
    std::vector<GenerationStats> trace;  // generation 0 is the random population
};

/// Fitness to maximize. The seed is derived per evaluation so noisy
/// fitness functions stay reproducible.
using FitnessFn = std::function<double(const Genotype&, std::uint64_t seed)>;

/// Applied after crossover and mutation, e.g. to order lo/hi gene pairs.
using RepairFn = std::function<void(Genotype&)>;

/// Generational GA: tournament selection, uniform crossover, Gaussian
/// mutation of each gene with probability 1/n clamped to bounds, elites
/// carried with their fitness.
GaResult ga_run(const GaConfig& cfg, const FitnessFn& fitness, const std::vector<GeneBounds>& bounds,
                std::uint64_t seed, const RepairFn& repair = {});

enum class Objective { Alpha, Efficiency, Dispersion };

Objective parse_objective(const std::string& name);
std::string to_string(Objective o);

/// Larger is better: -alpha, +Ea or -dispersion. Missing values score as
/// alpha 100, Ea 0.
double objective_value(const MetricsReport& m, Objective o);

struct Scenario {
    MarketConfig market;
    Schedule schedule;
    std::vector<StrategySpec> traders;  // one per trader id; ignored by zip_fitness
    int reps = 10;
    Objective objective = Objective::Alpha;
};

/// Mean objective over scenario.reps games with seeds derive_seed(seed, r).
double scenario_fitness(const Scenario& sc, std::uint64_t seed);

// ZIP genotype: beta_lo, beta_hi, gamma_lo, gamma_hi, margin_lo, margin_hi, ca, cr.
std::vector<GeneBounds> zip_gene_bounds();
void repair_zip(Genotype& g);
StrategySpec zip_spec_from_genes(const Genotype& g);
Genotype zip_default_genotype();

/// Homogeneous ZIP market with the genotype's parameter ranges, scored by
/// scenario.objective (alpha by default).
double zip_fitness(const Genotype& g, const Scenario& sc, std::uint64_t seed);

enum class MechanismParam { Qs, K };

MechanismParam parse_mechanism_param(const std::string& name);
std::string to_string(MechanismParam p);
MarketConfig with_mechanism_param(MarketConfig cfg, MechanismParam p, double value);

/// Scenario fitness with one mechanism parameter set to `value`.
double mechanism_fitness(MechanismParam p, double value, const Scenario& sc, std::uint64_t seed);

struct BasinScenario {
    MarketConfig market;
    Schedule schedule;
    std::vector<std::string> rival_names;
    std::vector<StrategySpec> rivals;
    int n_agents = 6;
    int reps = 20;
    int n_starts = 200;
    egt::FlowOptions flow;
    int jobs = 1;
};

/// Total basin share of attractors whose support contains the candidate,
/// in the heuristic game over {candidate} and the rivals.
double basin_fitness(const StrategySpec& candidate, const BasinScenario& sc, std::uint64_t seed);
double basin_fitness(const Genotype& g, const BasinScenario& sc, std::uint64_t seed);

struct BanditState {
    std::vector<double> arms;
    std::vector<int> counts;
    std::vector<double> means;
    double epsilon = 0.1;
    std::optional<std::size_t> last_arm;
};

BanditState bandit_init(std::vector<double> arms, double epsilon);

/// Records the reward of the last pulled arm (if any) and picks the next:
/// uniform with probability epsilon, else the best mean with untried arms
/// first and ties to the lowest index.
std::size_t epsilon_greedy_step(BanditState& state, std::optional<double> reward_of_last_arm, Rng& rng);

struct BanditPull {
    int pull = 0;
    std::size_t arm = 0;
    double value = 0.0;
    double reward = 0.0;
    /// Mean reward of this arm including this pull.
    double running_mean = 0.0;
};

/// Online mechanism adaptation: one game per pull, reward = Ea.
std::vector<BanditPull> run_adaptive(const Scenario& sc, MechanismParam p, const std::vector<double>& arms,
                                     double epsilon, int pulls, std::uint64_t seed);

}  // namespace dasim::opt
