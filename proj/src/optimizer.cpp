#include "dasim/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dasim/parallel.hpp"

namespace dasim::opt {

// -------------------------------------------------------------- Genotype

void Genotype::clamp() {
    for (std::size_t i = 0; i < genes.size() && i < bounds.size(); ++i) {
        genes[i] = std::clamp(genes[i], bounds[i].lo, bounds[i].hi);
    }
}

bool Genotype::in_bounds() const {
    if (genes.size() != bounds.size()) return false;
    for (std::size_t i = 0; i < genes.size(); ++i) {
        if (!(genes[i] >= bounds[i].lo && genes[i] <= bounds[i].hi)) return false;
    }
    return true;
}

void GaConfig::validate() const {
    auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigInvalid, m); };
    if (population < 2) fail("population must be >= 2");
    if (generations < 0) fail("generations must be >= 0");
    if (tournament_size < 1) fail("tournament_size must be >= 1");
    if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) fail("crossover_prob must be in [0,1]");
    if (!(mutation_sigma_frac >= 0.0)) fail("mutation_sigma_frac must be >= 0");
    if (elitism < 0 || elitism > population) fail("elitism must be in [0, population]");
    if (fitness_reps < 1) fail("fitness_reps must be >= 1");
}

// -------------------------------------------------------------------- GA

namespace {

struct Scored {
    Genotype g;
    double fitness = 0.0;
};

std::size_t tournament(const std::vector<Scored>& pop, int size, Rng& rng) {
    std::size_t best = rng.index(pop.size());
    for (int k = 1; k < size; ++k) {
        const std::size_t c = rng.index(pop.size());
        if (pop[c].fitness > pop[best].fitness) best = c;
    }
    return best;
}

GenerationStats stats_of(int generation, const std::vector<Scored>& pop, double best_ever) {
    GenerationStats s;
    s.generation = generation;
    std::size_t best = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        sum += pop[i].fitness;
        if (pop[i].fitness > pop[best].fitness) best = i;
    }
    s.best_fitness = pop[best].fitness;
    s.mean_fitness = sum / static_cast<double>(pop.size());
    s.best_ever = std::max(best_ever, s.best_fitness);
    s.best_genes = pop[best].g.genes;
    return s;
}

}  // namespace

GaResult ga_run(const GaConfig& cfg, const FitnessFn& fitness, const std::vector<GeneBounds>& bounds,
                std::uint64_t seed, const RepairFn& repair) {
    cfg.validate();
    if (bounds.empty()) throw Error(ErrorCode::InvalidArgument, "genotype needs at least one gene");
    for (const auto& b : bounds) {
        if (!(b.lo <= b.hi)) throw Error(ErrorCode::InvalidArgument, "gene bounds must satisfy lo <= hi");
    }

    Rng rng(derive_seed(seed, 0));
    const auto pop_size = static_cast<std::size_t>(cfg.population);
    std::uint64_t evaluations = 0;

    auto evaluate = [&](std::vector<Scored>& pop, std::size_t from) {
        const std::uint64_t base = evaluations;
        parallel_for(pop.size() - from, cfg.jobs, [&](std::size_t k) {
            auto& s = pop[from + k];
            s.fitness = fitness(s.g, derive_seed(seed, 1 + base + k));
        });
        evaluations += pop.size() - from;
    };

    std::vector<Scored> pop(pop_size);
    for (auto& s : pop) {
        s.g.bounds = bounds;
        s.g.genes.resize(bounds.size());
        for (std::size_t i = 0; i < bounds.size(); ++i) s.g.genes[i] = rng.uniform(bounds[i].lo, bounds[i].hi);
        if (repair) repair(s.g);
        s.g.clamp();
    }
    evaluate(pop, 0);

    GaResult result;
    result.trace.push_back(stats_of(0, pop, -std::numeric_limits<double>::infinity()));
    auto best_of = [](const std::vector<Scored>& p) {
        return std::max_element(p.begin(), p.end(),
                                [](const Scored& a, const Scored& b) { return a.fitness < b.fitness; });
    };
    Scored best = *best_of(pop);

    for (int gen = 1; gen <= cfg.generations; ++gen) {
        std::vector<std::size_t> order(pop.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return pop[a].fitness > pop[b].fitness; });

        std::vector<Scored> next;
        next.reserve(pop_size);
        for (int e = 0; e < cfg.elitism; ++e) next.push_back(pop[order[static_cast<std::size_t>(e)]]);
        const std::size_t first_child = next.size();

        while (next.size() < pop_size) {
            const auto& a = pop[tournament(pop, cfg.tournament_size, rng)].g;
            const auto& b = pop[tournament(pop, cfg.tournament_size, rng)].g;
            Scored child;
            child.g = a;
            if (rng.bernoulli(cfg.crossover_prob)) {
                for (std::size_t i = 0; i < child.g.genes.size(); ++i) {
                    if (rng.bernoulli(0.5)) child.g.genes[i] = b.genes[i];
                }
            }
            const double per_gene = 1.0 / static_cast<double>(child.g.genes.size());
            for (std::size_t i = 0; i < child.g.genes.size(); ++i) {
                if (!rng.bernoulli(per_gene)) continue;
                const double sigma = cfg.mutation_sigma_frac * (bounds[i].hi - bounds[i].lo);
                child.g.genes[i] += sigma * rng.normal();
            }
            child.g.clamp();
            if (repair) repair(child.g);
            next.push_back(std::move(child));
        }
        evaluate(next, first_child);
        pop = std::move(next);

        const auto gen_best = best_of(pop);
        if (gen_best->fitness > best.fitness) best = *gen_best;
        result.trace.push_back(stats_of(gen, pop, result.trace.back().best_ever));
    }

    result.best = best.g;
    result.best_fitness = best.fitness;
    return result;
}

// ------------------------------------------------------------ objectives

Objective parse_objective(const std::string& name) {
    if (name == "alpha") return Objective::Alpha;
    if (name == "efficiency" || name == "ea") return Objective::Efficiency;
    if (name == "dispersion") return Objective::Dispersion;
    throw Error(ErrorCode::InvalidArgument, "unknown objective '" + name + "'");
}

std::string to_string(Objective o) {
    switch (o) {
        case Objective::Alpha: return "alpha";
        case Objective::Efficiency: return "efficiency";
        case Objective::Dispersion: return "dispersion";
    }
    return "alpha";
}

double objective_value(const MetricsReport& m, Objective o) {
    switch (o) {
        case Objective::Alpha: return -m.alpha.value_or(100.0);
        case Objective::Efficiency: return m.ea.value_or(0.0);
        case Objective::Dispersion: return -m.profit_dispersion;
    }
    return 0.0;
}

double scenario_fitness(const Scenario& sc, std::uint64_t seed) {
    if (sc.reps < 1) throw Error(ErrorCode::InvalidArgument, "reps must be >= 1");
    double sum = 0.0;
    for (int r = 0; r < sc.reps; ++r) {
        const auto log = run_game(sc.market, sc.schedule, sc.traders, derive_seed(seed, static_cast<std::uint64_t>(r)));
        sum += objective_value(compute_metrics(log), sc.objective);
    }
    return sum / sc.reps;
}

// ------------------------------------------------------------------- ZIP

std::vector<GeneBounds> zip_gene_bounds() {
    return {
        {0.0, 1.0},    // beta_lo
        {0.0, 1.0},    // beta_hi
        {0.0, 0.99},   // gamma_lo
        {0.0, 0.99},   // gamma_hi
        {0.05, 0.35},  // margin_lo
        {0.05, 0.35},  // margin_hi
        {0.0, 1.0},    // ca
        {0.0, 0.5},    // cr
    };
}

void repair_zip(Genotype& g) {
    for (std::size_t i = 0; i + 1 < 6 && i + 1 < g.genes.size(); i += 2) {
        if (g.genes[i] > g.genes[i + 1]) std::swap(g.genes[i], g.genes[i + 1]);
    }
}

StrategySpec zip_spec_from_genes(const Genotype& g) {
    if (g.genes.size() != 8) throw Error(ErrorCode::InvalidArgument, "ZIP genotype needs 8 genes");
    Genotype r = g;
    repair_zip(r);
    const auto& x = r.genes;
    return StrategySpec{"zip",
                        {{"beta_lo", x[0]},
                         {"beta_hi", x[1]},
                         {"gamma_lo", x[2]},
                         {"gamma_hi", x[3]},
                         {"margin_lo", x[4]},
                         {"margin_hi", x[5]},
                         {"ca", x[6]},
                         {"cr", x[7]}}};
}

Genotype zip_default_genotype() {
    const ZipParams p;
    return Genotype{{p.beta_lo, p.beta_hi, p.gamma_lo, p.gamma_hi, p.margin_lo, p.margin_hi, p.ca, p.cr},
                    zip_gene_bounds()};
}

double zip_fitness(const Genotype& g, const Scenario& sc, std::uint64_t seed) {
    Scenario z = sc;
    z.traders.assign(sc.schedule.num_traders(), zip_spec_from_genes(g));
    return scenario_fitness(z, seed);
}

// ------------------------------------------------------------- mechanism

MechanismParam parse_mechanism_param(const std::string& name) {
    if (name == "qs") return MechanismParam::Qs;
    if (name == "k") return MechanismParam::K;
    throw Error(ErrorCode::InvalidArgument, "unknown mechanism parameter '" + name + "'");
}

std::string to_string(MechanismParam p) { return p == MechanismParam::Qs ? "qs" : "k"; }

MarketConfig with_mechanism_param(MarketConfig cfg, MechanismParam p, double value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, to_string(p) + " must be in [0,1]");
    }
    if (p == MechanismParam::Qs) {
        cfg.qs = value;
    } else {
        cfg.pricing.k = value;
    }
    return cfg;
}

double mechanism_fitness(MechanismParam p, double value, const Scenario& sc, std::uint64_t seed) {
    Scenario m = sc;
    m.market = with_mechanism_param(sc.market, p, value);
    return scenario_fitness(m, seed);
}

// ----------------------------------------------------------------- basin

double basin_fitness(const StrategySpec& candidate, const BasinScenario& sc, std::uint64_t seed) {
    std::vector<std::string> names{"candidate"};
    std::vector<StrategySpec> specs{candidate};
    names.insert(names.end(), sc.rival_names.begin(), sc.rival_names.end());
    specs.insert(specs.end(), sc.rivals.begin(), sc.rivals.end());
    if (names.size() != specs.size()) {
        throw Error(ErrorCode::InvalidArgument, "rival names and specs differ in length");
    }
    const auto game = egt::build_game(names, specs, sc.n_agents, sc.market, sc.schedule,
                                      egt::BuildOptions{sc.reps, derive_seed(seed, 0), sc.jobs});
    const auto search = egt::find_equilibria(game, sc.n_starts, derive_seed(seed, 1), sc.flow);
    double share = 0.0;
    for (const auto& a : search.attractors) {
        if (a.point[0] > 1e-4) share += a.basin;
    }
    return share;
}

double basin_fitness(const Genotype& g, const BasinScenario& sc, std::uint64_t seed) {
    return basin_fitness(zip_spec_from_genes(g), sc, seed);
}

// ---------------------------------------------------------------- bandit

BanditState bandit_init(std::vector<double> arms, double epsilon) {
    if (arms.empty()) throw Error(ErrorCode::InvalidArgument, "bandit needs at least one arm");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be in [0,1]");
    BanditState s;
    s.counts.assign(arms.size(), 0);
    s.means.assign(arms.size(), 0.0);
    s.arms = std::move(arms);
    s.epsilon = epsilon;
    return s;
}

std::size_t epsilon_greedy_step(BanditState& s, std::optional<double> reward, Rng& rng) {
    if (s.last_arm && reward) {
        const std::size_t a = *s.last_arm;
        if (!std::isfinite(*reward)) throw Error(ErrorCode::InvalidArgument, "bandit reward must be finite");
        ++s.counts[a];
        s.means[a] += (*reward - s.means[a]) / s.counts[a];
    }
    std::size_t next;
    if (rng.bernoulli(s.epsilon)) {
        next = rng.index(s.arms.size());
    } else {
        next = 0;
        for (std::size_t a = 0; a < s.arms.size(); ++a) {
            if (s.counts[a] == 0) {
                next = a;
                break;
            }
            if (s.means[a] > s.means[next]) next = a;
        }
    }
    s.last_arm = next;
    return next;
}

std::vector<BanditPull> run_adaptive(const Scenario& sc, MechanismParam p, const std::vector<double>& arms,
                                     double epsilon, int pulls, std::uint64_t seed) {
    auto state = bandit_init(arms, epsilon);
    Rng rng(derive_seed(seed, 0));
    std::vector<BanditPull> out;
    std::optional<double> reward;
    for (int k = 0; k < pulls; ++k) {
        const std::size_t arm = epsilon_greedy_step(state, reward, rng);
        const auto cfg = with_mechanism_param(sc.market, p, state.arms[arm]);
        const auto log = run_game(cfg, sc.schedule, sc.traders, derive_seed(seed, 1 + static_cast<std::uint64_t>(k)));
        reward = compute_metrics(log).ea.value_or(0.0);
        const double mean_after = state.means[arm] + (*reward - state.means[arm]) / (state.counts[arm] + 1);
        out.push_back(BanditPull{k + 1, arm, state.arms[arm], *reward, mean_after});
    }
    if (reward) {
        epsilon_greedy_step(state, reward, rng);
    }
    return out;
}

}  // namespace dasim::opt
