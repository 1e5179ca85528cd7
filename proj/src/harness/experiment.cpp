#include "dasim/harness/experiment.hpp"

#include <algorithm>
#include <cstdio>

#include "dasim/harness/format.hpp"
#include "dasim/harness/svg.hpp"
#include "dasim/parallel.hpp"

namespace dasim::harness {

namespace {

struct RepArtifacts {
    RepOutcome outcome;
    std::string transactions;
    std::string metrics;
    std::string events;
    std::string svg;
};

std::string csv_safe(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

}  // namespace

std::uint64_t replication_seed(std::uint64_t master_seed, int i) {
    return derive_seed(master_seed, static_cast<std::uint64_t>(i));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
    const auto specs = cfg.trader_specs();
    const auto p0 = compute_equilibrium(cfg.schedule, 1).p0;

    std::vector<RepArtifacts> reps(static_cast<std::size_t>(cfg.reps));
    parallel_for(reps.size(), opts.jobs, [&](std::size_t i) {
        auto& r = reps[i];
        r.outcome.run = static_cast<int>(i);
        r.outcome.seed = replication_seed(cfg.master_seed, static_cast<int>(i));
        try {
            const auto log = run_game(cfg.market, cfg.schedule, specs, r.outcome.seed);
            const auto m = compute_metrics(log);
            if (cfg.outputs.transactions) r.transactions = transactions_rows(r.outcome.run, log);
            if (cfg.outputs.metrics) r.metrics = metrics_rows(r.outcome.run, m);
            if (cfg.outputs.events) r.events = events_rows(r.outcome.run, log);
            if (cfg.outputs.svg) r.svg = emit_svg_price_series(log, p0);
            r.outcome.metrics = m;
        } catch (const Error& e) {
            r.outcome.error_code = std::string(to_string(e.code()));
            r.outcome.error = e.what();
            r.transactions.clear();
            r.metrics.clear();
            r.events.clear();
            r.svg.clear();
        } catch (const std::exception& e) {
            r.outcome.error_code = "RUNTIME";
            r.outcome.error = e.what();
            r.transactions.clear();
            r.metrics.clear();
            r.events.clear();
            r.svg.clear();
        }
    });

    ExperimentResult result;
    std::string tx = std::string(kTransactionsHeader) + "\n";
    std::string metrics = std::string(kMetricsHeader) + "\n";
    std::string events = std::string(kEventsHeader) + "\n";
    std::string errors = "run,seed,code,message\n";
    std::vector<MetricsReport> reports;
    for (auto& r : reps) {
        tx += r.transactions;
        metrics += r.metrics;
        events += r.events;
        if (r.outcome.metrics) {
            reports.push_back(*r.outcome.metrics);
        } else {
            errors += std::to_string(r.outcome.run) + "," + std::to_string(r.outcome.seed) + "," +
                      r.outcome.error_code + "," + csv_safe(r.outcome.error) + "\n";
        }
        result.reps.push_back(r.outcome);
    }
    result.summary = summarize(reports);

    auto put = [&](const std::filesystem::path& name, const std::string& text) {
        const auto path = opts.out_dir / name;
        write_file(path, text);
        result.files.push_back(path);
    };
    if (cfg.outputs.transactions) put("transactions.csv", tx);
    if (cfg.outputs.metrics) put("metrics.csv", metrics);
    put("summary.csv", summary_csv(result.summary));
    put("errors.csv", errors);
    if (cfg.outputs.events) put("events.csv", events);
    if (cfg.outputs.svg) {
        for (const auto& r : reps) {
            if (r.outcome.metrics) put(std::filesystem::path("svg") / ("run_" + std::to_string(r.outcome.run) + ".svg"), r.svg);
        }
    }
    return result;
}

EgtResult run_egt(const ExperimentConfig& cfg, const RunOptions& opts) {
    if (!cfg.egt) throw ConfigError(ErrorCode::ValidationError, std::nullopt, "egt", "section required by egt");
    const auto& e = *cfg.egt;
    std::vector<std::string> names;
    std::vector<StrategySpec> specs;
    for (const auto& s : e.strategies) {
        names.push_back(s.label);
        specs.push_back(s.spec);
    }
    EgtResult result;
    result.game = egt::build_game(names, specs, e.agents, cfg.market, cfg.schedule,
                                  egt::BuildOptions{e.reps, derive_seed(cfg.master_seed, 0), opts.jobs});
    result.search = egt::find_equilibria(result.game, e.starts, derive_seed(cfg.master_seed, 1), e.flow);

    if (cfg.outputs.egt) {
        auto put = [&](const std::string& name, const std::string& text) {
            const auto path = opts.out_dir / name;
            write_file(path, text);
            result.files.push_back(path);
        };
        put("payoffs.csv", payoff_csv(result.game));
        put("equilibria.csv", equilibria_csv(result.game, result.search));
        put("trajectories.csv", trajectories_csv(result.game, result.search));
        if (result.game.num_strategies() == 3) put("simplex.svg", emit_svg_simplex(result.game, result.search));
    }
    return result;
}

EvolveResult run_evolve(const ExperimentConfig& cfg, const RunOptions& opts) {
    if (!cfg.evolve) throw ConfigError(ErrorCode::ValidationError, std::nullopt, "evolve", "section required by evolve");
    const auto& e = *cfg.evolve;
    auto ga = e.ga;
    ga.jobs = opts.jobs;

    EvolveResult result;
    switch (e.target) {
        case EvolveTarget::Zip: {
            opt::Scenario sc{cfg.market, cfg.schedule, {}, e.ga.fitness_reps, e.objective};
            result.ga = opt::ga_run(
                ga, [sc](const opt::Genotype& g, std::uint64_t s) { return opt::zip_fitness(g, sc, s); },
                opt::zip_gene_bounds(), cfg.master_seed, opt::repair_zip);
            break;
        }
        case EvolveTarget::Mechanism: {
            opt::Scenario sc{cfg.market, cfg.schedule, cfg.trader_specs(), e.ga.fitness_reps, e.objective};
            const auto param = e.param;
            result.ga = opt::ga_run(
                ga,
                [sc, param](const opt::Genotype& g, std::uint64_t s) {
                    return opt::mechanism_fitness(param, g.genes[0], sc, s);
                },
                {opt::GeneBounds{0.0, 1.0}}, cfg.master_seed);
            break;
        }
        case EvolveTarget::Basin: {
            opt::BasinScenario sc;
            sc.market = cfg.market;
            sc.schedule = cfg.schedule;
            for (const auto& r : e.rivals) {
                sc.rival_names.push_back(r.label);
                sc.rivals.push_back(r.spec);
            }
            sc.n_agents = e.agents;
            sc.reps = e.reps;
            sc.n_starts = e.starts;
            result.ga = opt::ga_run(
                ga, [sc](const opt::Genotype& g, std::uint64_t s) { return opt::basin_fitness(g, sc, s); },
                opt::zip_gene_bounds(), cfg.master_seed, opt::repair_zip);
            break;
        }
    }
    if (cfg.outputs.evolution) {
        const auto path = opts.out_dir / "evolution.csv";
        write_file(path, evolution_csv(result.ga));
        result.files.push_back(path);
    }
    return result;
}

AdaptResult run_adapt(const ExperimentConfig& cfg, const RunOptions& opts) {
    if (!cfg.adapt) throw ConfigError(ErrorCode::ValidationError, std::nullopt, "adapt", "section required by adapt");
    const auto& a = *cfg.adapt;
    opt::Scenario sc{cfg.market, cfg.schedule, cfg.trader_specs(), 1, opt::Objective::Efficiency};
    AdaptResult result;
    result.pulls = opt::run_adaptive(sc, a.param, a.arms, a.epsilon, a.pulls, cfg.master_seed);
    const auto path = opts.out_dir / "bandit.csv";
    write_file(path, bandit_csv(result.pulls));
    result.files.push_back(path);
    return result;
}

std::string basin_report(const egt::HeuristicGame& g, const egt::EquilibriumSearch& search) {
    std::string out = "strategies:";
    for (const auto& s : g.strategies()) out += " " + s;
    out += "\nprofiles: " + std::to_string(g.entries().size()) + "\n";
    for (std::size_t a = 0; a < search.attractors.size(); ++a) {
        const auto& at = search.attractors[a];
        out += "attractor " + std::to_string(a) + ": (";
        for (std::size_t i = 0; i < at.point.size(); ++i) out += (i ? ", " : "") + format_fixed(at.point[i], 4);
        out += ") basin=" + format_fixed(at.basin, 4) + " ne=" + (at.verified_ne ? "yes" : "no") + "\n";
    }
    out += "unclassified: " + format_fixed(search.unclassified_fraction, 4) + "\n";
    return out;
}

}  // namespace dasim::harness
