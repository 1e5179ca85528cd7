// dasim: command-line front end for the double auction simulator.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dasim/harness/experiment.hpp"
#include "dasim/harness/format.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitRuntime = 4;

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    std::string out = "out";
    int jobs = 1;
    bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config) {
    auto* opt = cmd->add_option("--config", c.config, "Experiment config (YAML)");
    if (needs_config) opt->required();
    cmd->add_option("--seed", c.seed, "Override master_seed");
    cmd->add_option("--reps", c.reps, "Override the replication count")->check(CLI::PositiveNumber);
    cmd->add_option("--out", c.out, "Output directory");
    cmd->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_flag("--quiet", c.quiet, "Suppress the stdout report");
}

dasim::harness::ExperimentConfig load(const Common& c) {
    auto cfg = dasim::harness::load_config(c.config);
    if (c.seed) cfg.master_seed = *c.seed;
    if (c.reps) {
        cfg.reps = *c.reps;
        if (cfg.egt) cfg.egt->reps = *c.reps;
    }
    return cfg;
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw CLI::ValidationError("values", "not a number: '" + item + "'");
        }
        if (used != item.size()) throw CLI::ValidationError("values", "not a number: '" + item + "'");
        out.push_back(v);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

void print_summary(const dasim::harness::ExperimentResult& r) {
    using dasim::harness::format_fixed;
    int failed = 0;
    for (const auto& rep : r.reps) failed += rep.metrics ? 0 : 1;
    std::printf("reps: %zu (%d failed)\n", r.reps.size(), failed);
    for (const auto& s : r.summary) {
        if (s.n == 0) {
            std::printf("%-11s n/a\n", s.metric.c_str());
        } else {
            std::printf("%-11s %s +/- %s (n=%d)\n", s.metric.c_str(), format_fixed(s.mean, 4).c_str(),
                        format_fixed(s.std_error, 4).c_str(), s.n);
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Double auction simulator"};
    app.require_subcommand(1);

    Common run_opts, egt_opts, evolve_opts, adapt_opts, eq_opts;
    auto* run = app.add_subcommand("run", "Replicated market experiment");
    add_common(run, run_opts, true);
    auto* egt = app.add_subcommand("egt", "Heuristic payoff matrix and replicator analysis");
    add_common(egt, egt_opts, true);
    auto* evolve = app.add_subcommand("evolve", "Genetic search over strategy or mechanism parameters");
    add_common(evolve, evolve_opts, true);
    auto* adapt = app.add_subcommand("adapt", "Epsilon-greedy mechanism adaptation");
    add_common(adapt, adapt_opts, true);

    auto* equilibrium = app.add_subcommand("equilibrium", "Competitive equilibrium of a schedule");
    std::string buyers, sellers;
    int eq_day = 1;
    equilibrium->add_option("--config", eq_opts.config, "Experiment config (YAML)");
    equilibrium->add_option("--buyers", buyers, "Comma-separated buyer values");
    equilibrium->add_option("--sellers", sellers, "Comma-separated seller values");
    equilibrium->add_option("--day", eq_day, "Trading day (for shifted schedules)")->check(CLI::PositiveNumber);

    app.add_subcommand("version", "Print the version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    if (app.got_subcommand("version")) {
        std::printf("dasim 0.1.0\n");
        return 0;
    }

    dasim::Schedule eq_schedule;
    if (app.got_subcommand(equilibrium)) {
        const bool inline_values = !buyers.empty() || !sellers.empty();
        if (inline_values == !eq_opts.config.empty() || (inline_values && (buyers.empty() || sellers.empty()))) {
            std::fprintf(stderr, "equilibrium: give either --config or both --buyers and --sellers\n");
            return kExitUsage;
        }
        if (inline_values) {
            try {
                eq_schedule.buyer_values = parse_values(buyers);
                eq_schedule.seller_values = parse_values(sellers);
            } catch (const CLI::Error& e) {
                std::fprintf(stderr, "equilibrium: %s\n", e.what());
                return kExitUsage;
            }
        }
    }

    const Common* common = nullptr;
    for (const auto& [cmd, opts] : {std::pair{run, &run_opts}, std::pair{egt, &egt_opts}, std::pair{evolve, &evolve_opts},
                              std::pair{adapt, &adapt_opts}, std::pair{equilibrium, &eq_opts}}) {
        if (app.got_subcommand(cmd)) common = opts;
    }

    dasim::harness::ExperimentConfig cfg;
    if (!common->config.empty()) {
        try {
            cfg = load(*common);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "%s\n", e.what());
            return kExitConfig;
        }
    }

    try {
        const dasim::harness::RunOptions ro{common->out, common->jobs};
        if (app.got_subcommand(run)) {
            const auto r = dasim::harness::run_experiment(cfg, ro);
            if (!common->quiet) print_summary(r);
        } else if (app.got_subcommand(egt)) {
            const auto r = dasim::harness::run_egt(cfg, ro);
            if (!common->quiet) std::fputs(dasim::harness::basin_report(r.game, r.search).c_str(), stdout);
        } else if (app.got_subcommand(evolve)) {
            const auto r = dasim::harness::run_evolve(cfg, ro);
            if (!common->quiet) {
                std::printf("best fitness: %s\nbest genes:", dasim::harness::format_number(r.ga.best_fitness).c_str());
                for (double g : r.ga.best.genes) std::printf(" %s", dasim::harness::format_number(g).c_str());
                std::printf("\n");
            }
        } else if (app.got_subcommand(adapt)) {
            const auto r = dasim::harness::run_adapt(cfg, ro);
            if (!common->quiet && !r.pulls.empty()) {
                std::vector<int> counts(cfg.adapt->arms.size(), 0);
                for (const auto& p : r.pulls) ++counts[p.arm];
                for (std::size_t a = 0; a < counts.size(); ++a) {
                    std::printf("arm %zu (%s): %d pulls\n", a,
                                dasim::harness::format_number(cfg.adapt->arms[a]).c_str(), counts[a]);
                }
            }
        } else if (app.got_subcommand(equilibrium)) {
            const auto& s = eq_opts.config.empty() ? eq_schedule : cfg.schedule;
            s.validate();
            const auto rep = dasim::compute_equilibrium(s, eq_day);
            std::printf("q0=%d", rep.q0);
            if (rep.p0) std::printf(" p0=%s", dasim::harness::format_number(*rep.p0).c_str());
            if (rep.interval) {
                std::printf(" interval=[%s,%s]", dasim::harness::format_number(rep.interval->low).c_str(),
                            dasim::harness::format_number(rep.interval->high).c_str());
            }
            std::printf("\n");
        }
    } catch (const dasim::harness::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitConfig;
    } catch (const dasim::Error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return e.code() == dasim::ErrorCode::ConfigInvalid ? kExitConfig : kExitRuntime;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitRuntime;
    }
    return 0;
}
