#include <numeric>

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dasim/egt.hpp"
#include "dasim/harness/config.hpp"
#include "dasim/harness/experiment.hpp"
#include "dasim/metrics.hpp"
#include "dasim/optimizer.hpp"
#include "dasim/strategies.hpp"

namespace py = pybind11;
using namespace dasim;

namespace {

std::vector<StrategySpec> specs_from(const std::vector<py::object>& items) {
    std::vector<StrategySpec> out;
    for (const auto& o : items) {
        if (py::isinstance<StrategySpec>(o)) {
            out.push_back(o.cast<StrategySpec>());
        } else if (py::isinstance<py::str>(o)) {
            out.push_back(StrategySpec{o.cast<std::string>(), {}});
        } else {
            const auto t = o.cast<py::tuple>();
            out.push_back(StrategySpec{t[0].cast<std::string>(), t[1].cast<std::map<std::string, double>>()});
        }
    }
    return out;
}

py::dict equilibrium_dict(const EquilibriumReport& r) {
    py::dict d;
    d["q0"] = r.q0;
    d["p0"] = r.p0 ? py::cast(*r.p0) : py::none();
    d["interval"] = r.interval ? py::cast(std::make_pair(r.interval->low, r.interval->high)) : py::none();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Double-auction market simulator";

    py::register_exception<Error>(m, "DasimError", PyExc_ValueError);

    py::class_<Schedule>(m, "Schedule")
        .def(py::init([](std::vector<Money> buyers, std::vector<Money> sellers, int units) {
                 Schedule s;
                 s.buyer_values = std::move(buyers);
                 s.seller_values = std::move(sellers);
                 s.units_per_trader_per_day = units;
                 return s;
             }),
             py::arg("buyers"), py::arg("sellers"), py::arg("units") = 1)
        .def_readwrite("buyer_values", &Schedule::buyer_values)
        .def_readwrite("seller_values", &Schedule::seller_values)
        .def_readwrite("units_per_trader_per_day", &Schedule::units_per_trader_per_day)
        .def("add_shift",
             [](Schedule& s, int day, std::vector<Money> buyers, std::vector<Money> sellers) {
                 s.shifts.push_back(ScheduleShift{day, std::move(buyers), std::move(sellers)});
             })
        .def_property_readonly("num_traders", &Schedule::num_traders);

    py::class_<MarketConfig>(m, "MarketConfig")
        .def(py::init<>())
        .def_readwrite("days", &MarketConfig::days)
        .def_readwrite("rounds_per_day", &MarketConfig::rounds_per_day)
        .def_readwrite("qs", &MarketConfig::qs)
        .def_readwrite("improvement_rule", &MarketConfig::improvement_rule)
        .def_readwrite("min_price", &MarketConfig::min_price)
        .def_readwrite("max_price", &MarketConfig::max_price)
        .def_readwrite("persistent_shouts", &MarketConfig::persistent_shouts)
        .def_readwrite("tick", &MarketConfig::tick)
        .def_readwrite("history_capacity", &MarketConfig::history_capacity)
        .def_property(
            "pricing",
            [](const MarketConfig& c) { return c.pricing.kind == Pricing::Kind::Kda ? "kda" : "uniform"; },
            [](MarketConfig& c, const std::string& v) {
                if (v != "kda" && v != "uniform") throw Error(ErrorCode::InvalidArgument, "pricing is kda or uniform");
                c.pricing.kind = v == "kda" ? Pricing::Kind::Kda : Pricing::Kind::Uniform;
            })
        .def_property(
            "k", [](const MarketConfig& c) { return c.pricing.k; }, [](MarketConfig& c, double k) { c.pricing.k = k; })
        .def_property(
            "clearing",
            [](const MarketConfig& c) { return c.clearing.kind == ClearingMode::Kind::Continuous ? "continuous" : "periodic"; },
            [](MarketConfig& c, const std::string& v) {
                if (v != "continuous" && v != "periodic") {
                    throw Error(ErrorCode::InvalidArgument, "clearing is continuous or periodic");
                }
                c.clearing.kind = v == "continuous" ? ClearingMode::Kind::Continuous : ClearingMode::Kind::Periodic;
            })
        .def_property(
            "rounds_per_clear", [](const MarketConfig& c) { return c.clearing.rounds_per_clear; },
            [](MarketConfig& c, int n) { c.clearing.rounds_per_clear = n; });

    py::class_<StrategySpec>(m, "StrategySpec")
        .def(py::init([](std::string name, std::map<std::string, double> params) {
                 return StrategySpec{std::move(name), std::move(params)};
             }),
             py::arg("name"), py::arg("params") = std::map<std::string, double>{})
        .def_readwrite("name", &StrategySpec::name)
        .def_readwrite("params", &StrategySpec::params);

    py::class_<Transaction>(m, "Transaction")
        .def_property_readonly("day", [](const Transaction& t) { return t.time.day; })
        .def_property_readonly("round", [](const Transaction& t) { return t.time.round; })
        .def_property_readonly("seq", [](const Transaction& t) { return t.time.seq; })
        .def_property_readonly("buyer", [](const Transaction& t) { return t.bid.trader; })
        .def_property_readonly("seller", [](const Transaction& t) { return t.ask.trader; })
        .def_property_readonly("bid", [](const Transaction& t) { return t.bid.price; })
        .def_property_readonly("ask", [](const Transaction& t) { return t.ask.price; })
        .def_readonly("price", &Transaction::price);

    py::class_<GameLog>(m, "GameLog")
        .def_readonly("transactions", &GameLog::transactions)
        .def_readonly("seed", &GameLog::seed)
        .def_readonly("warnings", &GameLog::warnings)
        .def_readonly("strategy_names", &GameLog::strategy_names)
        .def("dump_events", [](const GameLog& l) { return dump_events(l); });

    py::class_<DayMetrics>(m, "DayMetrics")
        .def_readonly("day", &DayMetrics::day)
        .def_readonly("volume", &DayMetrics::volume)
        .def_readonly("ea", &DayMetrics::ea)
        .def_readonly("alpha", &DayMetrics::alpha)
        .def_readonly("dispersion", &DayMetrics::dispersion);

    py::class_<MetricsReport>(m, "MetricsReport")
        .def_readonly("pa", &MetricsReport::pa)
        .def_readonly("pa_signed", &MetricsReport::pa_signed)
        .def_readonly("pe", &MetricsReport::pe)
        .def_readonly("ea", &MetricsReport::ea)
        .def_readonly("ea_signed", &MetricsReport::ea_signed)
        .def_readonly("alpha", &MetricsReport::alpha)
        .def_readonly("alpha_by_day", &MetricsReport::alpha_by_day)
        .def_readonly("profit_dispersion", &MetricsReport::profit_dispersion)
        .def_property_readonly("market_power",
                               [](const MetricsReport& r) {
                                   return std::make_pair(r.market_power.buyers, r.market_power.sellers);
                               })
        .def_readonly("volume_by_day", &MetricsReport::volume_by_day)
        .def_readonly("days", &MetricsReport::days);

    m.def("strategy_names", &strategy_names);
    m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("index"));
    m.def(
        "compute_equilibrium",
        [](const std::vector<Money>& buyers, const std::vector<Money>& sellers) {
            return equilibrium_dict(equilibrium_from_values(buyers, sellers));
        },
        py::arg("buyers"), py::arg("sellers"));
    m.def(
        "run_game",
        [](const MarketConfig& cfg, const Schedule& s, const std::vector<py::object>& traders, std::uint64_t seed) {
            const auto specs = specs_from(traders);
            py::gil_scoped_release release;
            return run_game(cfg, s, specs, seed);
        },
        py::arg("config"), py::arg("schedule"), py::arg("traders"), py::arg("seed") = 0,
        "Plays one game. traders holds one strategy per trader id (buyers first): a name, a (name, params) "
        "tuple or a StrategySpec.");
    m.def("compute_metrics", &compute_metrics, py::arg("log"));
    m.def(
        "allocative_efficiency", [](Money pa, Money pe) { return allocative_efficiency(pa, pe); }, py::arg("pa"),
        py::arg("pe"));
    m.def(
        "convergence_alpha",
        [](const std::vector<Money>& prices, std::optional<Money> p0) { return convergence_alpha(prices, p0); },
        py::arg("prices"), py::arg("p0"));
    m.def(
        "profit_dispersion",
        [](const std::vector<Money>& a, const std::vector<Money>& e) { return profit_dispersion(a, e); },
        py::arg("actual"), py::arg("equilibrium"));

    // -- empirical game analysis
    py::class_<egt::HeuristicGame>(m, "HeuristicGame")
        .def(py::init<std::vector<std::string>, int>(), py::arg("strategies"), py::arg("n_agents"))
        .def_property_readonly("strategies", &egt::HeuristicGame::strategies)
        .def_property_readonly("n_agents", &egt::HeuristicGame::n_agents)
        .def(
            "set",
            [](egt::HeuristicGame& g, const egt::Profile& p, std::vector<double> mean, std::vector<double> stderr_,
               int samples) {
                egt::PayoffEntry e;
                e.mean = std::move(mean);
                e.std_error = stderr_.empty() ? std::vector<double>(e.mean.size(), 0.0) : std::move(stderr_);
                e.samples = samples;
                g.set(p, std::move(e));
            },
            py::arg("profile"), py::arg("mean"), py::arg("stderr") = std::vector<double>{}, py::arg("samples") = 1)
        .def("payoff", &egt::HeuristicGame::payoff, py::arg("profile"), py::arg("strategy"))
        .def("complete", &egt::HeuristicGame::complete)
        .def("profiles", [](const egt::HeuristicGame& g) {
            std::vector<egt::Profile> out;
            for (const auto& [p, e] : g.entries()) out.push_back(p);
            return out;
        });

    py::class_<egt::Attractor>(m, "Attractor")
        .def_readonly("point", &egt::Attractor::point)
        .def_readonly("basin", &egt::Attractor::basin)
        .def_readonly("count", &egt::Attractor::count)
        .def_readonly("verified_ne", &egt::Attractor::verified_ne);

    py::class_<egt::EquilibriumSearch>(m, "EquilibriumSearch")
        .def_readonly("attractors", &egt::EquilibriumSearch::attractors)
        .def_readonly("unclassified", &egt::EquilibriumSearch::unclassified)
        .def_readonly("unclassified_fraction", &egt::EquilibriumSearch::unclassified_fraction);

    m.def("enumerate_profiles", &egt::enumerate_profiles, py::arg("num_strategies"), py::arg("n_agents"));
    m.def(
        "build_game",
        [](const std::vector<std::string>& names, const std::vector<py::object>& strategies, int n_agents,
           const MarketConfig& cfg, const Schedule& s, int reps, std::uint64_t seed) {
            const auto specs = specs_from(strategies);
            egt::BuildOptions o;
            o.reps = reps;
            o.seed = seed;
            py::gil_scoped_release release;
            return egt::build_game(names, specs, n_agents, cfg, s, o);
        },
        py::arg("names"), py::arg("strategies"), py::arg("n_agents"), py::arg("config"), py::arg("schedule"),
        py::arg("reps") = 100, py::arg("seed") = 0);
    m.def("mixture_payoff", &egt::mixture_payoff, py::arg("game"), py::arg("strategy"), py::arg("mixture"));
    m.def(
        "replicator_flow",
        [](const egt::HeuristicGame& g, const egt::Mixture& x0) { return egt::replicator_flow(g, x0).terminal; },
        py::arg("game"), py::arg("x0"), "Terminal mixture of the replicator flow from x0.");
    m.def(
        "find_equilibria",
        [](const egt::HeuristicGame& g, int n_starts, std::uint64_t seed) {
            return egt::find_equilibria(g, n_starts, seed);
        },
        py::arg("game"), py::arg("n_starts") = 200, py::arg("seed") = 0);
    m.def("perturb", &egt::perturb, py::arg("game"), py::arg("source"), py::arg("target"), py::arg("delta"));

    // -- search
    py::class_<opt::GaConfig>(m, "GaConfig")
        .def(py::init<>())
        .def_readwrite("population", &opt::GaConfig::population)
        .def_readwrite("generations", &opt::GaConfig::generations)
        .def_readwrite("tournament_size", &opt::GaConfig::tournament_size)
        .def_readwrite("crossover_prob", &opt::GaConfig::crossover_prob)
        .def_readwrite("mutation_sigma_frac", &opt::GaConfig::mutation_sigma_frac)
        .def_readwrite("elitism", &opt::GaConfig::elitism);

    m.def(
        "ga_run",
        [](opt::GaConfig cfg, const std::function<double(std::vector<double>)>& fitness,
           const std::vector<std::pair<double, double>>& bounds, std::uint64_t seed) {
            cfg.jobs = 1;  // the callback needs the interpreter lock
            std::vector<opt::GeneBounds> b;
            for (const auto& [lo, hi] : bounds) b.push_back({lo, hi});
            const auto r = opt::ga_run(
                cfg, [&](const opt::Genotype& g, std::uint64_t) { return fitness(g.genes); }, b, seed);
            py::dict d;
            d["best"] = r.best.genes;
            d["best_fitness"] = r.best_fitness;
            std::vector<double> best_ever;
            for (const auto& s : r.trace) best_ever.push_back(s.best_ever);
            d["best_ever"] = best_ever;
            return d;
        },
        py::arg("config"), py::arg("fitness"), py::arg("bounds"), py::arg("seed") = 0,
        "Maximizes fitness(genes) over the box given as (lo, hi) pairs.");

    py::class_<opt::BanditState>(m, "Bandit")
        .def(py::init(&opt::bandit_init), py::arg("arms"), py::arg("epsilon"))
        .def_readonly("counts", &opt::BanditState::counts)
        .def_readonly("means", &opt::BanditState::means)
        .def(
            "step",
            [](opt::BanditState& s, std::optional<double> reward, std::uint64_t seed) {
                Rng rng(derive_seed(seed, static_cast<std::uint64_t>(std::accumulate(s.counts.begin(), s.counts.end(), 0))));
                return opt::epsilon_greedy_step(s, reward, rng);
            },
            py::arg("reward"), py::arg("seed") = 0,
            "Records the reward of the previous arm and returns the next arm index.");

    // -- experiments
    py::class_<harness::ExperimentConfig>(m, "ExperimentConfig")
        .def_readwrite("reps", &harness::ExperimentConfig::reps)
        .def_readwrite("master_seed", &harness::ExperimentConfig::master_seed)
        .def_readwrite("market", &harness::ExperimentConfig::market)
        .def_readwrite("schedule", &harness::ExperimentConfig::schedule);

    m.def("parse_config", &harness::parse_config, py::arg("text"));
    m.def("load_config", &harness::load_config, py::arg("path"));
    m.def("emit_config", &harness::emit_config, py::arg("config"));
    m.def(
        "run_experiment",
        [](const harness::ExperimentConfig& cfg, const std::filesystem::path& out, int jobs) {
            harness::ExperimentResult r;
            {
                py::gil_scoped_release release;
                r = harness::run_experiment(cfg, harness::RunOptions{out, jobs});
            }
            py::dict summary;
            for (const auto& row : r.summary) summary[py::str(row.metric)] = py::make_tuple(row.mean, row.std_error, row.n);
            std::vector<std::string> files;
            for (const auto& f : r.files) files.push_back(f.string());
            return py::make_tuple(summary, files);
        },
        py::arg("config"), py::arg("out_dir"), py::arg("jobs") = 1,
        "Runs every replication, writes the CSV files and returns (summary, files).");
}
