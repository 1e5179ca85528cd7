#include "doctest.h"

#include <cmath>

#include "dasim/optimizer.hpp"

using namespace dasim;
using namespace dasim::opt;

namespace {

double sphere(const Genotype& g, std::uint64_t) {
    double s = 0.0;
    for (double x : g.genes) s -= (x - 0.5) * (x - 0.5);
    return s;
}

Scenario small_scenario(const std::string& strategy, int reps) {
    Scenario sc;
    sc.market.days = 2;
    sc.market.rounds_per_day = 20;
    for (int i = 0; i < 5; ++i) {
        sc.schedule.buyer_values.push_back(150 - 20 * i);
        sc.schedule.seller_values.push_back(50 + 20 * i);
    }
    sc.traders.assign(10, StrategySpec{strategy, {}});
    sc.reps = reps;
    return sc;
}

}  // namespace

TEST_CASE("GA finds the optimum of a smooth function") {
    GaConfig cfg;
    cfg.population = 30;
    cfg.generations = 100;
    const std::vector<GeneBounds> bounds(8, GeneBounds{0, 1});
    const auto r = ga_run(cfg, sphere, bounds, 1);
    CHECK(r.trace.size() == 101);
    for (double x : r.best.genes) CHECK(std::abs(x - 0.5) < 0.05);
}

TEST_CASE("GA with elitism never loses its best") {
    GaConfig cfg;
    cfg.population = 12;
    cfg.generations = 30;
    cfg.mutation_sigma_frac = 0.3;
    const std::vector<GeneBounds> bounds{{-5, 5}, {0, 10}, {2, 3}};
    const auto r = ga_run(cfg, sphere, bounds, 2);
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
        CHECK(r.trace[i].best_ever >= r.trace[i - 1].best_ever);
        CHECK(r.trace[i].best_fitness >= r.trace[i - 1].best_fitness);
    }
    CHECK(r.best_fitness == r.trace.back().best_ever);
}

TEST_CASE("GA genes stay inside their bounds") {
    GaConfig cfg;
    cfg.population = 10;
    cfg.generations = 20;
    cfg.mutation_sigma_frac = 2.0;
    cfg.elitism = 0;
    const std::vector<GeneBounds> bounds{{-1, 1}, {5, 6}};
    const FitnessFn check = [&](const Genotype& g, std::uint64_t) {
        CHECK(g.in_bounds());
        return g.genes[0];
    };
    ga_run(cfg, check, bounds, 3);
}

TEST_CASE("GA with zero generations returns the initial population") {
    GaConfig cfg;
    cfg.generations = 0;
    const auto r = ga_run(cfg, sphere, std::vector<GeneBounds>(2, GeneBounds{0, 1}), 4);
    REQUIRE(r.trace.size() == 1);
    CHECK(r.trace[0].generation == 0);
    CHECK(r.best_fitness == r.trace[0].best_fitness);
}

TEST_CASE("GA is reproducible and independent of job count") {
    GaConfig cfg;
    cfg.population = 8;
    cfg.generations = 5;
    const FitnessFn noisy = [](const Genotype& g, std::uint64_t seed) {
        Rng rng(seed);
        return sphere(g, 0) + 0.01 * rng.normal();
    };
    const auto bounds = std::vector<GeneBounds>(2, GeneBounds{0, 1});
    const auto a = ga_run(cfg, noisy, bounds, 5);
    cfg.jobs = 3;
    const auto b = ga_run(cfg, noisy, bounds, 5);
    CHECK(a.best.genes == b.best.genes);
    CHECK(a.best_fitness == b.best_fitness);
}

TEST_CASE("GA config validation") {
    GaConfig cfg;
    cfg.population = 1;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = GaConfig{};
    cfg.elitism = cfg.population + 1;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = GaConfig{};
    cfg.crossover_prob = 1.5;
    CHECK_THROWS_AS(cfg.validate(), Error);
    CHECK_NOTHROW(GaConfig{}.validate());
}

TEST_CASE("ZIP genotype repair and mapping") {
    Genotype g;
    g.bounds = zip_gene_bounds();
    REQUIRE(g.bounds.size() == 8);
    g.genes = {0.9, 0.1, 0.5, 0.2, 0.3, 0.1, 0.5, 0.2};
    repair_zip(g);
    CHECK(g.genes[0] <= g.genes[1]);
    CHECK(g.genes[2] <= g.genes[3]);
    CHECK(g.genes[4] <= g.genes[5]);
    const auto spec = zip_spec_from_genes(g);
    CHECK(spec.name == "zip");
    CHECK_NOTHROW(make_strategy(spec));
    CHECK(zip_default_genotype().in_bounds());
}

TEST_CASE("ZIP fitness is deterministic and rewards learning") {
    Scenario sc;
    sc.market.days = 5;
    sc.market.rounds_per_day = 50;
    for (int i = 0; i < 10; ++i) {
        sc.schedule.buyer_values.push_back(150 - 10 * i);
        sc.schedule.seller_values.push_back(50 + 10 * i);
    }
    sc.reps = 50;
    const auto def = zip_default_genotype();
    CHECK(zip_fitness(def, sc, 7) == zip_fitness(def, sc, 7));

    auto frozen = def;
    frozen.genes[0] = frozen.genes[1] = 0.0;  // beta = 0: margins never move
    CHECK(zip_fitness(frozen, sc, 7) < zip_fitness(def, sc, 7));
}

TEST_CASE("objective values") {
    MetricsReport m;
    m.alpha = 5.0;
    m.ea = 90.0;
    m.profit_dispersion = 3.0;
    CHECK(objective_value(m, Objective::Alpha) == -5.0);
    CHECK(objective_value(m, Objective::Efficiency) == 90.0);
    CHECK(objective_value(m, Objective::Dispersion) == -3.0);
    CHECK(objective_value(MetricsReport{}, Objective::Alpha) == -100.0);
    CHECK(objective_value(MetricsReport{}, Objective::Efficiency) == 0.0);
    CHECK(parse_objective("efficiency") == Objective::Efficiency);
    CHECK_THROWS_AS(parse_objective("speed"), Error);
}

TEST_CASE("mechanism parameters") {
    CHECK(MarketConfig{}.qs == 0.5);
    CHECK(with_mechanism_param(MarketConfig{}, MechanismParam::Qs, 0.8).qs == 0.8);
    CHECK(with_mechanism_param(MarketConfig{}, MechanismParam::K, 0.2).pricing.k == 0.2);
    CHECK_THROWS_AS(with_mechanism_param(MarketConfig{}, MechanismParam::K, 1.2), Error);
    CHECK(parse_mechanism_param("qs") == MechanismParam::Qs);
    CHECK_THROWS_AS(parse_mechanism_param("z"), Error);

    auto kda = small_scenario("zi-c", 5);
    kda.objective = Objective::Efficiency;
    auto uniform = kda;
    uniform.market.pricing.kind = Pricing::Kind::Uniform;
    CHECK(mechanism_fitness(MechanismParam::K, 0.5, kda, 9) == mechanism_fitness(MechanismParam::K, 0.5, uniform, 9));
}

TEST_CASE("basin fitness") {
    BasinScenario sc;
    sc.market.days = 1;
    sc.market.rounds_per_day = 15;
    sc.schedule = Schedule{{150, 130}, {50, 70}};
    sc.n_agents = 4;
    sc.reps = 3;
    sc.n_starts = 30;
    CHECK(basin_fitness(StrategySpec{"zi-c", {}}, sc, 1) == doctest::Approx(1.0));

    sc.rival_names = {"tt", "kaplan"};
    sc.rivals = {{"tt", {}}, {"kaplan", {}}};
    const double f = basin_fitness(StrategySpec{"zi-c", {}}, sc, 2);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0 + 1e-12);
    CHECK(f == basin_fitness(StrategySpec{"zi-c", {}}, sc, 2));
}

TEST_CASE("epsilon-greedy with epsilon 0 is greedy after trying every arm") {
    auto s = bandit_init({0.1, 0.2, 0.3}, 0.0);
    Rng rng(1);
    const std::vector<double> payout{1.0, 3.0, 2.0};
    std::optional<double> reward;
    std::vector<std::size_t> picks;
    for (int i = 0; i < 20; ++i) {
        const auto arm = epsilon_greedy_step(s, reward, rng);
        picks.push_back(arm);
        reward = payout[arm];
    }
    CHECK(picks[0] == 0);
    CHECK(picks[1] == 1);
    CHECK(picks[2] == 2);
    for (std::size_t i = 3; i < picks.size(); ++i) CHECK(picks[i] == 1);
}

TEST_CASE("epsilon-greedy with epsilon 1 is uniform") {
    auto s = bandit_init({0, 1, 2}, 1.0);
    Rng rng(2);
    std::vector<int> hits(3, 0);
    const int n = 100000;
    std::optional<double> reward;
    for (int i = 0; i < n; ++i) {
        ++hits[epsilon_greedy_step(s, reward, rng)];
        reward = 1.0;
    }
    for (int h : hits) CHECK(std::abs(h / static_cast<double>(n) - 1.0 / 3.0) <= 0.02);
}

TEST_CASE("epsilon-greedy concentrates on the better Bernoulli arm") {
    auto s = bandit_init({0, 1}, 0.1);
    Rng rng(3), env(4);
    const std::vector<double> p{0.9, 0.5};
    int best = 0;
    const int n = 10000;
    std::optional<double> reward;
    for (int i = 0; i < n; ++i) {
        const auto arm = epsilon_greedy_step(s, reward, rng);
        best += arm == 0;
        reward = env.bernoulli(p[arm]) ? 1.0 : 0.0;
    }
    CHECK(best / static_cast<double>(n) > 0.8);
    for (std::size_t a = 0; a < 2; ++a) {
        const double sigma = std::sqrt(p[a] * (1 - p[a]) / s.counts[a]);
        CHECK(std::abs(s.means[a] - p[a]) <= 3 * sigma);
    }
}

TEST_CASE("adaptive mechanism run") {
    auto sc = small_scenario("zi-c", 1);
    const auto pulls = run_adaptive(sc, MechanismParam::Qs, {0.1, 0.5, 0.9}, 0.1, 15, 5);
    REQUIRE(pulls.size() == 15);
    std::vector<double> sum(3, 0.0);
    std::vector<int> count(3, 0);
    for (std::size_t i = 0; i < pulls.size(); ++i) {
        CHECK(pulls[i].pull == static_cast<int>(i) + 1);
        CHECK(pulls[i].reward >= 0.0);
        sum[pulls[i].arm] += pulls[i].reward;
        ++count[pulls[i].arm];
        CHECK(pulls[i].running_mean == doctest::Approx(sum[pulls[i].arm] / count[pulls[i].arm]));
    }
    const auto again = run_adaptive(sc, MechanismParam::Qs, {0.1, 0.5, 0.9}, 0.1, 15, 5);
    for (std::size_t i = 0; i < pulls.size(); ++i) CHECK(pulls[i].reward == again[i].reward);
}
