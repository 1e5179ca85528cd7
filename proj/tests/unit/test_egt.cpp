#include "doctest.h"

#include <cmath>
#include <numeric>

#include "dasim/egt.hpp"
#include "dasim/metrics.hpp"
#include "oracles.hpp"

using namespace dasim;
using namespace dasim::egt;

namespace {

PayoffEntry entry(std::vector<double> mean) {
    PayoffEntry e;
    e.std_error.assign(mean.size(), 0.0);
    e.mean = std::move(mean);
    e.samples = 1;
    return e;
}

// Prisoner's Dilemma with N=2: (C,C)=3, (C,D)=0/4, (D,D)=1.
HeuristicGame prisoners_dilemma() {
    HeuristicGame g({"C", "D"}, 2);
    g.set({2, 0}, entry({3, 0}));
    g.set({1, 1}, entry({0, 4}));
    g.set({0, 2}, entry({0, 1}));
    return g;
}

// Pure coordination: matching C pays 2, matching D pays 1, mismatch 0.
HeuristicGame coordination() {
    HeuristicGame g({"A", "B"}, 2);
    g.set({2, 0}, entry({2, 0}));
    g.set({1, 1}, entry({0, 0}));
    g.set({0, 2}, entry({0, 1}));
    return g;
}

HeuristicGame random_game(int s, int n, Rng& rng) {
    std::vector<std::string> names;
    for (int i = 0; i < s; ++i) names.push_back("s" + std::to_string(i));
    HeuristicGame g(names, n);
    for (const auto& p : enumerate_profiles(s, n)) {
        std::vector<double> m(static_cast<std::size_t>(s), 0.0);
        for (int i = 0; i < s; ++i) {
            if (p[static_cast<std::size_t>(i)] > 0) m[static_cast<std::size_t>(i)] = rng.uniform(0, 10);
        }
        g.set(p, entry(m));
    }
    return g;
}

double linf(const Mixture& a, const Mixture& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

Schedule small_schedule() {
    return Schedule{{150, 130, 110}, {50, 70, 90}};
}

MarketConfig short_market() {
    MarketConfig c;
    c.days = 2;
    c.rounds_per_day = 20;
    return c;
}

}  // namespace

TEST_CASE("profile enumeration") {
    CHECK(enumerate_profiles(3, 6).size() == 28);
    CHECK(enumerate_profiles(1, 6) == std::vector<Profile>{{6}});
    CHECK(enumerate_profiles(2, 2) == std::vector<Profile>{{2, 0}, {1, 1}, {0, 2}});
    for (const auto& p : enumerate_profiles(4, 5)) CHECK(std::accumulate(p.begin(), p.end(), 0) == 5);
    CHECK(enumerate_profiles(4, 5).size() == 56);
}

TEST_CASE("payoff lookups reject missing profiles") {
    HeuristicGame g({"A", "B"}, 2);
    g.set({2, 0}, entry({1, 0}));
    CHECK_FALSE(g.complete());
    try {
        g.payoff({1, 1}, 0);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingProfile);
    }
    CHECK_THROWS_AS(g.payoff({2, 0}, 1), Error);
    CHECK_THROWS_AS(g.set({3, 0}, entry({1, 0})), Error);
    CHECK(prisoners_dilemma().complete());
}

TEST_CASE("mixture payoff examples") {
    const auto pd = prisoners_dilemma();
    CHECK(mixture_payoff(pd, 0, {0.5, 0.5}) == doctest::Approx(1.5));
    CHECK(mixture_payoff(pd, 1, {0.5, 0.5}) == doctest::Approx(2.5));

    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = random_game(3, 5, rng);
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                Mixture pure(3, 0.0);
                pure[j] = 1.0;
                Profile p(3, 0);
                p[j] += 4;
                p[i] += 1;
                CHECK(mixture_payoff(g, i, pure) == g.payoff(p, i));
            }
        }
    }

    HeuristicGame flat({"A", "B", "C"}, 3);
    for (const auto& p : enumerate_profiles(3, 3)) {
        std::vector<double> m(3, 0.0);
        for (std::size_t i = 0; i < 3; ++i) m[i] = p[i] > 0 ? 4.0 : 0.0;
        flat.set(p, entry(m));
    }
    for (std::size_t i = 0; i < 3; ++i) CHECK(mixture_payoff(flat, i, {0.2, 0.3, 0.5}) == doctest::Approx(4.0));
}

TEST_CASE("replicator flow examples") {
    const auto pd = prisoners_dilemma();
    const auto r = replicator_flow(pd, {0.5, 0.5});
    CHECK(r.converged);
    CHECK(linf(r.terminal, {0.0, 1.0}) < 1e-6);

    const auto pure = replicator_flow(pd, {1.0, 0.0});
    CHECK(pure.terminal == Mixture{1.0, 0.0});

    HeuristicGame flat({"A", "B"}, 2);
    flat.set({2, 0}, entry({3, 0}));
    flat.set({1, 1}, entry({3, 3}));
    flat.set({0, 2}, entry({0, 3}));
    const auto still = replicator_flow(flat, {0.3, 0.7});
    CHECK(linf(still.terminal, {0.3, 0.7}) < 1e-12);
}

TEST_CASE("flows stay on the simplex") {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = random_game(3, 4, rng);
        const auto x0 = sample_simplex(3, rng);
        FlowOptions o;
        o.sample_every = 1;
        o.max_steps = 5000;
        const auto r = replicator_flow(g, x0, o);
        CHECK(r.max_drift <= 1e-9);
        for (const auto& x : r.trajectory) {
            CHECK(std::abs(std::accumulate(x.begin(), x.end(), 0.0) - 1.0) <= 1e-9);
            for (double v : x) CHECK(v >= -1e-12);
        }
    }
}

TEST_CASE("a strictly dominant strategy absorbs every interior flow") {
    Rng rng(3);
    HeuristicGame g({"A", "B", "C"}, 3);
    for (const auto& p : enumerate_profiles(3, 3)) {
        std::vector<double> m(3, 0.0);
        for (std::size_t i = 0; i < 3; ++i) {
            if (p[i] > 0) m[i] = (i == 2 ? 10.0 : 0.0) + rng.uniform(0, 5);
        }
        g.set(p, entry(m));
    }
    for (int k = 0; k < 20; ++k) {
        const auto r = replicator_flow(g, sample_simplex(3, rng));
        CHECK(r.converged);
        CHECK(r.terminal[2] > 1.0 - 1e-6);
    }
}

TEST_CASE("equilibrium search examples") {
    const auto pd = find_equilibria(prisoners_dilemma(), 200, 4);
    REQUIRE(pd.attractors.size() == 1);
    CHECK(linf(pd.attractors[0].point, {0, 1}) < 1e-6);
    CHECK(pd.attractors[0].basin == doctest::Approx(1.0));
    CHECK(pd.attractors[0].verified_ne);

    const auto co = find_equilibria(coordination(), 200, 5);
    REQUIRE(co.attractors.size() == 2);
    double total = co.unclassified_fraction;
    for (const auto& a : co.attractors) {
        total += a.basin;
        CHECK(a.verified_ne);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    // Brute-force grid: interior fixed point at x_A = 1/3 splits the basins.
    int toward_a = 0;
    const int grid = 99;
    for (int i = 1; i <= grid; ++i) {
        const double x = i / (grid + 1.0);
        const auto r = replicator_flow(coordination(), {x, 1 - x});
        if (r.terminal[0] > 0.5) ++toward_a;
    }
    for (const auto& a : co.attractors) {
        if (a.point[0] > 0.5) CHECK(std::abs(a.basin - toward_a / static_cast<double>(grid)) < 0.1);
    }

    HeuristicGame single({"only"}, 4);
    single.set({4}, entry({2}));
    const auto one = find_equilibria(single, 10, 6);
    REQUIRE(one.attractors.size() == 1);
    CHECK(one.attractors[0].point == Mixture{1.0});
    CHECK(one.attractors[0].basin == 1.0);
}

TEST_CASE("equilibrium search is deterministic") {
    Rng rng(7);
    const auto g = random_game(3, 4, rng);
    const auto a = find_equilibria(g, 50, 11);
    const auto b = find_equilibria(g, 50, 11);
    REQUIRE(a.attractors.size() == b.attractors.size());
    for (std::size_t i = 0; i < a.attractors.size(); ++i) {
        CHECK(a.attractors[i].point == b.attractors[i].point);
        CHECK(a.attractors[i].basin == b.attractors[i].basin);
    }
    CHECK(a.unclassified == b.unclassified);
}

TEST_CASE("perturbation examples") {
    const auto pd = prisoners_dilemma();
    const auto same = perturb(pd, 1, 0, 0.0);
    for (const auto& [p, e] : pd.entries()) CHECK(same.find(p)->mean == e.mean);

    const auto moved = perturb(pd, 1, 0, 0.7);
    for (const auto& [p, e] : pd.entries()) {
        const auto& m = moved.find(p)->mean;
        CHECK(m[0] + m[1] == doctest::Approx(e.mean[0] + e.mean[1]));
    }
    CHECK(moved.payoff({1, 1}, 0) == doctest::Approx(0.7));

    const auto below = find_equilibria(perturb(pd, 1, 0, 0.9), 100, 8);
    REQUIRE(below.attractors.size() == 1);
    CHECK(below.attractors[0].point[1] > 1 - 1e-6);
    const auto flipped = find_equilibria(perturb(pd, 1, 0, 1.5), 100, 8);
    REQUIRE(flipped.attractors.size() == 1);
    CHECK(flipped.attractors[0].point[0] > 1 - 1e-6);

    CHECK_THROWS_AS(perturb(pd, 0, 5, 1.0), Error);
    CHECK_THROWS_AS(perturb(pd, 0, 1, -1.0), Error);
}

TEST_CASE("homogeneous profile payoff is the mean per-agent profit") {
    const auto sch = small_schedule();
    const auto cfg = short_market();
    const std::vector<StrategySpec> specs{{"zi-c", {}}};
    const auto e = estimate_payoffs({6}, specs, cfg, sch, 10, 99);
    double sum = 0.0;
    for (int r = 0; r < 10; ++r) {
        const auto log =
            run_game(cfg, sch, std::vector<StrategySpec>(6, specs[0]), derive_seed(99, static_cast<std::uint64_t>(r)));
        sum += actual_profit_signed(log.transactions, sch) / 6.0;
    }
    CHECK(oracle::relative_error(e.mean[0], sum / 10.0) <= 1e-9);
    CHECK(e.samples == 10);
}

TEST_CASE("relabeled copies of one strategy earn the same payoff") {
    const std::vector<StrategySpec> specs{{"zi-c", {}}, {"zi-c", {}}};
    const auto e = estimate_payoffs({3, 3}, specs, short_market(), small_schedule(), 200, 3);
    const double band = 2.0 * std::hypot(e.std_error[0], e.std_error[1]);
    CHECK(std::abs(e.mean[0] - e.mean[1]) <= band);
}

TEST_CASE("standard error shrinks with more replications") {
    const std::vector<StrategySpec> specs{{"zi-c", {}}};
    const auto a = estimate_payoffs({6}, specs, short_market(), small_schedule(), 100, 4);
    const auto b = estimate_payoffs({6}, specs, short_market(), small_schedule(), 200, 5);
    const double ratio = b.std_error[0] / a.std_error[0];
    CHECK(ratio == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.25));
}

TEST_CASE("estimate_payoffs rejects bad inputs") {
    const std::vector<StrategySpec> specs{{"tt", {}}};
    CHECK_THROWS_AS(estimate_payoffs({5}, specs, short_market(), small_schedule(), 2, 0), Error);
    CHECK_THROWS_AS(estimate_payoffs({6}, specs, short_market(), small_schedule(), 0, 0), Error);
}

TEST_CASE("role assignment balances sides") {
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const auto seats = assign_roles({3, 2, 1}, 3, 3, rng);
        REQUIRE(seats.size() == 6);
        std::vector<int> buy(3, 0), total(3, 0);
        for (std::size_t t = 0; t < 6; ++t) {
            ++total[static_cast<std::size_t>(seats[t])];
            if (t < 3) ++buy[static_cast<std::size_t>(seats[t])];
        }
        CHECK(total == std::vector<int>{3, 2, 1});
        CHECK(buy[1] == 1);
        CHECK((buy[0] == 1 || buy[0] == 2));
    }
}

TEST_CASE("built game covers every profile deterministically") {
    const std::vector<std::string> names{"TT", "ZIC", "Kaplan"};
    const std::vector<StrategySpec> specs{{"tt", {}}, {"zi-c", {}}, {"kaplan", {}}};
    BuildOptions o;
    o.reps = 3;
    o.seed = 12;
    const auto g = build_game(names, specs, 6, short_market(), small_schedule(), o);
    CHECK(g.complete());
    CHECK(g.entries().size() == 28);
    o.jobs = 2;
    const auto h = build_game(names, specs, 6, short_market(), small_schedule(), o);
    for (const auto& [p, e] : g.entries()) CHECK(h.find(p)->mean == e.mean);
}
