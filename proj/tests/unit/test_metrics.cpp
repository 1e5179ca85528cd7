#include "doctest.h"

#include <cmath>

#include "dasim/metrics.hpp"
#include "dasim/strategies.hpp"
#include "oracles.hpp"

using namespace dasim;

namespace {

Transaction trade(TraderId buyer, TraderId seller, Money price, int day = 1) {
    Transaction t;
    t.bid = Shout{buyer, Side::Buy, price, 1, MarketTime{day, 1, 1}};
    t.ask = Shout{seller, Side::Sell, price, 1, MarketTime{day, 1, 2}};
    t.price = price;
    t.time = MarketTime{day, 1, 3};
    return t;
}

double rms(const std::vector<double>& a, const std::vector<double>& b) {
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(ss / static_cast<double>(a.size()));
}

}  // namespace

TEST_CASE("actual profit examples") {
    const Schedule s{{10}, {5}};
    const std::vector<Transaction> one{trade(0, 1, 7)};
    CHECK(actual_profit(one, s) == 5.0);
    CHECK(actual_profit({}, s) == 0.0);

    const std::vector<Transaction> loss{trade(0, 1, 12)};
    CHECK(actual_profit(loss, s) == 2.0 + 7.0);
    CHECK(actual_profit_signed(loss, s) == -2.0 + 7.0);

    const std::vector<Transaction> bad{trade(0, 7, 7)};
    try {
        actual_profit(bad, s);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownTrader);
    }
}

TEST_CASE("equilibrium profit examples") {
    CHECK(equilibrium_profit(Schedule{{10, 7}, {5, 8}}) == 5.0);

    Schedule sym;
    for (int i = 0; i < 10; ++i) {
        sym.buyer_values.push_back(150 - 10 * i);
        sym.seller_values.push_back(50 + 10 * i);
    }
    const auto split = equilibrium_profit_split(sym);
    CHECK(split.defined);
    CHECK(split.buyers == split.sellers);
    CHECK(split.total == split.buyers + split.sellers);

    const auto none = equilibrium_profit_split(Schedule{{3}, {5}});
    CHECK_FALSE(none.defined);
    CHECK(none.total == 0.0);
}

TEST_CASE("allocative efficiency examples") {
    CHECK(*allocative_efficiency(5, 5) == 100.0);
    CHECK(*allocative_efficiency(2, 5) == doctest::Approx(40.0));
    CHECK(*allocative_efficiency(0, 5) == 0.0);
    CHECK_FALSE(allocative_efficiency(3, 0));
}

TEST_CASE("convergence alpha examples") {
    const std::vector<Money> at_p0{100, 100, 100};
    CHECK(*convergence_alpha(at_p0, 100.0) == 0.0);
    const std::vector<Money> spread{90, 110};
    CHECK(*convergence_alpha(spread, 100.0) == doctest::Approx(10.0));
    const std::vector<Money> one{6};
    CHECK(*convergence_alpha(one, 7.5) == doctest::Approx(20.0));
    CHECK_FALSE(convergence_alpha({}, 7.5));
    CHECK_FALSE(convergence_alpha(one, std::nullopt));
    CHECK_FALSE(convergence_alpha(one, 0.0));
}

TEST_CASE("alpha ignores order and is scale free") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Money> prices(1 + rng.index(20));
        for (auto& p : prices) p = rng.uniform(1, 200);
        const Money p0 = rng.uniform(1, 200);
        const double a = *convergence_alpha(prices, p0);
        auto shuffled = prices;
        shuffle(shuffled, rng);
        CHECK(oracle::relative_error(*convergence_alpha(shuffled, p0), a) <= 1e-9);
        const double c = rng.uniform(0.1, 10);
        auto scaled = prices;
        for (auto& p : scaled) p *= c;
        CHECK(oracle::relative_error(*convergence_alpha(scaled, p0 * c), a) <= 1e-9);
        CHECK(a >= 0.0);
    }
}

TEST_CASE("profit dispersion examples") {
    const std::vector<Money> a{2, 0}, pi{5, 5};
    CHECK(profit_dispersion(a, pi) == doctest::Approx(std::sqrt(17.0)));
    CHECK(profit_dispersion(pi, pi) == 0.0);
    const std::vector<Money> a3{2, 0, 1}, pi3{5, 5, 5};
    CHECK(profit_dispersion(a3, pi3) > 0.0);
    const std::vector<Money> scaled_a{6, 0}, scaled_pi{15, 15};
    CHECK(profit_dispersion(scaled_a, scaled_pi) == doctest::Approx(3.0 * std::sqrt(17.0)));
    const std::vector<Money> short_list{1};
    try {
        profit_dispersion(short_list, pi);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::LengthMismatch);
    }
}

TEST_CASE("market power examples") {
    const Schedule s{{10}, {5}};
    const std::vector<Transaction> at_p0{trade(0, 1, 7.5)};
    auto mp = market_power(at_p0, s);
    CHECK(*mp.buyers == 0.0);
    CHECK(*mp.sellers == 0.0);

    const std::vector<Transaction> low{trade(0, 1, 6)};
    mp = market_power(low, s);
    CHECK(*mp.buyers == doctest::Approx(0.6));
    CHECK(*mp.sellers == doctest::Approx(-0.6));

    const auto none = market_power({}, Schedule{{3}, {5}});
    CHECK_FALSE(none.buyers);
    CHECK_FALSE(none.sellers);
}

TEST_CASE("market power shares weight back to overall signed efficiency") {
    MarketConfig cfg;
    cfg.days = 1;
    cfg.rounds_per_day = 40;
    Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        auto [b, s] = oracle::random_schedule(rng, 8, 100);
        Schedule sch{b, s};
        const auto split = equilibrium_profit_split(sch);
        if (!split.defined || split.buyers <= 0 || split.sellers <= 0) continue;
        const auto log = run_game(cfg, sch, std::vector<StrategySpec>(sch.num_traders(), StrategySpec{"zi-u", {}}),
                                  rng.next());
        const auto mp = market_power(log.transactions, sch);
        const double lhs = (*mp.buyers * split.buyers + *mp.sellers * split.sellers) / split.total;
        const double rhs = (actual_profit_signed(log.transactions, sch) - split.total) / split.total;
        CHECK(oracle::relative_error(lhs, rhs) <= 1e-9);
    }
}

TEST_CASE("equilibrium profit equals the maximum-surplus matching") {
    Rng rng(13);
    for (int trial = 0; trial < 1000; ++trial) {
        auto [b, s] = oracle::random_schedule(rng, 10);
        const Schedule sch{b, s};
        CHECK(equilibrium_profit(sch) == oracle::max_surplus(b, s));
    }
}

TEST_CASE("compute_metrics agrees with direct formulas") {
    Schedule sch;
    for (int i = 0; i < 6; ++i) {
        sch.buyer_values.push_back(120 - 12 * i);
        sch.seller_values.push_back(40 + 12 * i);
    }
    MarketConfig cfg;
    cfg.days = 3;
    cfg.rounds_per_day = 20;
    for (const auto* name : {"zi-c", "zi-u", "zip"}) {
        const auto log = run_game(cfg, sch, std::vector<StrategySpec>(12, StrategySpec{name, {}}), 21);
        const auto m = compute_metrics(log);
        CAPTURE(name);
        const double p0 = *compute_equilibrium(sch).p0;
        const double pe_day = oracle::max_surplus(sch.buyer_values, sch.seller_values);

        double pa = 0.0, pa_signed = 0.0;
        std::vector<double> all_prices;
        double dispersion_sum = 0.0;
        for (int d = 1; d <= 3; ++d) {
            std::vector<double> prices, actual(12, 0.0), eq(12, 0.0);
            for (const auto& tx : log.transactions) {
                if (tx.time.day != d) continue;
                const double vb = sch.buyer_values[static_cast<std::size_t>(tx.bid.trader)];
                const double vs = sch.seller_values[static_cast<std::size_t>(tx.ask.trader) - 6];
                pa += std::abs(vb - tx.price) + std::abs(tx.price - vs);
                pa_signed += (vb - tx.price) + (tx.price - vs);
                actual[static_cast<std::size_t>(tx.bid.trader)] += vb - tx.price;
                actual[static_cast<std::size_t>(tx.ask.trader)] += tx.price - vs;
                prices.push_back(tx.price);
                all_prices.push_back(tx.price);
            }
            for (std::size_t i = 0; i < 6; ++i) {
                eq[i] = std::max(0.0, sch.buyer_values[i] - p0);
                eq[i + 6] = std::max(0.0, p0 - sch.seller_values[i]);
            }
            dispersion_sum += rms(actual, eq);

            const auto& day = m.days[static_cast<std::size_t>(d - 1)];
            CHECK(day.volume == static_cast<int>(prices.size()));
            if (!prices.empty()) {
                double ss = 0.0;
                for (double p : prices) ss += (p - p0) * (p - p0);
                const double alpha = 100.0 / p0 * std::sqrt(ss / static_cast<double>(prices.size()));
                CHECK(oracle::relative_error(*day.alpha, alpha) <= 1e-9);
            }
            CHECK(oracle::relative_error(day.dispersion, rms(actual, eq)) <= 1e-9);
        }
        const double pe = 3 * pe_day;
        CHECK(oracle::relative_error(m.pa, pa) <= 1e-9);
        CHECK(oracle::relative_error(m.pe, pe) <= 1e-9);
        CHECK(oracle::relative_error(*m.ea, 100.0 * pa / pe) <= 1e-9);
        CHECK(oracle::relative_error(*m.ea_signed, 100.0 * pa_signed / pe) <= 1e-9);
        CHECK(oracle::relative_error(m.profit_dispersion, dispersion_sum / 3.0) <= 1e-9);
        if (std::string(name) != "zi-u") CHECK(*m.ea <= 100.0 + 1e-9);
        CHECK(m.volume_by_day.size() == 3);
    }
}
