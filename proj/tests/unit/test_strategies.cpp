#include "doctest.h"

#include <cmath>
#include <numeric>

#include "dasim/strategies.hpp"

using namespace dasim;

namespace {

TraderContext context(Side side, Money limit) {
    TraderContext c;
    c.id = 0;
    c.side = side;
    c.limit = limit;
    c.min_price = 0;
    c.max_price = 200;
    c.quote = Quote{0, 200};
    c.units_left = 1;
    c.rounds_per_day = 50;
    return c;
}

ShoutRecord record(Side side, Money price, bool traded) {
    return ShoutRecord{Shout{1, side, price, 1, MarketTime{1, 1, 1}}, traded, false};
}

double q_at(const Belief& b, Money p) {
    for (const auto& pt : b) {
        if (pt.price == p) return pt.q;
    }
    FAIL("price not on grid");
    return -1;
}

}  // namespace

TEST_CASE("truth teller shouts its value") {
    CHECK(tt_price(context(Side::Buy, 10)) == 10.0);
    CHECK(tt_price(context(Side::Sell, 5)) == 5.0);
    const auto ctx = context(Side::Buy, 10);
    CHECK(tt_price(ctx) == tt_price(ctx));
}

TEST_CASE("ZI-U draws uniformly over the price bounds") {
    Rng rng(1);
    const auto ctx = context(Side::Buy, 10);
    double sum = 0.0;
    bool above_limit = false;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double p = zi_u_price(ctx, rng);
        CHECK(p >= 0.0);
        CHECK(p < 200.0);
        sum += p;
        above_limit |= p > 10.0;
    }
    CHECK(std::abs(sum / n - 100.0) <= 1.0);
    CHECK(above_limit);

    Rng a(5), b(5);
    for (int i = 0; i < 100; ++i) CHECK(zi_u_price(ctx, a) == zi_u_price(ctx, b));
}

TEST_CASE("ZI-C never shouts through the limit") {
    Rng rng(2);
    const auto buyer = context(Side::Buy, 10);
    const auto seller = context(Side::Sell, 5);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto d = zi_c_price(buyer, rng);
        CHECK(d.price <= 10.0);
        CHECK(d.price > 0.0);
        CHECK_FALSE(d.degenerate);
        sum += d.price;
        CHECK(zi_c_price(seller, rng).price >= 5.0);
    }
    CHECK(std::abs(sum / n - 5.0) <= 0.1);
}

TEST_CASE("ZI-C clamps an out-of-range limit and flags it") {
    Rng rng(3);
    const auto d = zi_c_price(context(Side::Buy, 250), rng);
    CHECK(d.degenerate);
    CHECK(d.price <= 200.0);
}

TEST_CASE("ZIP shout price from margin") {
    ZipState s;
    s.margin = 0.15;
    CHECK(zip_price(s, Side::Sell, 10) == doctest::Approx(11.5).epsilon(1e-12));
    CHECK(zip_price(s, Side::Buy, 10) == doctest::Approx(8.5).epsilon(1e-12));
    s.margin = 0.0;
    CHECK(zip_price(s, Side::Sell, 10) == 10.0);
    CHECK(zip_price(s, Side::Buy, 10) == 10.0);
}

TEST_CASE("ZIP Widrow-Hoff step worked example") {
    ZipState s;
    s.margin = 0.2;  // seller price 12
    s.beta = 0.5;
    s.gamma = 0.0;
    const auto n = zip_apply_target(s, Side::Sell, 10, 11);
    CHECK(zip_price(n, Side::Sell, 10) == doctest::Approx(11.5).epsilon(1e-12));
    CHECK(n.margin == doctest::Approx(0.15).epsilon(1e-12));

    const auto same = zip_apply_target(s, Side::Sell, 10, 12);
    CHECK(same.margin == doctest::Approx(0.2).epsilon(1e-12));

    const auto floor = zip_apply_target(s, Side::Sell, 10, 1);
    CHECK(zip_price(floor, Side::Sell, 10) >= 10.0);
}

TEST_CASE("ZIP momentum carries earlier steps") {
    ZipState s;
    s.margin = 0.2;
    s.beta = 0.5;
    s.gamma = 0.5;
    s.momentum = 1.0;
    // delta = 0.5 * (11 - 12) = -0.5; momentum' = 0.5*1 + 0.5*(-0.5) = 0.25; p' = 12.25
    const auto n = zip_apply_target(s, Side::Sell, 10, 11);
    CHECK(n.momentum == doctest::Approx(0.25));
    CHECK(zip_price(n, Side::Sell, 10) == doctest::Approx(12.25));
}

TEST_CASE("ZIP raise and lower triggers") {
    // Seller at 12: an accepted shout at 13 means it could ask more.
    CHECK(zip_direction(Side::Sell, 12, {Side::Buy, 13, true}) == PriceMove::Raise);
    CHECK(zip_direction(Side::Sell, 12, {Side::Sell, 11, true}) == PriceMove::Lower);
    CHECK(zip_direction(Side::Sell, 12, {Side::Sell, 11, false}) == PriceMove::Lower);
    CHECK(zip_direction(Side::Sell, 12, {Side::Sell, 13, false}) == PriceMove::None);
    CHECK(zip_direction(Side::Sell, 12, {Side::Buy, 5, false}) == PriceMove::None);
    // Buyer mirrors it.
    CHECK(zip_direction(Side::Buy, 8, {Side::Sell, 7, true}) == PriceMove::Lower);
    CHECK(zip_direction(Side::Buy, 8, {Side::Buy, 9, true}) == PriceMove::Raise);
    CHECK(zip_direction(Side::Buy, 8, {Side::Buy, 9, false}) == PriceMove::Raise);
    CHECK(zip_direction(Side::Buy, 8, {Side::Buy, 7, false}) == PriceMove::None);
}

TEST_CASE("ZIP targets lie in the perturbation ranges") {
    ZipState s;
    s.ca = 0.05;
    s.cr = 0.05;
    Rng rng(4);
    for (int i = 0; i < 10000; ++i) {
        const double up = zip_target(s, PriceMove::Raise, 100, rng);
        CHECK(up >= 100.0);
        CHECK(up <= 105.05 + 1e-9);
        const double down = zip_target(s, PriceMove::Lower, 100, rng);
        CHECK(down <= 100.0);
        CHECK(down >= 94.95 - 1e-9);
    }
}

TEST_CASE("ZIP clamp holds over random event streams") {
    Rng rng(6);
    for (int trial = 0; trial < 200; ++trial) {
        const Side side = rng.bernoulli(0.5) ? Side::Buy : Side::Sell;
        auto ctx = context(side, rng.uniform(20, 180));
        ZipParams p;
        p.beta_lo = 0.0;
        p.beta_hi = 1.0;
        p.gamma_lo = 0.0;
        p.gamma_hi = 0.99;
        p.ca = rng.uniform(0, 1);
        p.cr = rng.uniform(0, 0.5);
        auto s = zip_init(p, rng);
        for (int k = 0; k < 300; ++k) {
            const ZipObservation obs{rng.bernoulli(0.5) ? Side::Buy : Side::Sell, rng.uniform(0, 200), rng.bernoulli(0.5)};
            s = zip_update(s, ctx, obs, rng);
            const Money price = zip_price(s, side, ctx.limit);
            if (side == Side::Sell) {
                CHECK(price >= ctx.limit);
            } else {
                CHECK(price <= ctx.limit);
                CHECK(price >= 0.0);
            }
        }
    }
}

TEST_CASE("ZIP stops learning once its units are gone") {
    Rng rng(7);
    auto ctx = context(Side::Sell, 100);
    ctx.units_left = 0;
    ZipState s;
    s.margin = 0.1;
    const auto n = zip_update(s, ctx, {Side::Buy, 150, true}, rng);
    CHECK(n.margin == s.margin);
}

TEST_CASE("ZIP degenerate parameter ranges draw deterministically") {
    ZipParams p;
    p.beta_lo = p.beta_hi = 0.3;
    p.gamma_lo = p.gamma_hi = 0.05;
    p.margin_lo = p.margin_hi = 0.2;
    Rng a(1), b(99);
    const auto x = zip_init(p, a), y = zip_init(p, b);
    CHECK(x.beta == y.beta);
    CHECK(x.gamma == y.gamma);
    CHECK(x.margin == y.margin);
}

TEST_CASE("RE bin margins") {
    const auto s = re_init(ReParams{});
    CHECK(s.propensities.size() == 8);
    CHECK(re_bin_margin(s, 0) == doctest::Approx(0.05));
    CHECK(re_bin_margin(s, 7) == doctest::Approx(0.4));
}

TEST_CASE("RE choice frequencies follow propensities") {
    ReParams p;
    p.bins = 4;
    auto s = re_init(p);
    Rng rng(8);
    const auto ctx = context(Side::Buy, 100);
    std::vector<int> hits(4, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto c = re_choose(s, ctx, rng);
        ++hits[static_cast<std::size_t>(c.bin)];
        CHECK(c.price <= 100.0);
    }
    for (int h : hits) CHECK(std::abs(h / static_cast<double>(n) - 0.25) <= 0.01);

    s.propensities = {0, 0, 3, 0};
    for (int i = 0; i < 1000; ++i) CHECK(re_choose(s, ctx, rng).bin == 2);
    const auto sell = re_choose(s, context(Side::Sell, 100), rng);
    CHECK(sell.price >= 100.0);
}

TEST_CASE("RE update examples") {
    ReState s;
    s.propensities = {1, 2, 3};
    s.recency = 0.0;
    s.experimentation = 0.0;
    auto n = re_update(s, 1, 5.0);
    CHECK(n.propensities == std::vector<double>{1, 7, 3});

    s.recency = 0.1;
    n = re_update(s, 1, 0.0);
    CHECK(n.propensities[0] == doctest::Approx(0.9));
    CHECK(n.propensities[1] == doctest::Approx(1.8));
    CHECK(n.propensities[2] == doctest::Approx(2.7));

    s.experimentation = 0.2;
    const double before = std::accumulate(s.propensities.begin(), s.propensities.end(), 0.0);
    n = re_update(s, 2, 4.0);
    const double after = std::accumulate(n.propensities.begin(), n.propensities.end(), 0.0);
    CHECK(after == doctest::Approx(0.9 * before + 4.0).epsilon(1e-12));
}

TEST_CASE("RE propensities stay non-negative and positive under any reward stream") {
    Rng rng(9);
    auto s = re_init(ReParams{});
    for (int i = 0; i < 20000; ++i) {
        const double reward = rng.bernoulli(0.9) ? 0.0 : rng.uniform(0, 50);
        s = re_update(s, static_cast<int>(rng.index(8)), reward);
        double total = 0.0;
        for (double q : s.propensities) {
            CHECK(q >= 0.0);
            total += q;
        }
        CHECK(total > 0.0);
    }
}

TEST_CASE("GD belief examples") {
    const auto ramp = gd_belief({}, Side::Buy, 0, 200, 64);
    REQUIRE(ramp.size() == 64);
    for (const auto& pt : ramp) CHECK(pt.q == doctest::Approx(pt.price / 200.0));
    const auto sell_ramp = gd_belief({}, Side::Sell, 0, 200, 64);
    for (const auto& pt : sell_ramp) CHECK(pt.q == doctest::Approx(1.0 - pt.price / 200.0));

    std::vector<ShoutRecord> all_accepted{record(Side::Buy, 10, true), record(Side::Buy, 10, true)};
    CHECK(q_at(gd_belief(all_accepted, Side::Buy, 0, 200), 10) == 1.0);

    std::vector<ShoutRecord> window{record(Side::Buy, 10, true), record(Side::Buy, 6, false)};
    const auto b = gd_belief(window, Side::Buy, 0, 200);
    CHECK(q_at(b, 6) == 0.0);
    CHECK(q_at(b, 10) == 1.0);
    int between = 0;
    for (const auto& pt : b) {
        if (pt.price > 6 && pt.price < 10) {
            CHECK(pt.q > 0.0);
            CHECK(pt.q < 1.0);
            ++between;
        }
    }
    CHECK(between > 0);
}

TEST_CASE("GD belief is monotone and bounded for random windows") {
    Rng rng(10);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<ShoutRecord> window;
        const auto n = rng.index(40);
        for (std::size_t i = 0; i < n; ++i) {
            window.push_back(record(rng.bernoulli(0.5) ? Side::Buy : Side::Sell, std::floor(rng.uniform(0, 200)),
                                    rng.bernoulli(0.4)));
        }
        for (Side side : {Side::Buy, Side::Sell}) {
            const auto b = gd_belief(window, side, 0, 200);
            for (std::size_t i = 0; i < b.size(); ++i) {
                CHECK(b[i].q >= 0.0);
                CHECK(b[i].q <= 1.0);
                if (i > 0) {
                    CHECK(b[i].price > b[i - 1].price);
                    if (side == Side::Buy) {
                        CHECK(b[i].q >= b[i - 1].q);
                    } else {
                        CHECK(b[i].q <= b[i - 1].q);
                    }
                }
            }
        }
    }
}

TEST_CASE("GD shout examples") {
    const auto ctx = context(Side::Buy, 10);
    const Belief tie{{6, 0.5}, {8, 1.0}};
    REQUIRE(gd_shout(ctx, tie));
    CHECK(*gd_shout(ctx, tie) == 6.0);

    const Belief zero{{2, 0.0}, {5, 0.0}, {9, 0.0}};
    CHECK_FALSE(gd_shout(ctx, zero));

    const Belief at_limit{{9, 0.1}, {10, 1.0}};
    CHECK(*gd_shout(ctx, at_limit) == 9.0);

    const auto seller = context(Side::Sell, 10);
    const Belief sell{{12, 1.0}, {14, 0.5}};
    CHECK(*gd_shout(seller, sell) == 14.0);
}

TEST_CASE("Kaplan examples") {
    const KaplanParams p;
    auto ctx = context(Side::Buy, 10);
    ctx.quote = Quote{9, 12};
    CHECK_FALSE(kaplan_price(ctx, p));

    ctx.quote = Quote{9, 9.5};
    REQUIRE(kaplan_price(ctx, p));
    CHECK(*kaplan_price(ctx, p) == 9.5);

    auto wide = context(Side::Buy, 100);
    wide.round = 1;
    wide.quote = Quote{0, 99};
    CHECK_FALSE(kaplan_price(wide, p));

    // Juicy: surplus above 2% of the limit.
    wide.quote = Quote{0, 90};
    CHECK(*kaplan_price(wide, p) == 90.0);

    // Timeout: last 10% of rounds.
    wide.quote = Quote{0, 99};
    wide.round = 46;
    CHECK(*kaplan_price(wide, p) == 99.0);

    auto seller = context(Side::Sell, 10);
    seller.quote = Quote{10.5, 11};
    CHECK(*kaplan_price(seller, p) == 10.5);
    seller.quote = Quote{9, 11};
    CHECK_FALSE(kaplan_price(seller, p));
}

TEST_CASE("strategy factory") {
    for (const auto& n : strategy_names()) CHECK(make_strategy(StrategySpec{n, {}})->name() == n);
    CHECK_THROWS_AS(make_strategy(StrategySpec{"nope", {}}), Error);
    try {
        make_strategy(StrategySpec{"nope", {}});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownStrategy);
    }
    try {
        make_strategy(StrategySpec{"zip", {{"betta", 0.1}}});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
    }
    CHECK_THROWS_AS(make_strategy(StrategySpec{"re", {{"recency", 1.5}}}), Error);
    CHECK_THROWS_AS(make_strategy(StrategySpec{"gd", {{"window", 0}}}), Error);
    CHECK_NOTHROW(make_strategy(StrategySpec{"zip", {{"beta_lo", 0.6}, {"beta_hi", 0.2}}}));
    CHECK(strategy_param_keys("kaplan").size() == 3);
    CHECK_THROWS_AS(strategy_param_keys("nope"), Error);
}

TEST_CASE("strategies are pure in their rng stream") {
    for (const auto& n : strategy_names()) {
        auto a = make_strategy(StrategySpec{n, {}});
        auto b = make_strategy(StrategySpec{n, {}});
        auto ctx = context(Side::Buy, 120);
        ctx.quote = Quote{100, 110};
        Rng ra(3), rb(3);
        a->on_game_start(ctx, ra);
        b->on_game_start(ctx, rb);
        a->on_day_start(ctx, ra);
        b->on_day_start(ctx, rb);
        for (int i = 0; i < 20; ++i) {
            ctx.round = i + 1;
            CAPTURE(n);
            CHECK(a->shout(ctx, ra) == b->shout(ctx, rb));
        }
    }
}
