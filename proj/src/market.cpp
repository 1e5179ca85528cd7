#include "dasim/market.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace dasim {

std::string_view to_string(Side s) noexcept { return s == Side::Buy ? "BUY" : "SELL"; }

std::string_view to_string(ErrorCode c) noexcept {
    switch (c) {
        case ErrorCode::CrossedInput: return "CROSSED_INPUT";
        case ErrorCode::ConfigInvalid: return "CONFIG_INVALID";
        case ErrorCode::UnknownTrader: return "UNKNOWN_TRADER";
        case ErrorCode::LengthMismatch: return "LENGTH_MISMATCH";
        case ErrorCode::MissingProfile: return "MISSING_PROFILE";
        case ErrorCode::ParseError: return "PARSE_ERROR";
        case ErrorCode::ValidationError: return "VALIDATION_ERROR";
        case ErrorCode::UnknownStrategy: return "UNKNOWN_STRATEGY";
        case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
        case ErrorCode::Io: return "IO_ERROR";
    }
    return "UNKNOWN";
}

// ---------------------------------------------------------------- Schedule

Schedule Schedule::for_day(int day) const {
    Schedule out;
    out.buyer_values = buyer_values;
    out.seller_values = seller_values;
    out.units_per_trader_per_day = units_per_trader_per_day;
    int applied = 0;
    for (const auto& sh : shifts) {
        if (sh.day <= day && sh.day >= applied) {
            out.buyer_values = sh.buyer_values;
            out.seller_values = sh.seller_values;
            applied = sh.day;
        }
    }
    return out;
}

Side Schedule::side_of(TraderId id) const {
    if (!has_trader(id)) {
        throw Error(ErrorCode::UnknownTrader, "trader " + std::to_string(id));
    }
    return static_cast<std::size_t>(id) < num_buyers() ? Side::Buy : Side::Sell;
}

Money Schedule::value_of(TraderId id, int day) const {
    if (!has_trader(id)) {
        throw Error(ErrorCode::UnknownTrader, "trader " + std::to_string(id));
    }
    const auto idx = static_cast<std::size_t>(id);
    const std::vector<Money>* buyers = &buyer_values;
    const std::vector<Money>* sellers = &seller_values;
    int applied = 0;
    for (const auto& sh : shifts) {
        if (sh.day <= day && sh.day >= applied) {
            buyers = &sh.buyer_values;
            sellers = &sh.seller_values;
            applied = sh.day;
        }
    }
    return idx < num_buyers() ? (*buyers)[idx] : (*sellers)[idx - num_buyers()];
}

void Schedule::validate() const {
    auto check_values = [](const std::vector<Money>& v, const char* what) {
        for (Money x : v) {
            if (!(x >= 0.0) || !std::isfinite(x)) {
                throw Error(ErrorCode::ConfigInvalid, std::string(what) + " must be finite and >= 0");
            }
        }
    };
    check_values(buyer_values, "buyer value");
    check_values(seller_values, "seller value");
    if (units_per_trader_per_day < 1) {
        throw Error(ErrorCode::ConfigInvalid, "units_per_trader_per_day must be >= 1");
    }
    for (const auto& sh : shifts) {
        if (sh.day < 1) throw Error(ErrorCode::ConfigInvalid, "shift day must be >= 1");
        if (sh.buyer_values.size() != buyer_values.size() ||
            sh.seller_values.size() != seller_values.size()) {
            throw Error(ErrorCode::ConfigInvalid, "shift must keep the number of buyers and sellers");
        }
        check_values(sh.buyer_values, "shift buyer value");
        check_values(sh.seller_values, "shift seller value");
    }
}

// ------------------------------------------------------------- Equilibrium

EquilibriumReport equilibrium_from_values(std::span<const Money> buyer_values,
                                          std::span<const Money> seller_values) {
    std::vector<Money> b(buyer_values.begin(), buyer_values.end());
    std::vector<Money> a(seller_values.begin(), seller_values.end());
    std::sort(b.begin(), b.end(), std::greater<>());
    std::sort(a.begin(), a.end());

    std::size_t m = 0;
    while (m < b.size() && m < a.size() && b[m] >= a[m]) ++m;

    EquilibriumReport r;
    r.q0 = static_cast<int>(m);
    if (m == 0) return r;

    constexpr Money inf = std::numeric_limits<Money>::infinity();
    const Money next_bid = m < b.size() ? b[m] : -inf;
    const Money next_ask = m < a.size() ? a[m] : inf;
    PriceInterval iv{std::max(a[m - 1], next_bid), std::min(b[m - 1], next_ask)};
    r.interval = iv;
    r.p0 = 0.5 * (iv.low + iv.high);
    return r;
}

EquilibriumReport compute_equilibrium(const Schedule& s, int day) {
    const Schedule d = s.for_day(day);
    const auto units = static_cast<std::size_t>(std::max(1, d.units_per_trader_per_day));
    std::vector<Money> b;
    std::vector<Money> a;
    b.reserve(d.buyer_values.size() * units);
    a.reserve(d.seller_values.size() * units);
    for (Money v : d.buyer_values) b.insert(b.end(), units, v);
    for (Money v : d.seller_values) a.insert(a.end(), units, v);
    return equilibrium_from_values(b, a);
}

// ------------------------------------------------------------ MarketConfig

void MarketConfig::validate() const {
    auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigInvalid, m); };
    if (!(qs >= 0.0 && qs <= 1.0)) fail("qs must be in [0,1]");
    if (!(pricing.k >= 0.0 && pricing.k <= 1.0)) fail("pricing k must be in [0,1]");
    if (days < 1) fail("days must be >= 1");
    if (rounds_per_day < 1) fail("rounds_per_day must be >= 1");
    if (clearing.kind == ClearingMode::Kind::Periodic && clearing.rounds_per_clear < 1) {
        fail("rounds_per_clear must be >= 1");
    }
    if (!std::isfinite(min_price) || !std::isfinite(max_price) || !(min_price < max_price)) {
        fail("min_price must be < max_price");
    }
    if (min_price < 0.0) fail("min_price must be >= 0");
    if (tick && !(*tick > 0.0)) fail("tick must be > 0");
    if (history_capacity < 0) fail("history_capacity must be >= 0");
}

// --------------------------------------------------------------- OrderBook

namespace {

bool better_bid(const Shout& x, const Shout& y) {
    return x.price > y.price || (x.price == y.price && x.time.seq < y.time.seq);
}

bool better_ask(const Shout& x, const Shout& y) {
    return x.price < y.price || (x.price == y.price && x.time.seq < y.time.seq);
}

}  // namespace

std::optional<Shout> OrderBook::best_bid() const {
    if (bids_.empty()) return std::nullopt;
    return bids_.front();
}

std::optional<Shout> OrderBook::best_ask() const {
    if (asks_.empty()) return std::nullopt;
    return asks_.front();
}

void OrderBook::insert(const Shout& s) {
    if (s.side == Side::Buy) {
        bids_.insert(std::upper_bound(bids_.begin(), bids_.end(), s, better_bid), s);
    } else {
        asks_.insert(std::upper_bound(asks_.begin(), asks_.end(), s, better_ask), s);
    }
}

bool OrderBook::remove_trader(TraderId trader) {
    auto by_trader = [trader](const Shout& s) { return s.trader == trader; };
    const auto nb = std::erase_if(bids_, by_trader);
    const auto na = std::erase_if(asks_, by_trader);
    return nb + na > 0;
}

Shout OrderBook::pop_best_bid() {
    Shout s = bids_.front();
    bids_.erase(bids_.begin());
    return s;
}

Shout OrderBook::pop_best_ask() {
    Shout s = asks_.front();
    asks_.erase(asks_.begin());
    return s;
}

// --------------------------------------------------------------- Clearing

ShoutValidation validate_shout(const OrderBook& book, const Shout& s, const MarketConfig& cfg) {
    if (!cfg.improvement_rule) return {};
    if (s.side == Side::Buy) {
        const auto best = book.best_bid();
        if (best && !(s.price > best->price)) return {false, RejectReason::NoImprovement};
    } else {
        const auto best = book.best_ask();
        if (best && !(s.price < best->price)) return {false, RejectReason::NoImprovement};
    }
    return {};
}

Money transaction_price(Money ask, Money bid, const Pricing& pricing) {
    if (ask > bid) {
        throw Error(ErrorCode::CrossedInput,
                    "ask " + std::to_string(ask) + " above bid " + std::to_string(bid));
    }
    return interval_price(PriceInterval{ask, bid}, pricing);
}

Money interval_price(const PriceInterval& iv, const Pricing& pricing) {
    const double k = pricing.k;
    const Money p = pricing.kind == Pricing::Kind::Kda ? k * iv.low + (1.0 - k) * iv.high
                                                       : (1.0 - k) * iv.low + k * iv.high;
    return std::clamp(p, iv.low, iv.high);
}

std::optional<Transaction> post_continuous(OrderBook& book, const Shout& s, const MarketConfig& cfg) {
    book.insert(s);
    if (!book.crossed()) return std::nullopt;
    const Shout bid = book.pop_best_bid();
    const Shout ask = book.pop_best_ask();
    return Transaction{bid, ask, transaction_price(ask.price, bid.price, cfg.pricing), s.time};
}

std::vector<Transaction> clear_periodic(OrderBook& book, const MarketConfig& cfg, MarketTime now) {
    const auto bids = book.bids();
    const auto asks = book.asks();
    std::size_t m = 0;
    while (m < bids.size() && m < asks.size() && bids[m].price >= asks[m].price) ++m;

    std::vector<Transaction> out;
    if (m > 0) {
        std::vector<Money> bp;
        std::vector<Money> ap;
        for (const auto& b : bids) bp.push_back(b.price);
        for (const auto& a : asks) ap.push_back(a.price);
        const auto eq = equilibrium_from_values(bp, ap);
        const Money price = interval_price(*eq.interval, cfg.pricing);
        out.reserve(m);
        for (std::size_t i = 0; i < m; ++i) {
            out.push_back(Transaction{book.pop_best_bid(), book.pop_best_ask(), price, now});
        }
    }
    if (!cfg.persistent_shouts) book.clear();
    return out;
}

Quote market_quote(const OrderBook& book, const MarketConfig& cfg) {
    const auto b = book.best_bid();
    const auto a = book.best_ask();
    return Quote{b ? b->price : cfg.min_price, a ? a->price : cfg.max_price};
}

std::optional<Side> select_next_side(double qs, Rng& rng, bool sellers_available, bool buyers_available) {
    if (!sellers_available && !buyers_available) return std::nullopt;
    const Side drawn = rng.bernoulli(qs) ? Side::Sell : Side::Buy;
    if (drawn == Side::Sell && !sellers_available) return Side::Buy;
    if (drawn == Side::Buy && !buyers_available) return Side::Sell;
    return drawn;
}

}  // namespace dasim
