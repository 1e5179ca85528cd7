#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dasim/core.hpp"
#include "dasim/rng.hpp"

namespace dasim {

/// Private values in force from `day` (1-based) onwards.
struct ScheduleShift {
    int day = 1;
    std::vector<Money> buyer_values;
    std::vector<Money> seller_values;

    friend bool operator==(const ScheduleShift&, const ScheduleShift&) = default;
};

/// Underlying supply and demand. Trader ids are assigned buyers first:
/// buyer i has id i, seller j has id num_buyers() + j.
struct Schedule {
    std::vector<Money> buyer_values;
    std::vector<Money> seller_values;
    int units_per_trader_per_day = 1;
    std::vector<ScheduleShift> shifts;

    std::size_t num_buyers() const noexcept { return buyer_values.size(); }
    std::size_t num_sellers() const noexcept { return seller_values.size(); }
    std::size_t num_traders() const noexcept { return buyer_values.size() + seller_values.size(); }

    /// The schedule in force on `day` with shifts resolved (and dropped).
    Schedule for_day(int day) const;
    Side side_of(TraderId id) const;
    Money value_of(TraderId id, int day = 1) const;
    bool has_trader(TraderId id) const noexcept {
        return id >= 0 && static_cast<std::size_t>(id) < num_traders();
    }

    /// Throws Error(ConfigInvalid) on negative values, bad units or shift
    /// lists that change the trader count.
    void validate() const;

    friend bool operator==(const Schedule&, const Schedule&) = default;
};

struct PriceInterval {
    Money low = 0.0;
    Money high = 0.0;
};

struct EquilibriumReport {
    int q0 = 0;
    std::optional<PriceInterval> interval;
    std::optional<Money> p0;
};

/// Competitive equilibrium of unit-demand buyers and unit-supply sellers.
/// Values need not be sorted.
EquilibriumReport equilibrium_from_values(std::span<const Money> buyer_values,
                                          std::span<const Money> seller_values);

/// Equilibrium of the schedule in force on `day`, with each trader's value
/// repeated units_per_trader_per_day times.
EquilibriumReport compute_equilibrium(const Schedule& s, int day = 1);

struct Pricing {
    enum class Kind { Kda, Uniform };
    Kind kind = Kind::Kda;
    /// k for Kda (weight on the ask side), ku for Uniform (fraction of the
    /// clearing interval measured from its low end).
    double k = 0.5;

    friend bool operator==(const Pricing&, const Pricing&) = default;
};

struct ClearingMode {
    enum class Kind { Continuous, Periodic };
    Kind kind = Kind::Continuous;
    int rounds_per_clear = 1;

    friend bool operator==(const ClearingMode&, const ClearingMode&) = default;
};

struct MarketConfig {
    ClearingMode clearing;
    bool improvement_rule = false;
    Pricing pricing;
    double qs = 0.5;
    int days = 1;
    int rounds_per_day = 1;
    Money min_price = 0.0;
    Money max_price = 200.0;
    bool persistent_shouts = true;
    /// Optional price grid; shouts are rounded to the nearest multiple.
    std::optional<Money> tick;
    /// Number of most recent shouts exposed to strategies.
    int history_capacity = 64;

    /// Throws Error(ConfigInvalid) naming the first violated invariant.
    void validate() const;

    friend bool operator==(const MarketConfig&, const MarketConfig&) = default;
};

struct Quote {
    Money bid = 0.0;
    Money ask = 0.0;
};

/// Standing shouts, each side kept best-first with ties broken by
/// earliest sequence number.
class OrderBook {
public:
    std::span<const Shout> bids() const noexcept { return bids_; }
    std::span<const Shout> asks() const noexcept { return asks_; }
    std::optional<Shout> best_bid() const;
    std::optional<Shout> best_ask() const;
    bool empty() const noexcept { return bids_.empty() && asks_.empty(); }
    bool crossed() const noexcept {
        return !bids_.empty() && !asks_.empty() && bids_.front().price >= asks_.front().price;
    }

    void insert(const Shout& s);
    /// Removes any standing shout of `trader`; returns whether one existed.
    bool remove_trader(TraderId trader);
    Shout pop_best_bid();
    Shout pop_best_ask();
    void clear() noexcept {
        bids_.clear();
        asks_.clear();
    }

private:
    std::vector<Shout> bids_;
    std::vector<Shout> asks_;
};

enum class RejectReason { None, NoImprovement };

struct ShoutValidation {
    bool accepted = true;
    RejectReason reason = RejectReason::None;
};

ShoutValidation validate_shout(const OrderBook& book, const Shout& s, const MarketConfig& cfg);

/// k-DA price k*ask + (1-k)*bid, or ask + ku*(bid-ask) under Uniform.
/// Throws Error(CrossedInput) when ask > bid.
Money transaction_price(Money ask, Money bid, const Pricing& pricing);

/// Uniform clearing price inside [low, high]; Kda(k) and Uniform(1-k)
/// name the same point.
Money interval_price(const PriceInterval& interval, const Pricing& pricing);

/// Inserts `s` and executes at most one trade between the best bid and
/// best ask. The book is uncrossed on return if it was before.
std::optional<Transaction> post_continuous(OrderBook& book, const Shout& s, const MarketConfig& cfg);

/// Matches the maximal crossing prefix at one uniform price. Unmatched
/// shouts stay unless cfg.persistent_shouts is false.
std::vector<Transaction> clear_periodic(OrderBook& book, const MarketConfig& cfg, MarketTime now);

Quote market_quote(const OrderBook& book, const MarketConfig& cfg);

/// Sell with probability qs. Falls back to the other side when one side
/// has no eligible trader; nullopt when neither has.
std::optional<Side> select_next_side(double qs, Rng& rng, bool sellers_available = true,
                                     bool buyers_available = true);

}  // namespace dasim
