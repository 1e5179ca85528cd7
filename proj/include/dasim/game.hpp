#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dasim/market.hpp"

namespace dasim {

/// A shout as remembered by the market, with its eventual fate.
struct ShoutRecord {
    Shout shout;
    bool traded = false;
    bool rejected = false;
};

enum class OwnResult { None, Traded, Rejected, Stood };

struct LastOwnResult {
    OwnResult kind = OwnResult::None;
    Money price = 0.0;
};

/// Everything a trader may observe when asked to act.
struct TraderContext {
    TraderId id = -1;
    Side side = Side::Buy;
    Money limit = 0.0;
    Quote quote;
    std::span<const ShoutRecord> history;  // oldest first
    int day = 1;
    int days = 1;
    int round = 1;
    int rounds_per_day = 1;
    Money min_price = 0.0;
    Money max_price = 200.0;
    int units_left = 0;
    LastOwnResult last_own;
    /// Sink for non-fatal strategy warnings; may be null.
    std::vector<std::string>* diagnostics = nullptr;
};

enum class ShoutOutcome { Traded, Stood, Rejected };

/// Broadcast to every trader after a shout has been processed.
struct MarketEvent {
    Shout shout;
    ShoutOutcome outcome = ShoutOutcome::Stood;
};

class Strategy {
public:
    virtual ~Strategy() = default;

    virtual std::string_view name() const = 0;

    virtual void on_game_start(const TraderContext&, Rng&) {}
    virtual void on_day_start(const TraderContext&, Rng&) {}

    /// Price to shout, or nullopt to decline the slot.
    virtual std::optional<Money> shout(const TraderContext& ctx, Rng& rng) = 0;

    virtual void on_shout(const MarketEvent&, const TraderContext&, Rng&) {}
    virtual void on_transaction(const Transaction&, const TraderContext&, Rng&) {}
    virtual void on_day_end(const TraderContext&, Rng&) {}
};

struct ShoutLogged {
    Shout shout;
    bool accepted = true;
    RejectReason reason = RejectReason::None;
};

struct TransactionLogged {
    Transaction tx;
};

struct DayBoundary {
    int day = 1;
};

struct QuoteSnapshot {
    MarketTime time;
    Quote quote;
};

using LogEvent = std::variant<ShoutLogged, TransactionLogged, DayBoundary, QuoteSnapshot>;

struct GameLog {
    MarketConfig config;
    Schedule schedule;
    std::vector<std::string> strategy_names;  // indexed by trader id
    std::uint64_t seed = 0;
    std::vector<LogEvent> events;
    std::vector<Transaction> transactions;
    std::vector<std::string> warnings;

    std::vector<Transaction> transactions_on_day(int day) const;
};

/// Plays one game. traders[i] acts for trader id i (buyers first). The
/// market draws from stream derive_seed(seed, 0) and trader i from
/// derive_seed(seed, i + 1).
/// Throws Error(ConfigInvalid) on a bad config, schedule or trader count.
GameLog run_game(const MarketConfig& cfg, const Schedule& schedule,
                 std::vector<std::unique_ptr<Strategy>> traders, std::uint64_t seed);

/// Deterministic text rendering of every event; two logs are identical
/// iff their dumps are.
std::string dump_events(const GameLog& log);

}  // namespace dasim
