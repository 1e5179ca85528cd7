#include "dasim/game.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace dasim {

std::vector<Transaction> GameLog::transactions_on_day(int day) const {
    std::vector<Transaction> out;
    for (const auto& t : transactions) {
        if (t.time.day == day) out.push_back(t);
    }
    return out;
}

namespace {

class Engine {
public:
    Engine(const MarketConfig& cfg, const Schedule& schedule,
           std::vector<std::unique_ptr<Strategy>> traders, std::uint64_t seed)
        : cfg_(cfg), schedule_(schedule), traders_(std::move(traders)), market_rng_(derive_seed(seed, 0)) {
        log_.config = cfg;
        log_.schedule = schedule;
        log_.seed = seed;
        const std::size_t n = traders_.size();
        for (std::size_t i = 0; i < n; ++i) {
            trader_rngs_.emplace_back(derive_seed(seed, i + 1));
            log_.strategy_names.emplace_back(traders_[i]->name());
        }
        units_left_.assign(n, 0);
        last_own_.assign(n, LastOwnResult{});
        offered_.assign(n, false);
    }

    GameLog run() {
        for (std::size_t i = 0; i < traders_.size(); ++i) {
            traders_[i]->on_game_start(context(static_cast<TraderId>(i)), trader_rngs_[i]);
        }
        for (day_ = 1; day_ <= cfg_.days; ++day_) {
            run_day();
        }
        return std::move(log_);
    }

private:
    TraderContext context(TraderId id) {
        const auto i = static_cast<std::size_t>(id);
        TraderContext ctx;
        ctx.id = id;
        ctx.side = schedule_.side_of(id);
        ctx.limit = schedule_.value_of(id, std::max(day_, 1));
        ctx.quote = market_quote(book_, cfg_);
        ctx.history = history_;
        ctx.day = std::max(day_, 1);
        ctx.days = cfg_.days;
        ctx.round = std::max(round_, 1);
        ctx.rounds_per_day = cfg_.rounds_per_day;
        ctx.min_price = cfg_.min_price;
        ctx.max_price = cfg_.max_price;
        ctx.units_left = units_left_[i];
        ctx.last_own = last_own_[i];
        ctx.diagnostics = &log_.warnings;
        return ctx;
    }

    void run_day() {
        log_.events.emplace_back(DayBoundary{day_});
        book_.clear();
        std::fill(units_left_.begin(), units_left_.end(), schedule_.units_per_trader_per_day);
        std::fill(last_own_.begin(), last_own_.end(), LastOwnResult{});
        round_ = 1;
        for (std::size_t i = 0; i < traders_.size(); ++i) {
            traders_[i]->on_day_start(context(static_cast<TraderId>(i)), trader_rngs_[i]);
        }
        for (round_ = 1; round_ <= cfg_.rounds_per_day; ++round_) {
            run_round();
        }
        round_ = cfg_.rounds_per_day;
        book_.clear();
        for (std::size_t i = 0; i < traders_.size(); ++i) {
            traders_[i]->on_day_end(context(static_cast<TraderId>(i)), trader_rngs_[i]);
        }
    }

    void run_round() {
        std::fill(offered_.begin(), offered_.end(), false);
        std::vector<TraderId> buyers;
        std::vector<TraderId> sellers;
        for (;;) {
            buyers.clear();
            sellers.clear();
            for (std::size_t i = 0; i < traders_.size(); ++i) {
                if (offered_[i] || units_left_[i] <= 0) continue;
                const auto id = static_cast<TraderId>(i);
                (i < schedule_.num_buyers() ? buyers : sellers).push_back(id);
            }
            const auto side = select_next_side(cfg_.qs, market_rng_, !sellers.empty(), !buyers.empty());
            if (!side) break;
            const auto& pool = *side == Side::Buy ? buyers : sellers;
            const TraderId id = pool[market_rng_.index(pool.size())];
            offered_[static_cast<std::size_t>(id)] = true;
            offer_slot(id);
        }

        const bool periodic = cfg_.clearing.kind == ClearingMode::Kind::Periodic;
        if (periodic && (round_ % cfg_.clearing.rounds_per_clear == 0 || round_ == cfg_.rounds_per_day)) {
            const MarketTime now{day_, round_, next_seq_};
            for (const auto& tx : clear_periodic(book_, cfg_, now)) {
                settle(tx);
            }
        } else if (!periodic && !cfg_.persistent_shouts) {
            book_.clear();
        }
        log_.events.emplace_back(QuoteSnapshot{MarketTime{day_, round_, next_seq_}, market_quote(book_, cfg_)});
    }

    void offer_slot(TraderId id) {
        const auto i = static_cast<std::size_t>(id);
        const auto price = traders_[i]->shout(context(id), trader_rngs_[i]);
        if (!price) return;
        Money p = *price;
        if (!std::isfinite(p)) {
            log_.warnings.push_back("trader " + std::to_string(id) + " produced a non-finite price");
            return;
        }
        if (cfg_.tick) p = std::round(p / *cfg_.tick) * *cfg_.tick;
        p = std::max(p, 0.0);

        Shout s{id, schedule_.side_of(id), p, 1, MarketTime{day_, round_, next_seq_++}};
        const auto verdict = validate_shout(book_, s, cfg_);
        log_.events.emplace_back(ShoutLogged{s, verdict.accepted, verdict.reason});
        remember(ShoutRecord{s, false, !verdict.accepted});

        if (!verdict.accepted) {
            last_own_[i] = {OwnResult::Rejected, p};
            broadcast_shout(MarketEvent{s, ShoutOutcome::Rejected});
            return;
        }

        book_.remove_trader(id);
        std::optional<Transaction> tx;
        if (cfg_.clearing.kind == ClearingMode::Kind::Continuous) {
            tx = post_continuous(book_, s, cfg_);
        } else {
            book_.insert(s);
        }
        last_own_[i] = {OwnResult::Stood, p};
        broadcast_shout(MarketEvent{s, tx ? ShoutOutcome::Traded : ShoutOutcome::Stood});
        if (tx) settle(*tx);
    }

    void remember(const ShoutRecord& r) {
        if (cfg_.history_capacity == 0) return;
        history_.push_back(r);
        const auto cap = static_cast<std::size_t>(cfg_.history_capacity);
        if (history_.size() > cap) {
            history_.erase(history_.begin(), history_.begin() + static_cast<std::ptrdiff_t>(history_.size() - cap));
        }
    }

    void mark_traded(std::uint64_t seq) {
        for (auto it = history_.rbegin(); it != history_.rend(); ++it) {
            if (it->shout.time.seq == seq) {
                it->traded = true;
                return;
            }
        }
    }

    void settle(const Transaction& tx) {
        log_.events.emplace_back(TransactionLogged{tx});
        log_.transactions.push_back(tx);
        mark_traded(tx.bid.time.seq);
        mark_traded(tx.ask.time.seq);
        for (TraderId id : {tx.bid.trader, tx.ask.trader}) {
            const auto i = static_cast<std::size_t>(id);
            last_own_[i] = {OwnResult::Traded, tx.price};
            if (--units_left_[i] <= 0) book_.remove_trader(id);
        }
        for (std::size_t i = 0; i < traders_.size(); ++i) {
            traders_[i]->on_transaction(tx, context(static_cast<TraderId>(i)), trader_rngs_[i]);
        }
    }

    void broadcast_shout(const MarketEvent& ev) {
        for (std::size_t i = 0; i < traders_.size(); ++i) {
            traders_[i]->on_shout(ev, context(static_cast<TraderId>(i)), trader_rngs_[i]);
        }
    }

    const MarketConfig& cfg_;
    const Schedule& schedule_;
    std::vector<std::unique_ptr<Strategy>> traders_;
    Rng market_rng_;
    std::vector<Rng> trader_rngs_;
    std::vector<int> units_left_;
    std::vector<LastOwnResult> last_own_;
    std::vector<bool> offered_;
    OrderBook book_;
    std::vector<ShoutRecord> history_;
    std::uint64_t next_seq_ = 1;
    int day_ = 0;
    int round_ = 0;
    GameLog log_;
};

}  // namespace

GameLog run_game(const MarketConfig& cfg, const Schedule& schedule,
                 std::vector<std::unique_ptr<Strategy>> traders, std::uint64_t seed) {
    cfg.validate();
    schedule.validate();
    if (traders.size() != schedule.num_traders()) {
        throw Error(ErrorCode::ConfigInvalid, "expected " + std::to_string(schedule.num_traders()) +
                                                  " strategy bindings, got " + std::to_string(traders.size()));
    }
    for (const auto& t : traders) {
        if (!t) throw Error(ErrorCode::ConfigInvalid, "null strategy binding");
    }
    return Engine(cfg, schedule, std::move(traders), seed).run();
}

namespace {

void append_fmt(std::string& out, const char* fmt, auto... args) {
    char buf[256];
    const int n = std::snprintf(buf, sizeof buf, fmt, args...);
    out.append(buf, static_cast<std::size_t>(n));
}

}  // namespace

std::string dump_events(const GameLog& log) {
    std::string out;
    for (const auto& ev : log.events) {
        std::visit(
            [&out](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, ShoutLogged>) {
                    append_fmt(out, "S %d %d %llu %d %s %.17g %s\n", e.shout.time.day, e.shout.time.round,
                               static_cast<unsigned long long>(e.shout.time.seq), e.shout.trader,
                               to_string(e.shout.side).data(), e.shout.price, e.accepted ? "ok" : "rej");
                } else if constexpr (std::is_same_v<T, TransactionLogged>) {
                    append_fmt(out, "T %d %d %llu %d %d %.17g\n", e.tx.time.day, e.tx.time.round,
                               static_cast<unsigned long long>(e.tx.time.seq), e.tx.bid.trader, e.tx.ask.trader,
                               e.tx.price);
                } else if constexpr (std::is_same_v<T, DayBoundary>) {
                    append_fmt(out, "D %d\n", e.day);
                } else {
                    append_fmt(out, "Q %d %d %.17g %.17g\n", e.time.day, e.time.round, e.quote.bid, e.quote.ask);
                }
            },
            ev);
    }
    return out;
}

}  // namespace dasim
