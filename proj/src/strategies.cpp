#include "dasim/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

namespace dasim {

// ------------------------------------------------------------ stateless

Money tt_price(const TraderContext& ctx) { return ctx.limit; }

Money zi_u_price(const TraderContext& ctx, Rng& rng) { return rng.uniform(ctx.min_price, ctx.max_price); }

ZiCDraw zi_c_price(const TraderContext& ctx, Rng& rng) {
    ZiCDraw d;
    const Money limit = std::clamp(ctx.limit, ctx.min_price, ctx.max_price);
    d.degenerate = limit != ctx.limit;
    d.price = ctx.side == Side::Buy ? rng.uniform_upper(ctx.min_price, limit) : rng.uniform(limit, ctx.max_price);
    return d;
}

// ------------------------------------------------------------------ ZIP

ZipState zip_init(const ZipParams& p, Rng& rng) {
    ZipState s;
    s.beta = rng.uniform(p.beta_lo, p.beta_hi);
    s.gamma = rng.uniform(p.gamma_lo, p.gamma_hi);
    s.margin = rng.uniform(p.margin_lo, p.margin_hi);
    s.ca = p.ca;
    s.cr = p.cr;
    s.momentum = 0.0;
    return s;
}

Money zip_price(const ZipState& s, Side side, Money limit) {
    return side == Side::Sell ? limit * (1.0 + s.margin) : limit * (1.0 - std::abs(s.margin));
}

ZipState zip_apply_target(ZipState s, Side side, Money limit, Money target) {
    const Money p = zip_price(s, side, limit);
    const Money delta = s.beta * (target - p);
    s.momentum = s.gamma * s.momentum + (1.0 - s.gamma) * delta;
    const Money next = p + s.momentum;
    if (limit > 0.0) {
        s.margin = side == Side::Sell ? std::max(0.0, next / limit - 1.0)
                                      : std::clamp(1.0 - next / limit, 0.0, 1.0);
    }
    return s;
}

PriceMove zip_direction(Side side, Money p, const ZipObservation& obs) {
    const Money q = obs.price;
    if (side == Side::Sell) {
        if (obs.accepted) return p <= q ? PriceMove::Raise : PriceMove::Lower;
        if (obs.shout_side == Side::Sell && p >= q) return PriceMove::Lower;
    } else {
        if (obs.accepted) return p >= q ? PriceMove::Lower : PriceMove::Raise;
        if (obs.shout_side == Side::Buy && p <= q) return PriceMove::Raise;
    }
    return PriceMove::None;
}

Money zip_target(const ZipState& s, PriceMove move, Money q, Rng& rng) {
    if (move == PriceMove::Raise) {
        const double r = rng.uniform(1.0, 1.0 + s.cr);
        const Money a = rng.uniform(0.0, s.ca);
        return r * q + a;
    }
    const double r = rng.uniform(1.0 - s.cr, 1.0);
    const Money a = rng.uniform(-s.ca, 0.0);
    return r * q + a;
}

ZipState zip_update(const ZipState& s, const TraderContext& ctx, const ZipObservation& obs, Rng& rng) {
    if (ctx.units_left <= 0) return s;
    const Money p = zip_price(s, ctx.side, ctx.limit);
    const PriceMove move = zip_direction(ctx.side, p, obs);
    if (move == PriceMove::None) return s;
    return zip_apply_target(s, ctx.side, ctx.limit, zip_target(s, move, obs.price, rng));
}

// ------------------------------------------------------------------- RE

ReState re_init(const ReParams& p) {
    ReState s;
    s.propensities.assign(static_cast<std::size_t>(std::max(1, p.bins)), p.initial_propensity);
    s.recency = p.recency;
    s.experimentation = p.experimentation;
    s.max_margin = p.max_margin;
    return s;
}

double re_bin_margin(const ReState& s, int bin) {
    const auto k = static_cast<double>(s.propensities.size());
    return s.max_margin * (bin + 1) / k;
}

ReChoice re_choose(const ReState& s, const TraderContext& ctx, Rng& rng) {
    double total = 0.0;
    for (double q : s.propensities) total += q;
    int bin = 0;
    const int k = static_cast<int>(s.propensities.size());
    if (total > 0.0) {
        double u = rng.uniform() * total;
        bin = k - 1;
        for (int i = 0; i < k; ++i) {
            u -= s.propensities[static_cast<std::size_t>(i)];
            if (u < 0.0) {
                bin = i;
                break;
            }
        }
        // Skip zero-propensity bins that rounding might land on.
        while (s.propensities[static_cast<std::size_t>(bin)] <= 0.0 && bin > 0) --bin;
    } else {
        bin = static_cast<int>(rng.index(static_cast<std::size_t>(k)));
    }
    const double m = re_bin_margin(s, bin);
    const Money price = ctx.side == Side::Buy ? ctx.limit * (1.0 - m) : ctx.limit * (1.0 + m);
    return {bin, price};
}

ReState re_update(ReState s, int chosen, Money reward) {
    const std::size_t k = s.propensities.size();
    const double keep = 1.0 - s.recency;
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double& q = s.propensities[i];
        if (static_cast<int>(i) == chosen) {
            q = keep * q + (k == 1 ? 1.0 : 1.0 - s.experimentation) * reward;
        } else {
            q = keep * q + s.experimentation * reward / static_cast<double>(k - 1);
        }
        total += q;
    }
    // Long runs without reward underflow; rescaling keeps choice odds.
    if (total < 1e-200) {
        if (total > 0.0) {
            for (double& q : s.propensities) q /= total;
        } else {
            std::fill(s.propensities.begin(), s.propensities.end(), 1.0);
        }
    }
    return s;
}

// ------------------------------------------------------------------- GD

namespace {

double smoothstep_between(const BeliefPoint& a, const BeliefPoint& b, Money x) {
    if (b.price <= a.price) return b.q;
    const double t = std::clamp((x - a.price) / (b.price - a.price), 0.0, 1.0);
    return a.q + (b.q - a.q) * t * t * (3.0 - 2.0 * t);
}

}  // namespace

Belief gd_belief(std::span<const ShoutRecord> window, Side side, Money lo, Money hi, int grid_points) {
    std::set<Money> observed;
    for (const auto& r : window) {
        if (r.shout.price >= lo && r.shout.price <= hi) observed.insert(r.shout.price);
    }

    Belief knots;
    knots.push_back({lo, side == Side::Buy ? 0.0 : 1.0});
    for (Money p : observed) {
        if (p <= lo || p >= hi) continue;
        double favorable = 0.0;
        double against = 0.0;
        for (const auto& r : window) {
            const Money x = r.shout.price;
            if (side == Side::Buy) {
                if (r.shout.side == Side::Buy) {
                    if (r.traded && x <= p) favorable += 1.0;
                    if (!r.traded && x >= p) against += 1.0;
                } else if (x <= p) {
                    favorable += 1.0;
                }
            } else {
                if (r.shout.side == Side::Sell) {
                    if (r.traded && x >= p) favorable += 1.0;
                    if (!r.traded && x <= p) against += 1.0;
                } else if (x >= p) {
                    favorable += 1.0;
                }
            }
        }
        if (favorable + against > 0.0) knots.push_back({p, favorable / (favorable + against)});
    }
    knots.push_back({hi, side == Side::Buy ? 1.0 : 0.0});

    for (std::size_t i = 1; i < knots.size(); ++i) {
        knots[i].q = side == Side::Buy ? std::max(knots[i].q, knots[i - 1].q) : std::min(knots[i].q, knots[i - 1].q);
    }
    const bool ramp = knots.size() == 2;

    std::vector<Money> grid(observed.begin(), observed.end());
    const int n = std::max(2, grid_points);
    for (int i = 0; i < n; ++i) grid.push_back(lo + (hi - lo) * i / (n - 1));
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    Belief out;
    out.reserve(grid.size());
    std::size_t seg = 0;
    for (Money x : grid) {
        double q;
        if (ramp) {
            q = hi > lo ? (x - lo) / (hi - lo) : 1.0;
            if (side == Side::Sell) q = 1.0 - q;
        } else {
            while (seg + 2 < knots.size() && knots[seg + 1].price < x) ++seg;
            q = smoothstep_between(knots[seg], knots[seg + 1], x);
        }
        out.push_back({x, std::clamp(q, 0.0, 1.0)});
    }
    for (std::size_t i = 1; i < out.size(); ++i) {
        out[i].q = side == Side::Buy ? std::max(out[i].q, out[i - 1].q) : std::min(out[i].q, out[i - 1].q);
    }
    return out;
}

std::optional<Money> gd_shout(const TraderContext& ctx, const Belief& belief) {
    double best = 0.0;
    std::optional<Money> choice;
    auto consider = [&](const BeliefPoint& pt, double surplus) {
        const double e = surplus * pt.q;
        if (e > best + 1e-12 * std::max(1.0, std::abs(best))) {
            best = e;
            choice = pt.price;
        }
    };
    if (ctx.side == Side::Buy) {
        for (const auto& pt : belief) {
            if (pt.price <= ctx.limit) consider(pt, ctx.limit - pt.price);
        }
    } else {
        for (auto it = belief.rbegin(); it != belief.rend(); ++it) {
            if (it->price >= ctx.limit) consider(*it, it->price - ctx.limit);
        }
    }
    return choice;
}

// --------------------------------------------------------------- Kaplan

std::optional<Money> kaplan_price(const TraderContext& ctx, const KaplanParams& p) {
    const Money bid = ctx.quote.bid;
    const Money ask = ctx.quote.ask;
    const Money target = ctx.side == Side::Buy ? ask : bid;
    const Money surplus = ctx.side == Side::Buy ? ctx.limit - target : target - ctx.limit;
    if (!(surplus > 0.0)) return std::nullopt;

    const bool small_spread = ask > 0.0 && (ask - bid) / ask <= p.spread_frac;
    const bool juicy = surplus > p.profit_frac * ctx.limit;
    const int remaining = ctx.rounds_per_day - ctx.round + 1;
    const bool timeout = remaining <= p.time_frac * ctx.rounds_per_day;
    if (!(small_spread || juicy || timeout)) return std::nullopt;
    return ctx.side == Side::Buy ? std::min(target, ctx.limit) : std::max(target, ctx.limit);
}

// -------------------------------------------------------------- traders

namespace {

class TruthTeller final : public Strategy {
public:
    std::string_view name() const override { return "tt"; }
    std::optional<Money> shout(const TraderContext& ctx, Rng&) override { return tt_price(ctx); }
};

class ZiUnconstrained final : public Strategy {
public:
    std::string_view name() const override { return "zi-u"; }
    std::optional<Money> shout(const TraderContext& ctx, Rng& rng) override { return zi_u_price(ctx, rng); }
};

class ZiConstrained final : public Strategy {
public:
    std::string_view name() const override { return "zi-c"; }
    std::optional<Money> shout(const TraderContext& ctx, Rng& rng) override {
        const auto d = zi_c_price(ctx, rng);
        if (d.degenerate && !warned_ && ctx.diagnostics) {
            ctx.diagnostics->push_back("DEGENERATE_RANGE: trader " + std::to_string(ctx.id) +
                                       " limit outside price bounds, clamped");
            warned_ = true;
        }
        return d.price;
    }

private:
    bool warned_ = false;
};

class ZipTrader final : public Strategy {
public:
    explicit ZipTrader(ZipParams p) : params_(p) {}
    std::string_view name() const override { return "zip"; }

    void on_game_start(const TraderContext&, Rng& rng) override { state_ = zip_init(params_, rng); }

    std::optional<Money> shout(const TraderContext& ctx, Rng&) override {
        return zip_price(state_, ctx.side, ctx.limit);
    }

    void on_shout(const MarketEvent& ev, const TraderContext& ctx, Rng& rng) override {
        if (ev.outcome == ShoutOutcome::Traded) return;  // handled by on_transaction
        state_ = zip_update(state_, ctx, ZipObservation{ev.shout.side, ev.shout.price, false}, rng);
    }

    void on_transaction(const Transaction& tx, const TraderContext& ctx, Rng& rng) override {
        state_ = zip_update(state_, ctx, ZipObservation{tx.ask.side, tx.price, true}, rng);
    }

private:
    ZipParams params_;
    ZipState state_;
};

class RothErevTrader final : public Strategy {
public:
    explicit RothErevTrader(ReParams p) : params_(p) {}
    std::string_view name() const override { return "re"; }

    void on_game_start(const TraderContext&, Rng&) override { state_ = re_init(params_); }

    std::optional<Money> shout(const TraderContext& ctx, Rng& rng) override {
        settle();
        const auto c = re_choose(state_, ctx, rng);
        pending_ = c.bin;
        return c.price;
    }

    void on_transaction(const Transaction& tx, const TraderContext& ctx, Rng&) override {
        if (tx.bid.trader == ctx.id) reward_ += ctx.limit - tx.price;
        if (tx.ask.trader == ctx.id) reward_ += tx.price - ctx.limit;
    }

    void on_day_end(const TraderContext&, Rng&) override { settle(); }

private:
    void settle() {
        if (pending_ >= 0) state_ = re_update(std::move(state_), pending_, std::max(0.0, reward_));
        pending_ = -1;
        reward_ = 0.0;
    }

    ReParams params_;
    ReState state_;
    int pending_ = -1;
    Money reward_ = 0.0;
};

class GdTrader final : public Strategy {
public:
    explicit GdTrader(GdParams p) : params_(p) {}
    std::string_view name() const override { return "gd"; }

    std::optional<Money> shout(const TraderContext& ctx, Rng&) override {
        auto window = ctx.history;
        const auto w = static_cast<std::size_t>(std::max(0, params_.window));
        if (window.size() > w) window = window.last(w);
        return gd_shout(ctx, gd_belief(window, ctx.side, ctx.min_price, ctx.max_price, params_.grid_points));
    }

private:
    GdParams params_;
};

class KaplanTrader final : public Strategy {
public:
    explicit KaplanTrader(KaplanParams p) : params_(p) {}
    std::string_view name() const override { return "kaplan"; }
    std::optional<Money> shout(const TraderContext& ctx, Rng&) override { return kaplan_price(ctx, params_); }

private:
    KaplanParams params_;
};

class ParamReader {
public:
    explicit ParamReader(const StrategySpec& spec) : spec_(spec), unused_(spec.params) {}

    double get(const std::string& key, double fallback, double lo, double hi) {
        const auto it = spec_.params.find(key);
        if (it == spec_.params.end()) return fallback;
        unused_.erase(key);
        const double v = it->second;
        if (!(v >= lo && v <= hi)) {
            throw Error(ErrorCode::InvalidArgument, spec_.name + "." + key + " = " + std::to_string(v) +
                                                        " outside [" + std::to_string(lo) + ", " +
                                                        std::to_string(hi) + "]");
        }
        return v;
    }

    void finish() const {
        if (!unused_.empty()) {
            throw Error(ErrorCode::InvalidArgument,
                        "unknown parameter '" + unused_.begin()->first + "' for strategy " + spec_.name);
        }
    }

private:
    const StrategySpec& spec_;
    std::map<std::string, double> unused_;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// Crossed lo/hi pairs are repaired by swapping.
void order(double& lo, double& hi) {
    if (lo > hi) std::swap(lo, hi);
}

}  // namespace

std::vector<std::string> strategy_names() { return {"tt", "zi-u", "zi-c", "zip", "re", "gd", "kaplan"}; }

std::vector<std::string> strategy_param_keys(const std::string& name) {
    if (name == "tt" || name == "zi-u" || name == "zi-c") return {};
    if (name == "zip") return {"beta_lo", "beta_hi", "gamma_lo", "gamma_hi", "margin_lo", "margin_hi", "ca", "cr"};
    if (name == "re") return {"bins", "max_margin", "recency", "experimentation", "initial_propensity"};
    if (name == "gd") return {"window", "grid_points"};
    if (name == "kaplan") return {"spread_frac", "profit_frac", "time_frac"};
    throw Error(ErrorCode::UnknownStrategy, "unknown strategy '" + name + "'");
}

std::unique_ptr<Strategy> make_strategy(const StrategySpec& spec) {
    ParamReader r(spec);
    std::unique_ptr<Strategy> out;
    if (spec.name == "tt") {
        out = std::make_unique<TruthTeller>();
    } else if (spec.name == "zi-u") {
        out = std::make_unique<ZiUnconstrained>();
    } else if (spec.name == "zi-c") {
        out = std::make_unique<ZiConstrained>();
    } else if (spec.name == "zip") {
        ZipParams p;
        p.beta_lo = r.get("beta_lo", p.beta_lo, 0.0, 1.0);
        p.beta_hi = r.get("beta_hi", p.beta_hi, 0.0, 1.0);
        p.gamma_lo = r.get("gamma_lo", p.gamma_lo, 0.0, 1.0);
        p.gamma_hi = r.get("gamma_hi", p.gamma_hi, 0.0, 1.0);
        p.margin_lo = r.get("margin_lo", p.margin_lo, 0.0, 1.0);
        p.margin_hi = r.get("margin_hi", p.margin_hi, 0.0, 1.0);
        p.ca = r.get("ca", p.ca, 0.0, kInf);
        p.cr = r.get("cr", p.cr, 0.0, 1.0);
        order(p.beta_lo, p.beta_hi);
        order(p.gamma_lo, p.gamma_hi);
        order(p.margin_lo, p.margin_hi);
        out = std::make_unique<ZipTrader>(p);
    } else if (spec.name == "re") {
        ReParams p;
        p.bins = static_cast<int>(r.get("bins", p.bins, 1, 1000));
        p.max_margin = r.get("max_margin", p.max_margin, 0.0, 1.0);
        p.recency = r.get("recency", p.recency, 0.0, 0.999999);
        p.experimentation = r.get("experimentation", p.experimentation, 0.0, 0.999999);
        p.initial_propensity = r.get("initial_propensity", p.initial_propensity, 1e-12, kInf);
        out = std::make_unique<RothErevTrader>(p);
    } else if (spec.name == "gd") {
        GdParams p;
        p.window = static_cast<int>(r.get("window", p.window, 1, 100000));
        p.grid_points = static_cast<int>(r.get("grid_points", p.grid_points, 2, 100000));
        out = std::make_unique<GdTrader>(p);
    } else if (spec.name == "kaplan") {
        KaplanParams p;
        p.spread_frac = r.get("spread_frac", p.spread_frac, 0.0, kInf);
        p.profit_frac = r.get("profit_frac", p.profit_frac, 0.0, kInf);
        p.time_frac = r.get("time_frac", p.time_frac, 0.0, 1.0);
        out = std::make_unique<KaplanTrader>(p);
    } else {
        throw Error(ErrorCode::UnknownStrategy, "unknown strategy '" + spec.name + "'");
    }
    r.finish();
    return out;
}

GameLog run_game(const MarketConfig& cfg, const Schedule& schedule, std::span<const StrategySpec> traders,
                 std::uint64_t seed) {
    std::vector<std::unique_ptr<Strategy>> bound;
    bound.reserve(traders.size());
    for (const auto& spec : traders) bound.push_back(make_strategy(spec));
    return run_game(cfg, schedule, std::move(bound), seed);
}

}  // namespace dasim
