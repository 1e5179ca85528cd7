#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dasim/game.hpp"

namespace dasim {

// ------------------------------------------------------------ stateless

/// Truth-telling: shout the private value.
Money tt_price(const TraderContext& ctx);

/// Uniform on [min_price, max_price), ignoring the private value.
Money zi_u_price(const TraderContext& ctx, Rng& rng);

struct ZiCDraw {
    Money price = 0.0;
    /// The limit was outside [min_price, max_price] and has been clamped.
    bool degenerate = false;
};

/// Buyers draw on (min_price, limit], sellers on [limit, max_price).
ZiCDraw zi_c_price(const TraderContext& ctx, Rng& rng);

// ------------------------------------------------------------------ ZIP

struct ZipState {
    double margin = 0.0;    // >= 0; price is limit*(1+m) for sellers, limit*(1-m) for buyers
    double momentum = 0.0;  // carried price change
    double beta = 0.3;
    double gamma = 0.05;
    Money ca = 0.05;
    double cr = 0.05;
};

struct ZipParams {
    double beta_lo = 0.1, beta_hi = 0.5;
    double gamma_lo = 0.0, gamma_hi = 0.1;
    double margin_lo = 0.05, margin_hi = 0.35;
    Money ca = 0.05;
    double cr = 0.05;
};

/// Draws beta, gamma and the initial margin uniformly from their ranges.
ZipState zip_init(const ZipParams& p, Rng& rng);

Money zip_price(const ZipState& s, Side side, Money limit);

/// One Widrow-Hoff step with momentum towards `target`, then recomputes
/// the margin and clamps it to the no-loss side of `limit`.
ZipState zip_apply_target(ZipState s, Side side, Money limit, Money target);

/// A market observation as ZIP sees it: the last shout and whether it
/// was accepted (at `price` when accepted).
struct ZipObservation {
    Side shout_side = Side::Buy;
    Money price = 0.0;
    bool accepted = false;
};

enum class PriceMove { None, Raise, Lower };

/// Which way the subject's shout price should move after `obs`.
PriceMove zip_direction(Side side, Money current_price, const ZipObservation& obs);

/// Target price R*q + A for the given move; R and A are drawn from the
/// perturbation ranges set by cr and ca.
Money zip_target(const ZipState& s, PriceMove move, Money q, Rng& rng);

ZipState zip_update(const ZipState& s, const TraderContext& ctx, const ZipObservation& obs, Rng& rng);

// ------------------------------------------------------------------- RE

struct ReParams {
    int bins = 8;
    double max_margin = 0.4;
    double recency = 0.1;
    double experimentation = 0.2;
    double initial_propensity = 1.0;
};

struct ReState {
    std::vector<double> propensities;
    double recency = 0.1;
    double experimentation = 0.2;
    double max_margin = 0.4;
};

ReState re_init(const ReParams& p);

/// Margin of bin k out of K: max_margin * (k + 1) / K.
double re_bin_margin(const ReState& s, int bin);

struct ReChoice {
    int bin = 0;
    Money price = 0.0;
};

ReChoice re_choose(const ReState& s, const TraderContext& ctx, Rng& rng);

/// Roth-Erev propensity update for the bin played last.
ReState re_update(ReState s, int chosen, Money reward);

// ------------------------------------------------------------------- GD

struct BeliefPoint {
    Money price = 0.0;
    double q = 0.0;
};

/// Acceptance probability on a price grid, sorted by price.
using Belief = std::vector<BeliefPoint>;

struct GdParams {
    int window = 30;
    int grid_points = 64;
};

/// Acceptance-probability belief built from the last shouts. The grid is
/// the observed prices plus grid_points uniform points in [lo, hi].
Belief gd_belief(std::span<const ShoutRecord> window, Side side, Money lo, Money hi, int grid_points = 64);

/// Expected-profit maximizing shout over the belief grid, or nullopt if no
/// price has positive expected profit.
std::optional<Money> gd_shout(const TraderContext& ctx, const Belief& belief);

// --------------------------------------------------------------- Kaplan

struct KaplanParams {
    double spread_frac = 0.1;
    double profit_frac = 0.02;
    double time_frac = 0.1;
};

std::optional<Money> kaplan_price(const TraderContext& ctx, const KaplanParams& p);

// -------------------------------------------------------------- factory

struct StrategySpec {
    std::string name;
    std::map<std::string, double> params;

    friend bool operator==(const StrategySpec&, const StrategySpec&) = default;
};

/// Known strategy names: tt, zi-u, zi-c, zip, re, gd, kaplan.
std::vector<std::string> strategy_names();

/// Parameter keys accepted by a strategy; throws Error(UnknownStrategy).
std::vector<std::string> strategy_param_keys(const std::string& name);

/// Throws Error(UnknownStrategy) or Error(InvalidArgument) for unknown
/// parameter keys or out-of-range values.
std::unique_ptr<Strategy> make_strategy(const StrategySpec& spec);

/// run_game with one spec per trader id (buyers first).
GameLog run_game(const MarketConfig& cfg, const Schedule& schedule, std::span<const StrategySpec> traders,
                 std::uint64_t seed);

}  // namespace dasim
