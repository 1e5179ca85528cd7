#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dasim/game.hpp"

namespace dasim {

/// Sum over both counterparties of |v - p| (absolute form).
/// Throws Error(UnknownTrader) for ids missing from the schedule.
Money actual_profit(std::span<const Transaction> txs, const Schedule& s);

/// As actual_profit but with signed trader profits (v - p for buyers,
/// p - v for sellers); differs only when loss-making trades occurred.
Money actual_profit_signed(std::span<const Transaction> txs, const Schedule& s);

struct EquilibriumProfit {
    Money total = 0.0;
    Money buyers = 0.0;
    Money sellers = 0.0;
    /// False when the schedule has no crossing (q0 = 0).
    bool defined = false;
};

/// Surplus at p0 of every buyer with v >= p0 and every seller with v <= p0,
/// counted units_per_trader_per_day times.
EquilibriumProfit equilibrium_profit_split(const Schedule& s, int day = 1);
Money equilibrium_profit(const Schedule& s, int day = 1);

/// 100 * pa / pe; absent when pe is not positive.
std::optional<double> allocative_efficiency(Money pa, Money pe);

/// Relative RMS deviation from p0 in percent; absent with no prices or an
/// undefined or non-positive p0.
std::optional<double> convergence_alpha(std::span<const Money> prices, std::optional<Money> p0);

/// RMS of actual minus equilibrium per-trader profit.
/// Throws Error(LengthMismatch).
double profit_dispersion(std::span<const Money> actual, std::span<const Money> equilibrium);

/// Signed profit per trader id over the given transactions.
std::vector<Money> trader_profits(std::span<const Transaction> txs, const Schedule& s);

/// Equilibrium profit per trader id for one day.
std::vector<Money> equilibrium_trader_profits(const Schedule& s, int day = 1);

struct MarketPower {
    std::optional<double> buyers;
    std::optional<double> sellers;
};

/// (Pa_side - Pe_side) / Pe_side with signed side profits; equilibrium
/// profits are summed over days first_day..last_day.
MarketPower market_power(std::span<const Transaction> txs, const Schedule& s, int first_day = 1, int last_day = 1);

struct DayMetrics {
    int day = 1;
    int volume = 0;
    Money pa = 0.0;
    Money pa_signed = 0.0;
    Money pe = 0.0;
    std::optional<Money> p0;
    std::optional<double> ea;
    std::optional<double> ea_signed;
    std::optional<double> alpha;
    double dispersion = 0.0;
    MarketPower power;
};

struct MetricsReport {
    Money pa = 0.0;
    Money pa_signed = 0.0;
    Money pe = 0.0;
    std::optional<double> ea;
    std::optional<double> ea_signed;
    /// Whole-run alpha over every transaction.
    std::optional<double> alpha;
    std::vector<std::optional<double>> alpha_by_day;
    /// Mean of the per-day dispersions.
    double profit_dispersion = 0.0;
    MarketPower market_power;
    std::vector<int> volume_by_day;
    std::vector<DayMetrics> days;
};

MetricsReport compute_metrics(const GameLog& log);

}  // namespace dasim
