#include "dasim/metrics.hpp"

#include <cmath>
#include <string>

namespace dasim {

namespace {

void check_trader(const Schedule& s, TraderId id) {
    if (!s.has_trader(id)) {
        throw Error(ErrorCode::UnknownTrader, "transaction references trader " + std::to_string(id));
    }
}

struct SideProfits {
    Money buyers = 0.0;
    Money sellers = 0.0;
};

SideProfits signed_side_profits(std::span<const Transaction> txs, const Schedule& s) {
    SideProfits out;
    for (const auto& t : txs) {
        check_trader(s, t.bid.trader);
        check_trader(s, t.ask.trader);
        out.buyers += s.value_of(t.bid.trader, t.time.day) - t.price;
        out.sellers += t.price - s.value_of(t.ask.trader, t.time.day);
    }
    return out;
}

}  // namespace

Money actual_profit(std::span<const Transaction> txs, const Schedule& s) {
    Money total = 0.0;
    for (const auto& t : txs) {
        check_trader(s, t.bid.trader);
        check_trader(s, t.ask.trader);
        total += std::abs(s.value_of(t.bid.trader, t.time.day) - t.price);
        total += std::abs(s.value_of(t.ask.trader, t.time.day) - t.price);
    }
    return total;
}

Money actual_profit_signed(std::span<const Transaction> txs, const Schedule& s) {
    const auto p = signed_side_profits(txs, s);
    return p.buyers + p.sellers;
}

EquilibriumProfit equilibrium_profit_split(const Schedule& s, int day) {
    EquilibriumProfit out;
    const auto eq = compute_equilibrium(s, day);
    if (eq.q0 == 0 || !eq.p0) return out;
    const Money p0 = *eq.p0;
    const Schedule d = s.for_day(day);
    const double units = d.units_per_trader_per_day;
    for (Money v : d.buyer_values) {
        if (v >= p0) out.buyers += units * (v - p0);
    }
    for (Money v : d.seller_values) {
        if (v <= p0) out.sellers += units * (p0 - v);
    }
    out.total = out.buyers + out.sellers;
    out.defined = true;
    return out;
}

Money equilibrium_profit(const Schedule& s, int day) { return equilibrium_profit_split(s, day).total; }

std::optional<double> allocative_efficiency(Money pa, Money pe) {
    if (!(pe > 0.0)) return std::nullopt;
    return 100.0 * pa / pe;
}

std::optional<double> convergence_alpha(std::span<const Money> prices, std::optional<Money> p0) {
    if (prices.empty() || !p0 || !(*p0 > 0.0)) return std::nullopt;
    double sum = 0.0;
    for (Money p : prices) sum += (p - *p0) * (p - *p0);
    return 100.0 / *p0 * std::sqrt(sum / static_cast<double>(prices.size()));
}

double profit_dispersion(std::span<const Money> actual, std::span<const Money> equilibrium) {
    if (actual.size() != equilibrium.size()) {
        throw Error(ErrorCode::LengthMismatch, std::to_string(actual.size()) + " actual vs " +
                                                   std::to_string(equilibrium.size()) + " equilibrium profits");
    }
    if (actual.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double d = actual[i] - equilibrium[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(actual.size()));
}

std::vector<Money> trader_profits(std::span<const Transaction> txs, const Schedule& s) {
    std::vector<Money> out(s.num_traders(), 0.0);
    for (const auto& t : txs) {
        check_trader(s, t.bid.trader);
        check_trader(s, t.ask.trader);
        out[static_cast<std::size_t>(t.bid.trader)] += s.value_of(t.bid.trader, t.time.day) - t.price;
        out[static_cast<std::size_t>(t.ask.trader)] += t.price - s.value_of(t.ask.trader, t.time.day);
    }
    return out;
}

std::vector<Money> equilibrium_trader_profits(const Schedule& s, int day) {
    std::vector<Money> out(s.num_traders(), 0.0);
    const auto eq = compute_equilibrium(s, day);
    if (eq.q0 == 0 || !eq.p0) return out;
    const Money p0 = *eq.p0;
    const Schedule d = s.for_day(day);
    const double units = d.units_per_trader_per_day;
    for (std::size_t i = 0; i < d.num_buyers(); ++i) {
        if (d.buyer_values[i] >= p0) out[i] = units * (d.buyer_values[i] - p0);
    }
    for (std::size_t j = 0; j < d.num_sellers(); ++j) {
        if (d.seller_values[j] <= p0) out[d.num_buyers() + j] = units * (p0 - d.seller_values[j]);
    }
    return out;
}

MarketPower market_power(std::span<const Transaction> txs, const Schedule& s, int first_day, int last_day) {
    const auto actual = signed_side_profits(txs, s);
    Money pe_b = 0.0;
    Money pe_s = 0.0;
    for (int d = first_day; d <= last_day; ++d) {
        const auto pe = equilibrium_profit_split(s, d);
        pe_b += pe.buyers;
        pe_s += pe.sellers;
    }
    MarketPower mp;
    if (pe_b > 0.0) mp.buyers = (actual.buyers - pe_b) / pe_b;
    if (pe_s > 0.0) mp.sellers = (actual.sellers - pe_s) / pe_s;
    return mp;
}

MetricsReport compute_metrics(const GameLog& log) {
    MetricsReport r;
    const Schedule& s = log.schedule;
    const int days = log.config.days;

    std::vector<double> rel_sq;  // squared relative deviations, for the whole-run alpha
    std::vector<Money> all_prices;
    std::optional<Money> common_p0;
    bool p0_constant = true;
    bool p0_all_defined = true;
    double dispersion_sum = 0.0;

    for (int d = 1; d <= days; ++d) {
        const auto txs = log.transactions_on_day(d);
        DayMetrics m;
        m.day = d;
        m.volume = static_cast<int>(txs.size());
        m.pa = actual_profit(txs, s);
        m.pa_signed = actual_profit_signed(txs, s);
        const auto pe = equilibrium_profit_split(s, d);
        m.pe = pe.total;
        m.p0 = compute_equilibrium(s, d).p0;
        m.ea = allocative_efficiency(m.pa, m.pe);
        m.ea_signed = allocative_efficiency(m.pa_signed, m.pe);
        std::vector<Money> prices;
        prices.reserve(txs.size());
        for (const auto& t : txs) prices.push_back(t.price);
        m.alpha = convergence_alpha(prices, m.p0);
        m.dispersion = profit_dispersion(trader_profits(txs, s), equilibrium_trader_profits(s, d));
        m.power = market_power(txs, s, d, d);

        if (d == 1) {
            common_p0 = m.p0;
        } else if (m.p0 != common_p0) {
            p0_constant = false;
        }
        if (!m.p0 || !(*m.p0 > 0.0)) {
            p0_all_defined = false;
        } else {
            for (Money p : prices) rel_sq.push_back(((p - *m.p0) / *m.p0) * ((p - *m.p0) / *m.p0));
        }
        all_prices.insert(all_prices.end(), prices.begin(), prices.end());

        r.pa += m.pa;
        r.pa_signed += m.pa_signed;
        r.pe += m.pe;
        r.alpha_by_day.push_back(m.alpha);
        r.volume_by_day.push_back(m.volume);
        dispersion_sum += m.dispersion;
        r.days.push_back(std::move(m));
    }

    r.ea = allocative_efficiency(r.pa, r.pe);
    r.ea_signed = allocative_efficiency(r.pa_signed, r.pe);
    if (p0_constant) {
        r.alpha = convergence_alpha(all_prices, common_p0);
    } else if (p0_all_defined && !rel_sq.empty()) {
        double sum = 0.0;
        for (double x : rel_sq) sum += x;
        r.alpha = 100.0 * std::sqrt(sum / static_cast<double>(rel_sq.size()));
    }
    r.profit_dispersion = days > 0 ? dispersion_sum / days : 0.0;
    r.market_power = market_power(log.transactions, s, 1, days);
    return r;
}

}  // namespace dasim
