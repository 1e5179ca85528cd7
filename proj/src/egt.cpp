#include "dasim/egt.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>

#include "dasim/metrics.hpp"
#include "dasim/parallel.hpp"

namespace dasim::egt {

// ------------------------------------------------------------- profiles

namespace {

void compositions(int remaining, std::size_t slot, Profile& cur, std::vector<Profile>& out) {
    if (slot + 1 == cur.size()) {
        cur[slot] = remaining;
        out.push_back(cur);
        return;
    }
    for (int c = remaining; c >= 0; --c) {
        cur[slot] = c;
        compositions(remaining - c, slot + 1, cur, out);
    }
}

}  // namespace

std::vector<Profile> enumerate_profiles(int num_strategies, int n_agents) {
    if (num_strategies < 1 || n_agents < 0) {
        throw Error(ErrorCode::InvalidArgument, "need at least one strategy and a non-negative agent count");
    }
    std::vector<Profile> out;
    Profile cur(static_cast<std::size_t>(num_strategies), 0);
    compositions(n_agents, 0, cur, out);
    return out;
}

// -------------------------------------------------------- HeuristicGame

HeuristicGame::HeuristicGame(std::vector<std::string> strategies, int n_agents)
    : strategies_(std::move(strategies)), n_agents_(n_agents) {
    if (strategies_.empty()) throw Error(ErrorCode::InvalidArgument, "heuristic game needs a strategy");
    if (n_agents_ < 1) throw Error(ErrorCode::InvalidArgument, "heuristic game needs at least one agent");
}

void HeuristicGame::check_profile(const Profile& p) const {
    if (p.size() != strategies_.size()) {
        throw Error(ErrorCode::InvalidArgument, "profile has " + std::to_string(p.size()) + " counts for " +
                                                    std::to_string(strategies_.size()) + " strategies");
    }
    int total = 0;
    for (int c : p) {
        if (c < 0) throw Error(ErrorCode::InvalidArgument, "negative count in profile");
        total += c;
    }
    if (total != n_agents_) {
        throw Error(ErrorCode::InvalidArgument, "profile sums to " + std::to_string(total) + ", expected " +
                                                    std::to_string(n_agents_));
    }
}

void HeuristicGame::set(const Profile& p, PayoffEntry e) {
    check_profile(p);
    const std::size_t s = strategies_.size();
    e.mean.resize(s, 0.0);
    e.std_error.resize(s, 0.0);
    entries_[p] = std::move(e);
}

const PayoffEntry* HeuristicGame::find(const Profile& p) const {
    const auto it = entries_.find(p);
    return it == entries_.end() ? nullptr : &it->second;
}

namespace {

std::string profile_string(const Profile& p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(p[i]);
    }
    return s + ")";
}

}  // namespace

double HeuristicGame::payoff(const Profile& p, std::size_t i) const {
    const auto* e = find(p);
    if (!e || i >= p.size() || p[i] == 0) {
        throw Error(ErrorCode::MissingProfile, "no payoff for strategy " + std::to_string(i) + " at " +
                                                   profile_string(p));
    }
    return e->mean[i];
}

double HeuristicGame::payoff_stderr(const Profile& p, std::size_t i) const {
    const auto* e = find(p);
    if (!e || i >= p.size() || p[i] == 0) {
        throw Error(ErrorCode::MissingProfile, "no payoff for strategy " + std::to_string(i) + " at " +
                                                   profile_string(p));
    }
    return e->std_error[i];
}

bool HeuristicGame::complete() const {
    for (const auto& p : enumerate_profiles(static_cast<int>(strategies_.size()), n_agents_)) {
        if (!find(p)) return false;
    }
    return true;
}

// ---------------------------------------------------------- estimation

std::vector<int> assign_roles(const Profile& p, std::size_t n_buyers, std::size_t n_sellers, Rng& rng) {
    std::vector<int> buyers;
    std::vector<int> sellers;
    std::vector<int> leftovers;
    for (std::size_t s = 0; s < p.size(); ++s) {
        const int half = p[s] / 2;
        buyers.insert(buyers.end(), static_cast<std::size_t>(half), static_cast<int>(s));
        sellers.insert(sellers.end(), static_cast<std::size_t>(half), static_cast<int>(s));
        if (p[s] % 2) leftovers.push_back(static_cast<int>(s));
    }
    shuffle(leftovers, rng);
    bool to_buyers = rng.bernoulli(0.5);
    for (int s : leftovers) {
        if (buyers.size() >= n_buyers) to_buyers = false;
        if (sellers.size() >= n_sellers) to_buyers = true;
        (to_buyers ? buyers : sellers).push_back(s);
        to_buyers = !to_buyers;
    }
    // Unequal side sizes: move random agents off the overfull side.
    auto rebalance = [&](std::vector<int>& from, std::vector<int>& to, std::size_t to_cap) {
        while (to.size() < to_cap && !from.empty()) {
            shuffle(from, rng);
            to.push_back(from.back());
            from.pop_back();
        }
    };
    rebalance(buyers, sellers, n_sellers);
    rebalance(sellers, buyers, n_buyers);
    shuffle(buyers, rng);
    shuffle(sellers, rng);
    std::vector<int> out;
    out.reserve(n_buyers + n_sellers);
    out.insert(out.end(), buyers.begin(), buyers.end());
    out.insert(out.end(), sellers.begin(), sellers.end());
    return out;
}

PayoffEntry estimate_payoffs(const Profile& p, const std::vector<StrategySpec>& strategies,
                             const MarketConfig& cfg, const Schedule& schedule, int reps, std::uint64_t seed) {
    if (reps < 1) throw Error(ErrorCode::InvalidArgument, "reps must be >= 1");
    if (p.size() != strategies.size()) throw Error(ErrorCode::InvalidArgument, "profile/strategy size mismatch");
    const int n = std::accumulate(p.begin(), p.end(), 0);
    if (static_cast<std::size_t>(n) != schedule.num_traders()) {
        throw Error(ErrorCode::InvalidArgument, "profile has " + std::to_string(n) + " agents but the schedule has " +
                                                    std::to_string(schedule.num_traders()) + " traders");
    }
    const std::size_t s = p.size();
    std::vector<double> sum(s, 0.0);
    std::vector<double> sum_sq(s, 0.0);

    for (int r = 0; r < reps; ++r) {
        const std::uint64_t game_seed = derive_seed(seed, static_cast<std::uint64_t>(r));
        Rng seat_rng(derive_seed(game_seed, 0xA551'6E00ULL));
        const auto seats = assign_roles(p, schedule.num_buyers(), schedule.num_sellers(), seat_rng);
        std::vector<StrategySpec> bound;
        bound.reserve(seats.size());
        for (int k : seats) bound.push_back(strategies[static_cast<std::size_t>(k)]);
        const auto log = run_game(cfg, schedule, bound, game_seed);
        const auto profits = trader_profits(log.transactions, schedule);

        std::vector<double> per(s, 0.0);
        for (std::size_t t = 0; t < seats.size(); ++t) per[static_cast<std::size_t>(seats[t])] += profits[t];
        for (std::size_t k = 0; k < s; ++k) {
            if (p[k] == 0) continue;
            const double m = per[k] / p[k];
            sum[k] += m;
            sum_sq[k] += m * m;
        }
    }

    PayoffEntry e;
    e.samples = reps;
    e.mean.assign(s, 0.0);
    e.std_error.assign(s, 0.0);
    for (std::size_t k = 0; k < s; ++k) {
        if (p[k] == 0) continue;
        const double mean = sum[k] / reps;
        e.mean[k] = mean;
        if (reps > 1) {
            const double var = std::max(0.0, (sum_sq[k] - reps * mean * mean) / (reps - 1));
            e.std_error[k] = std::sqrt(var / reps);
        }
    }
    return e;
}

HeuristicGame build_game(const std::vector<std::string>& names, const std::vector<StrategySpec>& strategies,
                         int n_agents, const MarketConfig& cfg, const Schedule& schedule,
                         const BuildOptions& opts) {
    HeuristicGame g(names, n_agents);
    const auto profiles = enumerate_profiles(static_cast<int>(names.size()), n_agents);
    std::vector<PayoffEntry> results(profiles.size());
    parallel_for(profiles.size(), opts.jobs, [&](std::size_t k) {
        try {
            results[k] = estimate_payoffs(profiles[k], strategies, cfg, schedule, opts.reps,
                                          derive_seed(opts.seed, k));
        } catch (const Error& e) {
            throw Error(e.code(), std::string("profile ") + profile_string(profiles[k]) + ": " + e.what());
        }
    });
    for (std::size_t k = 0; k < profiles.size(); ++k) g.set(profiles[k], std::move(results[k]));
    return g;
}

// ------------------------------------------------------ mixture payoffs

namespace {

/// Expected payoffs as polynomials in x, expanded once per game.
class MixtureEvaluator {
public:
    explicit MixtureEvaluator(const HeuristicGame& g) : s_(g.num_strategies()), n_(g.n_agents()) {
        const auto opponents = enumerate_profiles(static_cast<int>(s_), n_ - 1);
        std::vector<double> log_fact(static_cast<std::size_t>(n_) + 1, 0.0);
        for (int k = 2; k <= n_; ++k) log_fact[static_cast<std::size_t>(k)] = log_fact[k - 1] + std::log(k);
        terms_.resize(s_);
        for (std::size_t i = 0; i < s_; ++i) {
            for (const auto& opp : opponents) {
                double lc = log_fact[static_cast<std::size_t>(n_ - 1)];
                for (int c : opp) lc -= log_fact[static_cast<std::size_t>(c)];
                Profile full = opp;
                ++full[i];
                terms_[i].push_back(Term{opp, std::exp(lc), g.payoff(full, i), g.payoff_stderr(full, i)});
            }
        }
    }

    double payoff(std::size_t i, const Mixture& x) const { return eval(i, x, false); }
    double stderr_of(std::size_t i, const Mixture& x) const { return std::sqrt(eval(i, x, true)); }

    std::vector<double> velocity(const Mixture& x) const {
        std::vector<double> u(s_);
        double mean = 0.0;
        for (std::size_t i = 0; i < s_; ++i) {
            u[i] = payoff(i, x);
            mean += x[i] * u[i];
        }
        for (std::size_t i = 0; i < s_; ++i) u[i] = x[i] * (u[i] - mean);
        return u;
    }

private:
    struct Term {
        Profile counts;
        double coeff;
        double payoff;
        double se;
    };

    double eval(std::size_t i, const Mixture& x, bool variance) const {
        // powers[j][c] = x_j^c
        std::vector<std::vector<double>> powers(s_, std::vector<double>(static_cast<std::size_t>(n_), 1.0));
        for (std::size_t j = 0; j < s_; ++j) {
            for (int c = 1; c < n_; ++c) powers[j][static_cast<std::size_t>(c)] = powers[j][c - 1] * x[j];
        }
        double total = 0.0;
        for (const auto& t : terms_[i]) {
            double w = t.coeff;
            for (std::size_t j = 0; j < s_; ++j) w *= powers[j][static_cast<std::size_t>(t.counts[j])];
            total += variance ? w * w * t.se * t.se : w * t.payoff;
        }
        return total;
    }

    std::size_t s_;
    int n_;
    std::vector<std::vector<Term>> terms_;
};

void check_mixture(const HeuristicGame& g, const Mixture& x) {
    if (x.size() != g.num_strategies()) {
        throw Error(ErrorCode::InvalidArgument, "mixture has " + std::to_string(x.size()) + " entries for " +
                                                    std::to_string(g.num_strategies()) + " strategies");
    }
}

}  // namespace

double mixture_payoff(const HeuristicGame& g, std::size_t i, const Mixture& x) {
    check_mixture(g, x);
    return MixtureEvaluator(g).payoff(i, x);
}

double mixture_payoff_stderr(const HeuristicGame& g, std::size_t i, const Mixture& x) {
    check_mixture(g, x);
    return MixtureEvaluator(g).stderr_of(i, x);
}

std::vector<double> replicator_velocity(const HeuristicGame& g, const Mixture& x) {
    check_mixture(g, x);
    return MixtureEvaluator(g).velocity(x);
}

// ----------------------------------------------------------------- flows

namespace {

double linf(const std::vector<double>& v) {
    double m = 0.0;
    for (double a : v) m = std::max(m, std::abs(a));
    return m;
}

FlowResult flow_with(const MixtureEvaluator& ev, const Mixture& x0, const FlowOptions& opts) {
    FlowResult r;
    Mixture x = x0;
    const std::size_t s = x.size();
    r.trajectory.push_back(x);
    auto axpy = [s](const Mixture& a, const std::vector<double>& d, double h) {
        Mixture out(s);
        for (std::size_t i = 0; i < s; ++i) out[i] = a[i] + h * d[i];
        return out;
    };
    const double h = opts.dt;
    for (int step = 0; step < opts.max_steps; ++step) {
        const auto k1 = ev.velocity(x);
        if (linf(k1) < opts.tol) {
            r.converged = true;
            break;
        }
        const auto k2 = ev.velocity(axpy(x, k1, h / 2));
        const auto k3 = ev.velocity(axpy(x, k2, h / 2));
        const auto k4 = ev.velocity(axpy(x, k3, h));
        double sum = 0.0;
        for (std::size_t i = 0; i < s; ++i) {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if (x[i] < 0.0) {
                r.max_drift = std::max(r.max_drift, -x[i]);
                x[i] = 0.0;
            }
            sum += x[i];
        }
        const double drift = std::abs(sum - 1.0);
        r.max_drift = std::max(r.max_drift, drift);
        if (drift > 1e-12) {
            for (double& v : x) v /= sum;
        }
        r.steps = step + 1;
        if (opts.sample_every > 0 && r.steps % opts.sample_every == 0) r.trajectory.push_back(x);
    }
    if (r.trajectory.back() != x) r.trajectory.push_back(x);
    r.terminal = std::move(x);
    return r;
}

bool equilibrium_with(const MixtureEvaluator& ev, const Mixture& x, double support_threshold) {
    const std::size_t s = x.size();
    std::vector<double> u(s);
    std::vector<double> se(s);
    double best_support = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s; ++i) {
        u[i] = ev.payoff(i, x);
        se[i] = ev.stderr_of(i, x);
        if (x[i] > support_threshold) best_support = std::max(best_support, u[i]);
    }
    constexpr double slack = 1e-6;
    for (std::size_t i = 0; i < s; ++i) {
        const double band = 2.0 * se[i] + slack * std::max(1.0, std::abs(best_support));
        if (x[i] > support_threshold) {
            if (best_support - u[i] > band) return false;
        } else if (u[i] > best_support + band) {
            return false;
        }
    }
    return true;
}

}  // namespace

FlowResult replicator_flow(const HeuristicGame& g, const Mixture& x0, const FlowOptions& opts) {
    check_mixture(g, x0);
    return flow_with(MixtureEvaluator(g), x0, opts);
}

Mixture sample_simplex(std::size_t n, Rng& rng) {
    Mixture x(n);
    double sum = 0.0;
    for (double& v : x) {
        v = rng.exponential();
        sum += v;
    }
    for (double& v : x) v /= sum;
    return x;
}

bool is_equilibrium(const HeuristicGame& g, const Mixture& x, double support_threshold) {
    check_mixture(g, x);
    return equilibrium_with(MixtureEvaluator(g), x, support_threshold);
}

EquilibriumSearch find_equilibria(const HeuristicGame& g, int n_starts, std::uint64_t seed, const FlowOptions& opts) {
    if (n_starts < 1) throw Error(ErrorCode::InvalidArgument, "n_starts must be >= 1");
    const MixtureEvaluator ev(g);
    Rng rng(seed);
    EquilibriumSearch out;
    constexpr double cluster_radius = 1e-3;
    for (int k = 0; k < n_starts; ++k) {
        auto flow = flow_with(ev, sample_simplex(g.num_strategies(), rng), opts);
        if (flow.converged) {
            std::optional<int> match;
            for (std::size_t a = 0; a < out.attractors.size() && !match; ++a) {
                double d = 0.0;
                for (std::size_t i = 0; i < flow.terminal.size(); ++i) {
                    d = std::max(d, std::abs(flow.terminal[i] - out.attractors[a].point[i]));
                }
                if (d <= cluster_radius) match = static_cast<int>(a);
            }
            if (!match) {
                out.attractors.push_back(Attractor{flow.terminal, 0.0, 0, false});
                match = static_cast<int>(out.attractors.size() - 1);
            }
            ++out.attractors[static_cast<std::size_t>(*match)].count;
            flow.classified_attractor = match;
        } else {
            ++out.unclassified;
        }
        out.flows.push_back(std::move(flow));
    }
    for (auto& a : out.attractors) {
        a.basin = static_cast<double>(a.count) / n_starts;
        a.verified_ne = equilibrium_with(ev, a.point, 1e-4);
    }
    out.unclassified_fraction = static_cast<double>(out.unclassified) / n_starts;
    return out;
}

HeuristicGame perturb(const HeuristicGame& g, std::size_t from, std::size_t to, double delta) {
    if (delta < 0.0) throw Error(ErrorCode::InvalidArgument, "perturbation delta must be >= 0");
    if (from >= g.num_strategies() || to >= g.num_strategies()) {
        throw Error(ErrorCode::InvalidArgument, "perturbation strategy index out of range");
    }
    HeuristicGame out(g.strategies(), g.n_agents());
    for (const auto& [p, e] : g.entries()) {
        PayoffEntry moved = e;
        if (from != to && p[from] > 0 && p[to] > 0) {
            moved.mean[from] -= delta;
            moved.mean[to] += delta;
        }
        out.set(p, std::move(moved));
    }
    return out;
}

}  // namespace dasim::egt
