#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dasim/strategies.hpp"

namespace dasim::egt {

/// Agent counts per strategy, summing to N.
using Profile = std::vector<int>;

/// All C(N+S-1, S-1) profiles, first strategy's count descending.
std::vector<Profile> enumerate_profiles(int num_strategies, int n_agents);

struct PayoffEntry {
    std::vector<double> mean;    // per strategy; 0 where the count is 0
    std::vector<double> std_error;  // across replications
    int samples = 0;
};

/// Heuristic payoff matrix over count profiles of a symmetric game.
class HeuristicGame {
public:
    HeuristicGame() = default;
    HeuristicGame(std::vector<std::string> strategies, int n_agents);

    const std::vector<std::string>& strategies() const noexcept { return strategies_; }
    std::size_t num_strategies() const noexcept { return strategies_.size(); }
    int n_agents() const noexcept { return n_agents_; }
    const std::map<Profile, PayoffEntry>& entries() const noexcept { return entries_; }

    /// Throws Error(InvalidArgument) if the profile is malformed.
    void set(const Profile& p, PayoffEntry e);
    const PayoffEntry* find(const Profile& p) const;

    /// Throws Error(MissingProfile) when absent or when strategy i has no
    /// agent in p.
    double payoff(const Profile& p, std::size_t i) const;
    double payoff_stderr(const Profile& p, std::size_t i) const;

    bool complete() const;

private:
    void check_profile(const Profile& p) const;

    std::vector<std::string> strategies_;
    int n_agents_ = 0;
    std::map<Profile, PayoffEntry> entries_;
};

/// Seat assignment for one game: strategy index per trader id (buyers
/// first). Each strategy's agents are split between the two sides as
/// evenly as the counts allow; odd remainders and seat order are drawn
/// from `rng`.
std::vector<int> assign_roles(const Profile& p, std::size_t n_buyers, std::size_t n_sellers, Rng& rng);

/// Mean per-agent trading profit of each strategy over `reps` games.
/// Throws Error(InvalidArgument) if the schedule size differs from the
/// profile total or reps < 1.
PayoffEntry estimate_payoffs(const Profile& p, const std::vector<StrategySpec>& strategies,
                             const MarketConfig& cfg, const Schedule& schedule, int reps, std::uint64_t seed);

struct BuildOptions {
    int reps = 100;
    std::uint64_t seed = 0;
    int jobs = 1;
};

/// Estimates every profile; profile k uses seed derive_seed(seed, k).
HeuristicGame build_game(const std::vector<std::string>& names, const std::vector<StrategySpec>& strategies,
                         int n_agents, const MarketConfig& cfg, const Schedule& schedule,
                         const BuildOptions& opts);

using Mixture = std::vector<double>;

/// Expected payoff of one agent playing i when the other N-1 agents are
/// drawn i.i.d. from x.
double mixture_payoff(const HeuristicGame& g, std::size_t i, const Mixture& x);

/// Standard error of mixture_payoff from the per-profile standard errors.
double mixture_payoff_stderr(const HeuristicGame& g, std::size_t i, const Mixture& x);

/// Replicator velocity x_i (u_i - u_bar).
std::vector<double> replicator_velocity(const HeuristicGame& g, const Mixture& x);

struct FlowOptions {
    double dt = 0.01;
    int max_steps = 100000;
    double tol = 1e-8;
    int sample_every = 10;

    friend bool operator==(const FlowOptions&, const FlowOptions&) = default;
};

struct FlowResult {
    Mixture terminal;
    std::vector<Mixture> trajectory;
    bool converged = false;
    int steps = 0;
    std::optional<int> classified_attractor;
    /// Largest |sum(x) - 1| or negative component seen before renormalizing.
    double max_drift = 0.0;
};

/// Fixed-step RK4 integration of the replicator equation from x0.
FlowResult replicator_flow(const HeuristicGame& g, const Mixture& x0, const FlowOptions& opts = {});

struct Attractor {
    Mixture point;
    double basin = 0.0;
    int count = 0;
    bool verified_ne = false;
};

struct EquilibriumSearch {
    std::vector<Attractor> attractors;
    int unclassified = 0;
    double unclassified_fraction = 0.0;
    std::vector<FlowResult> flows;
};

/// Uniform draw from the simplex.
Mixture sample_simplex(std::size_t n, Rng& rng);

/// Flows from n_starts uniform starts, terminals clustered within L-inf
/// 1e-3. Non-converged flows count as unclassified.
EquilibriumSearch find_equilibria(const HeuristicGame& g, int n_starts, std::uint64_t seed,
                                  const FlowOptions& opts = {});

/// Nash check on the estimated game: support payoffs equal and no
/// off-support strategy better, each within 2 standard errors.
bool is_equilibrium(const HeuristicGame& g, const Mixture& x, double support_threshold = 1e-4);

/// Moves `delta` of payoff from strategy `from` to `to` in every profile
/// where both are present.
HeuristicGame perturb(const HeuristicGame& g, std::size_t from, std::size_t to, double delta);

}  // namespace dasim::egt
