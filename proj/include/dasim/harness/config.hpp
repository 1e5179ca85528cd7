#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dasim/egt.hpp"
#include "dasim/market.hpp"
#include "dasim/optimizer.hpp"
#include "dasim/strategies.hpp"

namespace dasim::harness {

/// Config failure carrying either the source line (parse errors) or the
/// dotted key path (validation errors).
class ConfigError : public Error {
public:
    ConfigError(ErrorCode code, std::optional<int> line, std::string path, const std::string& message);

    std::optional<int> line() const noexcept { return line_; }
    const std::string& path() const noexcept { return path_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::optional<int> line_;
    std::string path_;
    std::string message_;
};

enum class SeatSide { Buy, Sell, Both };

/// `count` traders per side in `side` (Both fills count buyers and count
/// sellers) playing `strategy`.
struct TraderGroup {
    StrategySpec strategy;
    int count = 1;
    SeatSide side = SeatSide::Both;

    friend bool operator==(const TraderGroup&, const TraderGroup&) = default;
};

struct NamedStrategy {
    std::string label;
    StrategySpec spec;

    friend bool operator==(const NamedStrategy&, const NamedStrategy&) = default;
};

struct EgtSettings {
    std::vector<NamedStrategy> strategies;
    int agents = 6;
    int reps = 50;
    int starts = 200;
    egt::FlowOptions flow;

    friend bool operator==(const EgtSettings&, const EgtSettings&) = default;
};

enum class EvolveTarget { Zip, Mechanism, Basin };

struct EvolveSettings {
    EvolveTarget target = EvolveTarget::Zip;
    opt::Objective objective = opt::Objective::Alpha;
    opt::MechanismParam param = opt::MechanismParam::Qs;
    opt::GaConfig ga;
    /// Rival strategies for the basin target.
    std::vector<NamedStrategy> rivals;
    int agents = 6;
    int reps = 20;
    int starts = 200;

    friend bool operator==(const EvolveSettings&, const EvolveSettings&) = default;
};

struct AdaptSettings {
    opt::MechanismParam param = opt::MechanismParam::Qs;
    std::vector<double> arms{0.1, 0.3, 0.5, 0.7, 0.9};
    double epsilon = 0.1;
    int pulls = 100;

    friend bool operator==(const AdaptSettings&, const AdaptSettings&) = default;
};

struct Outputs {
    bool transactions = true;
    bool metrics = true;
    bool evolution = true;
    bool egt = true;
    bool svg = false;
    bool events = false;

    friend bool operator==(const Outputs&, const Outputs&) = default;
};

struct ExperimentConfig {
    MarketConfig market;
    Schedule schedule;
    std::vector<TraderGroup> traders;
    int reps = 1;
    std::uint64_t master_seed = 0;
    Outputs outputs;
    std::optional<EgtSettings> egt;
    std::optional<EvolveSettings> evolve;
    std::optional<AdaptSettings> adapt;

    /// One spec per trader id, buyers first, groups in listed order.
    /// Throws ConfigError(ValidationError) if traders is empty.
    std::vector<StrategySpec> trader_specs() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Schedule generators.
Schedule linear_schedule(int n_per_side, Money buyer_intercept, Money buyer_slope, Money seller_intercept,
                         Money seller_slope, int units = 1);
Schedule flat_supply_schedule(int n_per_side, Money buyer_intercept, Money buyer_slope, Money seller_value,
                              int units = 1);
/// Adds a shift to `s` from `day` onwards.
Schedule with_shift(Schedule s, int day, const Schedule& shifted);

/// 10 buyers 150, 140, ..., 60 against 10 sellers 50, 60, ..., 140.
Schedule symmetric_schedule();

/// Throws ConfigError(ParseError) with the line on malformed YAML and
/// ConfigError(ValidationError) with the key path on anything else.
ExperimentConfig parse_config(const std::string& text);

/// Reads and parses a file; an unreadable file is a ParseError without a line.
ExperimentConfig load_config(const std::filesystem::path& path);

/// YAML text that parses back to an equal config. Schedules are written
/// out as inline values.
std::string emit_config(const ExperimentConfig& cfg);

std::string to_string(EvolveTarget t);

}  // namespace dasim::harness
