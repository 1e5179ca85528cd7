#include "dasim/harness/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "dasim/harness/format.hpp"

namespace dasim::harness {

namespace {

std::string describe(ErrorCode code, std::optional<int> line, const std::string& path, const std::string& message) {
    std::string out;
    if (code == ErrorCode::ParseError && line) out = "line " + std::to_string(*line) + ": ";
    if (!path.empty()) out += path + ": ";
    return out + message;
}

[[noreturn]] void invalid(const std::string& path, const std::string& message) {
    throw ConfigError(ErrorCode::ValidationError, std::nullopt, path, message);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void check_map(const YAML::Node& n, const std::string& path, const std::set<std::string>& allowed) {
    if (!n.IsMap()) invalid(path, "expected a mapping");
    for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) invalid(join(path, key), "unknown key '" + key + "'");
    }
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& path, const char* what) {
    if (!n.IsScalar()) invalid(path, std::string("expected ") + what);
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        invalid(path, std::string("expected ") + what);
    }
}

double number(const YAML::Node& n, const std::string& path) { return scalar<double>(n, path, "a number"); }
int integer(const YAML::Node& n, const std::string& path) { return scalar<int>(n, path, "an integer"); }
bool boolean(const YAML::Node& n, const std::string& path) { return scalar<bool>(n, path, "true or false"); }
std::string text(const YAML::Node& n, const std::string& path) { return scalar<std::string>(n, path, "a string"); }

template <typename T, typename F>
void optional_field(const YAML::Node& parent, const std::string& path, const char* key, T& dst, F conv) {
    if (const auto n = parent[key]) dst = conv(n, join(path, key));
}

std::vector<double> number_list(const YAML::Node& n, const std::string& path) {
    if (!n.IsSequence()) invalid(path, "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(number(n[i], at(path, i)));
    return out;
}

void require_range(double v, double lo, double hi, const std::string& path) {
    if (!(v >= lo && v <= hi)) {
        invalid(path, "must be in [" + format_number(lo) + ", " + format_number(hi) + "], got " + format_number(v));
    }
}

void require_min(long long v, long long lo, const std::string& path) {
    if (v < lo) invalid(path, "must be >= " + std::to_string(lo) + ", got " + std::to_string(v));
}

// ---------------------------------------------------------------- market

MarketConfig parse_market(const YAML::Node& n, const std::string& path) {
    check_map(n, path,
              {"clearing", "rounds_per_clear", "improvement_rule", "pricing", "k", "qs", "days", "rounds_per_day",
               "min_price", "max_price", "persistent_shouts", "tick", "history_capacity"});
    MarketConfig m;
    if (const auto c = n["clearing"]) {
        const auto v = text(c, join(path, "clearing"));
        if (v == "continuous") {
            m.clearing.kind = ClearingMode::Kind::Continuous;
        } else if (v == "periodic") {
            m.clearing.kind = ClearingMode::Kind::Periodic;
        } else {
            invalid(join(path, "clearing"), "expected continuous or periodic, got '" + v + "'");
        }
    }
    optional_field(n, path, "rounds_per_clear", m.clearing.rounds_per_clear, integer);
    optional_field(n, path, "improvement_rule", m.improvement_rule, boolean);
    if (const auto p = n["pricing"]) {
        const auto v = text(p, join(path, "pricing"));
        if (v == "kda") {
            m.pricing.kind = Pricing::Kind::Kda;
        } else if (v == "uniform") {
            m.pricing.kind = Pricing::Kind::Uniform;
        } else {
            invalid(join(path, "pricing"), "expected kda or uniform, got '" + v + "'");
        }
    }
    optional_field(n, path, "k", m.pricing.k, number);
    optional_field(n, path, "qs", m.qs, number);
    optional_field(n, path, "days", m.days, integer);
    optional_field(n, path, "rounds_per_day", m.rounds_per_day, integer);
    optional_field(n, path, "min_price", m.min_price, number);
    optional_field(n, path, "max_price", m.max_price, number);
    optional_field(n, path, "persistent_shouts", m.persistent_shouts, boolean);
    if (const auto t = n["tick"]) m.tick = number(t, join(path, "tick"));
    optional_field(n, path, "history_capacity", m.history_capacity, integer);

    require_range(m.qs, 0.0, 1.0, join(path, "qs"));
    require_range(m.pricing.k, 0.0, 1.0, join(path, "k"));
    require_min(m.days, 1, join(path, "days"));
    require_min(m.rounds_per_day, 1, join(path, "rounds_per_day"));
    require_min(m.clearing.rounds_per_clear, 1, join(path, "rounds_per_clear"));
    require_min(m.history_capacity, 1, join(path, "history_capacity"));
    if (m.tick && !(*m.tick > 0.0)) invalid(join(path, "tick"), "must be positive");
    if (!(m.min_price >= 0.0)) invalid(join(path, "min_price"), "must be >= 0");
    if (!(m.max_price > m.min_price)) invalid(join(path, "max_price"), "must exceed min_price");
    try {
        m.validate();
    } catch (const Error& e) {
        invalid(path, e.what());
    }
    return m;
}

// -------------------------------------------------------------- schedule

struct Values {
    std::vector<Money> buyers;
    std::vector<Money> sellers;
};

Values parse_values(const YAML::Node& n, const std::string& path, std::set<std::string> extra) {
    std::set<std::string> common{"generator", "buyers", "sellers"};
    common.insert(extra.begin(), extra.end());
    if (!n.IsMap()) invalid(path, "expected a mapping");

    std::string generator = "inline";
    if (const auto g = n["generator"]) generator = text(g, join(path, "generator"));

    std::set<std::string> allowed = common;
    if (generator == "inline") {
        check_map(n, path, allowed);
        if (!n["buyers"]) invalid(join(path, "buyers"), "required");
        if (!n["sellers"]) invalid(join(path, "sellers"), "required");
        return Values{number_list(n["buyers"], join(path, "buyers")), number_list(n["sellers"], join(path, "sellers"))};
    }

    allowed.erase("buyers");
    allowed.erase("sellers");
    allowed.insert({"n_per_side", "buyer_intercept", "buyer_slope"});
    int n_per_side = 10;
    Money buyer_intercept = 150.0, buyer_slope = 10.0;
    Schedule s;
    if (generator == "linear") {
        allowed.insert({"seller_intercept", "seller_slope"});
        check_map(n, path, allowed);
        Money seller_intercept = 50.0, seller_slope = 10.0;
        optional_field(n, path, "seller_intercept", seller_intercept, number);
        optional_field(n, path, "seller_slope", seller_slope, number);
        optional_field(n, path, "n_per_side", n_per_side, integer);
        optional_field(n, path, "buyer_intercept", buyer_intercept, number);
        optional_field(n, path, "buyer_slope", buyer_slope, number);
        require_min(n_per_side, 1, join(path, "n_per_side"));
        s = linear_schedule(n_per_side, buyer_intercept, buyer_slope, seller_intercept, seller_slope);
    } else if (generator == "flat_supply") {
        allowed.insert("seller_value");
        check_map(n, path, allowed);
        Money seller_value = 100.0;
        optional_field(n, path, "seller_value", seller_value, number);
        optional_field(n, path, "n_per_side", n_per_side, integer);
        optional_field(n, path, "buyer_intercept", buyer_intercept, number);
        optional_field(n, path, "buyer_slope", buyer_slope, number);
        require_min(n_per_side, 1, join(path, "n_per_side"));
        s = flat_supply_schedule(n_per_side, buyer_intercept, buyer_slope, seller_value);
    } else {
        invalid(join(path, "generator"), "expected inline, linear or flat_supply, got '" + generator + "'");
    }
    return Values{s.buyer_values, s.seller_values};
}

Schedule parse_schedule(const YAML::Node& n, const std::string& path) {
    const auto v = parse_values(n, path, {"units", "shifts"});
    Schedule s;
    s.buyer_values = v.buyers;
    s.seller_values = v.sellers;
    optional_field(n, path, "units", s.units_per_trader_per_day, integer);
    require_min(s.units_per_trader_per_day, 1, join(path, "units"));
    if (const auto sh = n["shifts"]) {
        const auto sp = join(path, "shifts");
        if (!sh.IsSequence()) invalid(sp, "expected a list");
        for (std::size_t i = 0; i < sh.size(); ++i) {
            const auto ip = at(sp, i);
            const auto sv = parse_values(sh[i], ip, {"day"});
            if (!sh[i]["day"]) invalid(join(ip, "day"), "required");
            const int day = integer(sh[i]["day"], join(ip, "day"));
            require_min(day, 2, join(ip, "day"));
            s.shifts.push_back(ScheduleShift{day, sv.buyers, sv.sellers});
        }
    }
    try {
        s.validate();
    } catch (const Error& e) {
        invalid(path, e.what());
    }
    return s;
}

// ------------------------------------------------------------ strategies

StrategySpec parse_strategy(const YAML::Node& n, const std::string& path) {
    StrategySpec spec;
    if (!n["strategy"]) invalid(join(path, "strategy"), "required");
    spec.name = text(n["strategy"], join(path, "strategy"));
    const auto names = strategy_names();
    if (std::find(names.begin(), names.end(), spec.name) == names.end()) {
        invalid(join(path, "strategy"), "unknown strategy '" + spec.name + "'");
    }
    if (const auto p = n["params"]) {
        const auto pp = join(path, "params");
        const auto keys = strategy_param_keys(spec.name);
        check_map(p, pp, std::set<std::string>(keys.begin(), keys.end()));
        for (const auto& kv : p) {
            const auto key = kv.first.as<std::string>();
            spec.params[key] = number(kv.second, join(pp, key));
        }
    }
    try {
        (void)make_strategy(spec);
    } catch (const Error& e) {
        invalid(join(path, "params"), e.what());
    }
    return spec;
}

std::vector<NamedStrategy> parse_named_strategies(const YAML::Node& n, const std::string& path) {
    if (!n.IsSequence() || n.size() == 0) invalid(path, "expected a non-empty list");
    std::vector<NamedStrategy> out;
    std::set<std::string> labels;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const auto ip = at(path, i);
        check_map(n[i], ip, {"label", "strategy", "params"});
        NamedStrategy s;
        s.spec = parse_strategy(n[i], ip);
        s.label = n[i]["label"] ? text(n[i]["label"], join(ip, "label")) : s.spec.name;
        if (!labels.insert(s.label).second) invalid(join(ip, "label"), "duplicate label '" + s.label + "'");
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<TraderGroup> parse_traders(const YAML::Node& n, const std::string& path) {
    if (!n.IsSequence()) invalid(path, "expected a list");
    std::vector<TraderGroup> out;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const auto ip = at(path, i);
        check_map(n[i], ip, {"strategy", "params", "count", "side"});
        TraderGroup g;
        g.strategy = parse_strategy(n[i], ip);
        optional_field(n[i], ip, "count", g.count, integer);
        require_min(g.count, 1, join(ip, "count"));
        if (const auto s = n[i]["side"]) {
            const auto v = text(s, join(ip, "side"));
            if (v == "buy") {
                g.side = SeatSide::Buy;
            } else if (v == "sell") {
                g.side = SeatSide::Sell;
            } else if (v == "both") {
                g.side = SeatSide::Both;
            } else {
                invalid(join(ip, "side"), "expected buy, sell or both, got '" + v + "'");
            }
        }
        out.push_back(std::move(g));
    }
    return out;
}

void check_trader_counts(const std::vector<TraderGroup>& groups, const Schedule& s) {
    if (groups.empty()) return;
    std::size_t buyers = 0, sellers = 0;
    for (const auto& g : groups) {
        const auto c = static_cast<std::size_t>(g.count);
        if (g.side != SeatSide::Sell) buyers += c;
        if (g.side != SeatSide::Buy) sellers += c;
    }
    if (buyers != s.num_buyers() || sellers != s.num_sellers()) {
        invalid("traders", "groups seat " + std::to_string(buyers) + " buyers and " + std::to_string(sellers) +
                               " sellers but the schedule has " + std::to_string(s.num_buyers()) + " and " +
                               std::to_string(s.num_sellers()));
    }
}

// ------------------------------------------------------- egt / evolve / adapt

egt::FlowOptions parse_flow(const YAML::Node& n, const std::string& path) {
    egt::FlowOptions f;
    optional_field(n, path, "dt", f.dt, number);
    optional_field(n, path, "max_steps", f.max_steps, integer);
    optional_field(n, path, "tol", f.tol, number);
    optional_field(n, path, "sample_every", f.sample_every, integer);
    if (!(f.dt > 0.0)) invalid(join(path, "dt"), "must be positive");
    require_min(f.max_steps, 1, join(path, "max_steps"));
    if (!(f.tol > 0.0)) invalid(join(path, "tol"), "must be positive");
    require_min(f.sample_every, 1, join(path, "sample_every"));
    return f;
}

int agents_field(const YAML::Node& n, const std::string& path, const Schedule& s) {
    const int total = static_cast<int>(s.num_traders());
    if (!n["agents"]) return total;
    const int a = integer(n["agents"], join(path, "agents"));
    if (a != total) {
        invalid(join(path, "agents"), "must equal the schedule's trader count " + std::to_string(total));
    }
    return a;
}

EgtSettings parse_egt(const YAML::Node& n, const std::string& path, const Schedule& s) {
    check_map(n, path, {"strategies", "agents", "reps", "starts", "dt", "max_steps", "tol", "sample_every"});
    EgtSettings e;
    if (!n["strategies"]) invalid(join(path, "strategies"), "required");
    e.strategies = parse_named_strategies(n["strategies"], join(path, "strategies"));
    e.agents = agents_field(n, path, s);
    optional_field(n, path, "reps", e.reps, integer);
    optional_field(n, path, "starts", e.starts, integer);
    require_min(e.reps, 1, join(path, "reps"));
    require_min(e.starts, 1, join(path, "starts"));
    e.flow = parse_flow(n, path);
    return e;
}

EvolveTarget parse_target(const std::string& v, const std::string& path) {
    if (v == "zip") return EvolveTarget::Zip;
    if (v == "mechanism") return EvolveTarget::Mechanism;
    if (v == "basin") return EvolveTarget::Basin;
    invalid(path, "expected zip, mechanism or basin, got '" + v + "'");
}

template <typename F>
auto parse_enum(const YAML::Node& n, const std::string& path, F parse) {
    const auto v = text(n, path);
    try {
        return parse(v);
    } catch (const Error& e) {
        invalid(path, e.what());
    }
}

EvolveSettings parse_evolve(const YAML::Node& n, const std::string& path, const Schedule& s) {
    check_map(n, path,
              {"target", "objective", "param", "population", "generations", "tournament_size", "crossover_prob",
               "mutation_sigma_frac", "elitism", "fitness_reps", "rivals", "agents", "reps", "starts"});
    EvolveSettings e;
    if (const auto t = n["target"]) e.target = parse_target(text(t, join(path, "target")), join(path, "target"));
    if (const auto o = n["objective"]) e.objective = parse_enum(o, join(path, "objective"), opt::parse_objective);
    if (const auto p = n["param"]) e.param = parse_enum(p, join(path, "param"), opt::parse_mechanism_param);
    optional_field(n, path, "population", e.ga.population, integer);
    optional_field(n, path, "generations", e.ga.generations, integer);
    optional_field(n, path, "tournament_size", e.ga.tournament_size, integer);
    optional_field(n, path, "crossover_prob", e.ga.crossover_prob, number);
    optional_field(n, path, "mutation_sigma_frac", e.ga.mutation_sigma_frac, number);
    optional_field(n, path, "elitism", e.ga.elitism, integer);
    optional_field(n, path, "fitness_reps", e.ga.fitness_reps, integer);
    try {
        e.ga.validate();
    } catch (const Error& err) {
        invalid(path, err.what());
    }
    if (const auto r = n["rivals"]) e.rivals = parse_named_strategies(r, join(path, "rivals"));
    if (e.target == EvolveTarget::Basin && e.rivals.empty()) invalid(join(path, "rivals"), "required for target basin");
    e.agents = agents_field(n, path, s);
    optional_field(n, path, "reps", e.reps, integer);
    optional_field(n, path, "starts", e.starts, integer);
    require_min(e.reps, 1, join(path, "reps"));
    require_min(e.starts, 1, join(path, "starts"));
    return e;
}

AdaptSettings parse_adapt(const YAML::Node& n, const std::string& path) {
    check_map(n, path, {"param", "arms", "epsilon", "pulls"});
    AdaptSettings a;
    if (const auto p = n["param"]) a.param = parse_enum(p, join(path, "param"), opt::parse_mechanism_param);
    if (const auto arms = n["arms"]) a.arms = number_list(arms, join(path, "arms"));
    if (a.arms.empty()) invalid(join(path, "arms"), "needs at least one arm");
    for (std::size_t i = 0; i < a.arms.size(); ++i) require_range(a.arms[i], 0.0, 1.0, at(join(path, "arms"), i));
    optional_field(n, path, "epsilon", a.epsilon, number);
    require_range(a.epsilon, 0.0, 1.0, join(path, "epsilon"));
    optional_field(n, path, "pulls", a.pulls, integer);
    require_min(a.pulls, 1, join(path, "pulls"));
    return a;
}

Outputs parse_outputs(const YAML::Node& n, const std::string& path) {
    if (!n.IsSequence()) invalid(path, "expected a list");
    Outputs o{false, false, false, false, false, false};
    for (std::size_t i = 0; i < n.size(); ++i) {
        const auto v = text(n[i], at(path, i));
        if (v == "transactions") {
            o.transactions = true;
        } else if (v == "metrics") {
            o.metrics = true;
        } else if (v == "evolution") {
            o.evolution = true;
        } else if (v == "egt") {
            o.egt = true;
        } else if (v == "svg") {
            o.svg = true;
        } else if (v == "events") {
            o.events = true;
        } else {
            invalid(at(path, i), "unknown output '" + v + "'");
        }
    }
    return o;
}

// ---------------------------------------------------------------- emitter

void emit_num(YAML::Emitter& out, double x) { out << format_number(x); }

void emit_list(YAML::Emitter& out, const std::vector<double>& xs) {
    out << YAML::Flow << YAML::BeginSeq;
    for (double x : xs) emit_num(out, x);
    out << YAML::EndSeq;
}

void emit_strategy(YAML::Emitter& out, const StrategySpec& s) {
    out << YAML::Key << "strategy" << YAML::Value << s.name;
    if (!s.params.empty()) {
        out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
        for (const auto& [k, v] : s.params) {
            out << YAML::Key << k << YAML::Value;
            emit_num(out, v);
        }
        out << YAML::EndMap;
    }
}

void emit_named(YAML::Emitter& out, const char* key, const std::vector<NamedStrategy>& xs) {
    out << YAML::Key << key << YAML::Value << YAML::BeginSeq;
    for (const auto& s : xs) {
        out << YAML::BeginMap << YAML::Key << "label" << YAML::Value << s.label;
        emit_strategy(out, s.spec);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
}

const char* side_name(SeatSide s) {
    switch (s) {
        case SeatSide::Buy: return "buy";
        case SeatSide::Sell: return "sell";
        case SeatSide::Both: return "both";
    }
    return "both";
}

}  // namespace

ConfigError::ConfigError(ErrorCode code, std::optional<int> line, std::string path, const std::string& message)
    : Error(code, describe(code, line, path, message)), line_(line), path_(std::move(path)), message_(message) {}

std::vector<StrategySpec> ExperimentConfig::trader_specs() const {
    if (traders.empty()) invalid("traders", "required for this command");
    std::vector<StrategySpec> buyers, sellers;
    for (const auto& g : traders) {
        for (int i = 0; i < g.count; ++i) {
            if (g.side != SeatSide::Sell) buyers.push_back(g.strategy);
            if (g.side != SeatSide::Buy) sellers.push_back(g.strategy);
        }
    }
    buyers.insert(buyers.end(), sellers.begin(), sellers.end());
    return buyers;
}

Schedule linear_schedule(int n_per_side, Money buyer_intercept, Money buyer_slope, Money seller_intercept,
                         Money seller_slope, int units) {
    Schedule s;
    s.units_per_trader_per_day = units;
    for (int i = 0; i < n_per_side; ++i) {
        s.buyer_values.push_back(buyer_intercept - buyer_slope * i);
        s.seller_values.push_back(seller_intercept + seller_slope * i);
    }
    return s;
}

Schedule flat_supply_schedule(int n_per_side, Money buyer_intercept, Money buyer_slope, Money seller_value,
                              int units) {
    Schedule s = linear_schedule(n_per_side, buyer_intercept, buyer_slope, seller_value, 0.0, units);
    return s;
}

Schedule with_shift(Schedule s, int day, const Schedule& shifted) {
    s.shifts.push_back(ScheduleShift{day, shifted.buyer_values, shifted.seller_values});
    return s;
}

Schedule symmetric_schedule() { return linear_schedule(10, 150.0, 10.0, 50.0, 10.0); }

std::string to_string(EvolveTarget t) {
    switch (t) {
        case EvolveTarget::Zip: return "zip";
        case EvolveTarget::Mechanism: return "mechanism";
        case EvolveTarget::Basin: return "basin";
    }
    return "zip";
}

ExperimentConfig parse_config(const std::string& text_in) {
    YAML::Node root;
    try {
        root = YAML::Load(text_in);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(ErrorCode::ParseError, e.mark.line + 1, "", e.msg);
    }
    if (!root.IsMap()) {
        if (root.IsNull()) invalid("", "empty config");
        invalid("", "top level must be a mapping");
    }
    check_map(root, "", {"market", "schedule", "traders", "reps", "master_seed", "outputs", "egt", "evolve", "adapt"});

    ExperimentConfig cfg;
    if (const auto m = root["market"]) cfg.market = parse_market(m, "market");
    if (!root["schedule"]) invalid("schedule", "required");
    cfg.schedule = parse_schedule(root["schedule"], "schedule");
    if (const auto t = root["traders"]) cfg.traders = parse_traders(t, "traders");
    check_trader_counts(cfg.traders, cfg.schedule);
    optional_field(root, "", "reps", cfg.reps, integer);
    require_min(cfg.reps, 1, "reps");
    optional_field(root, "", "master_seed", cfg.master_seed,
                   [](const YAML::Node& n, const std::string& p) { return scalar<std::uint64_t>(n, p, "a non-negative integer"); });
    if (const auto o = root["outputs"]) cfg.outputs = parse_outputs(o, "outputs");
    if (const auto e = root["egt"]) cfg.egt = parse_egt(e, "egt", cfg.schedule);
    if (const auto e = root["evolve"]) cfg.evolve = parse_evolve(e, "evolve", cfg.schedule);
    if (const auto a = root["adapt"]) cfg.adapt = parse_adapt(a, "adapt");
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(ErrorCode::ParseError, std::nullopt, "", "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string emit_config(const ExperimentConfig& cfg) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "master_seed" << YAML::Value << cfg.master_seed;
    out << YAML::Key << "reps" << YAML::Value << cfg.reps;

    const auto& m = cfg.market;
    out << YAML::Key << "market" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "clearing" << YAML::Value
        << (m.clearing.kind == ClearingMode::Kind::Continuous ? "continuous" : "periodic");
    out << YAML::Key << "rounds_per_clear" << YAML::Value << m.clearing.rounds_per_clear;
    out << YAML::Key << "improvement_rule" << YAML::Value << m.improvement_rule;
    out << YAML::Key << "pricing" << YAML::Value << (m.pricing.kind == Pricing::Kind::Kda ? "kda" : "uniform");
    out << YAML::Key << "k" << YAML::Value;
    emit_num(out, m.pricing.k);
    out << YAML::Key << "qs" << YAML::Value;
    emit_num(out, m.qs);
    out << YAML::Key << "days" << YAML::Value << m.days;
    out << YAML::Key << "rounds_per_day" << YAML::Value << m.rounds_per_day;
    out << YAML::Key << "min_price" << YAML::Value;
    emit_num(out, m.min_price);
    out << YAML::Key << "max_price" << YAML::Value;
    emit_num(out, m.max_price);
    out << YAML::Key << "persistent_shouts" << YAML::Value << m.persistent_shouts;
    if (m.tick) {
        out << YAML::Key << "tick" << YAML::Value;
        emit_num(out, *m.tick);
    }
    out << YAML::Key << "history_capacity" << YAML::Value << m.history_capacity;
    out << YAML::EndMap;

    const auto& s = cfg.schedule;
    out << YAML::Key << "schedule" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "buyers" << YAML::Value;
    emit_list(out, s.buyer_values);
    out << YAML::Key << "sellers" << YAML::Value;
    emit_list(out, s.seller_values);
    out << YAML::Key << "units" << YAML::Value << s.units_per_trader_per_day;
    if (!s.shifts.empty()) {
        out << YAML::Key << "shifts" << YAML::Value << YAML::BeginSeq;
        for (const auto& sh : s.shifts) {
            out << YAML::BeginMap << YAML::Key << "day" << YAML::Value << sh.day;
            out << YAML::Key << "buyers" << YAML::Value;
            emit_list(out, sh.buyer_values);
            out << YAML::Key << "sellers" << YAML::Value;
            emit_list(out, sh.seller_values);
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }
    out << YAML::EndMap;

    if (!cfg.traders.empty()) {
        out << YAML::Key << "traders" << YAML::Value << YAML::BeginSeq;
        for (const auto& g : cfg.traders) {
            out << YAML::BeginMap;
            emit_strategy(out, g.strategy);
            out << YAML::Key << "count" << YAML::Value << g.count;
            out << YAML::Key << "side" << YAML::Value << side_name(g.side);
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }

    out << YAML::Key << "outputs" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    const auto& o = cfg.outputs;
    if (o.transactions) out << "transactions";
    if (o.metrics) out << "metrics";
    if (o.evolution) out << "evolution";
    if (o.egt) out << "egt";
    if (o.svg) out << "svg";
    if (o.events) out << "events";
    out << YAML::EndSeq;

    auto emit_flow = [&](const egt::FlowOptions& f) {
        out << YAML::Key << "dt" << YAML::Value;
        emit_num(out, f.dt);
        out << YAML::Key << "max_steps" << YAML::Value << f.max_steps;
        out << YAML::Key << "tol" << YAML::Value;
        emit_num(out, f.tol);
        out << YAML::Key << "sample_every" << YAML::Value << f.sample_every;
    };

    if (cfg.egt) {
        const auto& e = *cfg.egt;
        out << YAML::Key << "egt" << YAML::Value << YAML::BeginMap;
        emit_named(out, "strategies", e.strategies);
        out << YAML::Key << "agents" << YAML::Value << e.agents;
        out << YAML::Key << "reps" << YAML::Value << e.reps;
        out << YAML::Key << "starts" << YAML::Value << e.starts;
        emit_flow(e.flow);
        out << YAML::EndMap;
    }

    if (cfg.evolve) {
        const auto& e = *cfg.evolve;
        out << YAML::Key << "evolve" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "target" << YAML::Value << to_string(e.target);
        out << YAML::Key << "objective" << YAML::Value << opt::to_string(e.objective);
        out << YAML::Key << "param" << YAML::Value << opt::to_string(e.param);
        out << YAML::Key << "population" << YAML::Value << e.ga.population;
        out << YAML::Key << "generations" << YAML::Value << e.ga.generations;
        out << YAML::Key << "tournament_size" << YAML::Value << e.ga.tournament_size;
        out << YAML::Key << "crossover_prob" << YAML::Value;
        emit_num(out, e.ga.crossover_prob);
        out << YAML::Key << "mutation_sigma_frac" << YAML::Value;
        emit_num(out, e.ga.mutation_sigma_frac);
        out << YAML::Key << "elitism" << YAML::Value << e.ga.elitism;
        out << YAML::Key << "fitness_reps" << YAML::Value << e.ga.fitness_reps;
        if (!e.rivals.empty()) emit_named(out, "rivals", e.rivals);
        out << YAML::Key << "agents" << YAML::Value << e.agents;
        out << YAML::Key << "reps" << YAML::Value << e.reps;
        out << YAML::Key << "starts" << YAML::Value << e.starts;
        out << YAML::EndMap;
    }

    if (cfg.adapt) {
        const auto& a = *cfg.adapt;
        out << YAML::Key << "adapt" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "param" << YAML::Value << opt::to_string(a.param);
        out << YAML::Key << "arms" << YAML::Value;
        emit_list(out, a.arms);
        out << YAML::Key << "epsilon" << YAML::Value;
        emit_num(out, a.epsilon);
        out << YAML::Key << "pulls" << YAML::Value << a.pulls;
        out << YAML::EndMap;
    }

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace dasim::harness
