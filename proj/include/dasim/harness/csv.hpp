#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dasim/egt.hpp"
#include "dasim/game.hpp"
#include "dasim/metrics.hpp"
#include "dasim/optimizer.hpp"

namespace dasim::harness {

inline constexpr const char* kTransactionsHeader =
    "run,day,round,seq,buyer_id,seller_id,price,buyer_value,seller_value";
inline constexpr const char* kMetricsHeader =
    "run_id,day,volume,ea,alpha,dispersion,mpb,mps,ea_signed,pa,pe";
inline constexpr const char* kEventsHeader = "run,kind,day,round,seq,trader,side,price,accepted,bid,ask";

/// Rows without a trailing header; each line ends in '\n'.
std::string transactions_rows(int run, const GameLog& log);
/// Per-day rows followed by one whole-run row with an empty day.
std::string metrics_rows(int run, const MetricsReport& m);
std::string events_rows(int run, const GameLog& log);

struct SummaryRow {
    std::string metric;
    double mean = 0.0;
    double std_error = 0.0;
    int n = 0;
};

/// Mean and standard error of the defined values of each whole-run metric.
std::vector<SummaryRow> summarize(const std::vector<MetricsReport>& reports);
std::string summary_csv(const std::vector<SummaryRow>& rows);

/// Counts per strategy, then mean_<label>, stderr_<label>, samples.
std::string payoff_csv(const egt::HeuristicGame& g);
std::string equilibria_csv(const egt::HeuristicGame& g, const egt::EquilibriumSearch& search);
/// Sampled flow points: start, step, x_<label>...
std::string trajectories_csv(const egt::HeuristicGame& g, const egt::EquilibriumSearch& search);

std::string evolution_csv(const opt::GaResult& r);
std::string bandit_csv(const std::vector<opt::BanditPull>& pulls);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; throws Error(InvalidArgument) if absent.
    std::size_t column(const std::string& name) const;
};

/// Plain comma splitting; the emitted files never quote fields.
CsvTable parse_csv(const std::string& text);

void write_file(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace dasim::harness
