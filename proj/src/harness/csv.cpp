#include "dasim/harness/csv.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dasim/harness/format.hpp"

namespace dasim::harness {

namespace {

std::string num(double x) { return format_number(x); }
std::string num(const std::optional<double>& x) { return format_number(x); }

template <typename... Ts>
void row(std::string& out, const Ts&... fields) {
    bool first = true;
    ((out += (first ? "" : ","), out += fields, first = false), ...);
    out += '\n';
}

void add_mean(std::vector<SummaryRow>& rows, const std::string& name, const std::vector<double>& xs) {
    SummaryRow r;
    r.metric = name;
    r.n = static_cast<int>(xs.size());
    if (!xs.empty()) {
        double sum = 0.0;
        for (double x : xs) sum += x;
        r.mean = sum / r.n;
        if (r.n > 1) {
            double ss = 0.0;
            for (double x : xs) ss += (x - r.mean) * (x - r.mean);
            r.std_error = std::sqrt(ss / (r.n - 1)) / std::sqrt(static_cast<double>(r.n));
        }
    }
    rows.push_back(std::move(r));
}

}  // namespace

std::string transactions_rows(int run, const GameLog& log) {
    std::string out;
    const auto r = std::to_string(run);
    for (const auto& tx : log.transactions) {
        const int day = tx.time.day;
        row(out, r, std::to_string(day), std::to_string(tx.time.round), std::to_string(tx.time.seq),
            std::to_string(tx.bid.trader), std::to_string(tx.ask.trader), num(tx.price),
            num(log.schedule.value_of(tx.bid.trader, day)), num(log.schedule.value_of(tx.ask.trader, day)));
    }
    return out;
}

std::string metrics_rows(int run, const MetricsReport& m) {
    std::string out;
    const auto r = std::to_string(run);
    int volume = 0;
    for (const auto& d : m.days) {
        volume += d.volume;
        row(out, r, std::to_string(d.day), std::to_string(d.volume), num(d.ea), num(d.alpha), num(d.dispersion),
            num(d.power.buyers), num(d.power.sellers), num(d.ea_signed), num(d.pa), num(d.pe));
    }
    row(out, r, std::string(), std::to_string(volume), num(m.ea), num(m.alpha), num(m.profit_dispersion),
        num(m.market_power.buyers), num(m.market_power.sellers), num(m.ea_signed), num(m.pa), num(m.pe));
    return out;
}

std::string events_rows(int run, const GameLog& log) {
    std::string out;
    const auto r = std::to_string(run);
    const std::string none;
    for (const auto& ev : log.events) {
        if (const auto* s = std::get_if<ShoutLogged>(&ev)) {
            const auto& t = s->shout.time;
            row(out, r, std::string("shout"), std::to_string(t.day), std::to_string(t.round), std::to_string(t.seq),
                std::to_string(s->shout.trader), std::string(to_string(s->shout.side)), num(s->shout.price),
                std::string(s->accepted ? "1" : "0"), none, none);
        } else if (const auto* x = std::get_if<TransactionLogged>(&ev)) {
            const auto& t = x->tx.time;
            row(out, r, std::string("transaction"), std::to_string(t.day), std::to_string(t.round),
                std::to_string(t.seq), none, none, num(x->tx.price), none, num(x->tx.bid.price),
                num(x->tx.ask.price));
        } else if (const auto* d = std::get_if<DayBoundary>(&ev)) {
            row(out, r, std::string("day"), std::to_string(d->day), none, none, none, none, none, none, none, none);
        } else if (const auto* q = std::get_if<QuoteSnapshot>(&ev)) {
            const auto& t = q->time;
            row(out, r, std::string("quote"), std::to_string(t.day), std::to_string(t.round), std::to_string(t.seq),
                none, none, none, none, num(q->quote.bid), num(q->quote.ask));
        }
    }
    return out;
}

std::vector<SummaryRow> summarize(const std::vector<MetricsReport>& reports) {
    std::vector<double> ea, ea_signed, alpha, dispersion, mpb, mps, volume;
    for (const auto& m : reports) {
        if (m.ea) ea.push_back(*m.ea);
        if (m.ea_signed) ea_signed.push_back(*m.ea_signed);
        if (m.alpha) alpha.push_back(*m.alpha);
        dispersion.push_back(m.profit_dispersion);
        if (m.market_power.buyers) mpb.push_back(*m.market_power.buyers);
        if (m.market_power.sellers) mps.push_back(*m.market_power.sellers);
        int v = 0;
        for (int x : m.volume_by_day) v += x;
        volume.push_back(v);
    }
    std::vector<SummaryRow> rows;
    add_mean(rows, "volume", volume);
    add_mean(rows, "ea", ea);
    add_mean(rows, "ea_signed", ea_signed);
    add_mean(rows, "alpha", alpha);
    add_mean(rows, "dispersion", dispersion);
    add_mean(rows, "mpb", mpb);
    add_mean(rows, "mps", mps);
    return rows;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out = "metric,mean,stderr,n\n";
    for (const auto& r : rows) {
        if (r.n == 0) {
            row(out, r.metric, std::string(), std::string(), std::string("0"));
        } else {
            row(out, r.metric, num(r.mean), num(r.std_error), std::to_string(r.n));
        }
    }
    return out;
}

std::string payoff_csv(const egt::HeuristicGame& g) {
    std::string out;
    const auto& names = g.strategies();
    for (const auto& n : names) out += "n_" + n + ",";
    for (const auto& n : names) out += "mean_" + n + ",";
    for (const auto& n : names) out += "stderr_" + n + ",";
    out += "samples\n";
    const auto profiles = egt::enumerate_profiles(static_cast<int>(names.size()), g.n_agents());
    for (const auto& p : profiles) {
        const auto* e = g.find(p);
        if (!e) continue;
        for (int c : p) out += std::to_string(c) + ",";
        for (std::size_t i = 0; i < p.size(); ++i) out += (p[i] > 0 ? num(e->mean[i]) : std::string()) + ",";
        for (std::size_t i = 0; i < p.size(); ++i) out += (p[i] > 0 ? num(e->std_error[i]) : std::string()) + ",";
        out += std::to_string(e->samples) + "\n";
    }
    return out;
}

std::string equilibria_csv(const egt::HeuristicGame& g, const egt::EquilibriumSearch& search) {
    std::string out = "attractor,";
    for (const auto& n : g.strategies()) out += "x_" + n + ",";
    out += "basin,count,verified_ne\n";
    for (std::size_t a = 0; a < search.attractors.size(); ++a) {
        const auto& at = search.attractors[a];
        out += std::to_string(a) + ",";
        for (double x : at.point) out += num(x) + ",";
        out += num(at.basin) + "," + std::to_string(at.count) + "," + (at.verified_ne ? "1" : "0") + "\n";
    }
    out += "unclassified,";
    for (std::size_t i = 0; i < g.num_strategies(); ++i) out += ",";
    out += num(search.unclassified_fraction) + "," + std::to_string(search.unclassified) + ",\n";
    return out;
}

std::string trajectories_csv(const egt::HeuristicGame& g, const egt::EquilibriumSearch& search) {
    std::string out = "start,point";
    for (const auto& n : g.strategies()) out += ",x_" + n;
    out += "\n";
    for (std::size_t s = 0; s < search.flows.size(); ++s) {
        const auto& traj = search.flows[s].trajectory;
        for (std::size_t k = 0; k < traj.size(); ++k) {
            out += std::to_string(s) + "," + std::to_string(k);
            for (double x : traj[k]) out += "," + num(x);
            out += "\n";
        }
    }
    return out;
}

std::string evolution_csv(const opt::GaResult& r) {
    std::string out = "generation,best_fitness,mean_fitness,best_ever";
    const std::size_t genes = r.trace.empty() ? 0 : r.trace.front().best_genes.size();
    for (std::size_t i = 0; i < genes; ++i) out += ",gene_" + std::to_string(i);
    out += "\n";
    for (const auto& s : r.trace) {
        out += std::to_string(s.generation) + "," + num(s.best_fitness) + "," + num(s.mean_fitness) + "," +
               num(s.best_ever);
        for (double x : s.best_genes) out += "," + num(x);
        out += "\n";
    }
    return out;
}

std::string bandit_csv(const std::vector<opt::BanditPull>& pulls) {
    std::string out = "pull,arm,value,reward,running_mean\n";
    for (const auto& p : pulls) {
        row(out, std::to_string(p.pull), std::to_string(p.arm), num(p.value), num(p.reward), num(p.running_mean));
    }
    return out;
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw Error(ErrorCode::InvalidArgument, "no column '" + name + "'");
}

CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            const auto comma = line.find(',', start);
            fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (first) {
            t.header = std::move(fields);
            first = false;
        } else {
            t.rows.push_back(std::move(fields));
        }
    }
    return t;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << contents;
    if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace dasim::harness
