#include "dasim/harness/svg.hpp"

#include <algorithm>
#include <cmath>

#include "dasim/harness/format.hpp"

namespace dasim::harness {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 20.0;
constexpr double kBottom = 50.0;

std::string f(double x) { return format_fixed(x, 2); }

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string header(double w, double h) {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
           "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           f(w) + "\" height=\"" + f(h) + "\" viewBox=\"0 0 " + f(w) + " " + f(h) + "\">\n" +
           "<rect x=\"0\" y=\"0\" width=\"" + f(w) + "\" height=\"" + f(h) + "\" fill=\"white\"/>\n";
}

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// Vertex 0 bottom-left, 1 bottom-right, 2 top.
Point to_plane(const egt::Mixture& m) {
    constexpr double side = 600.0, ox = 100.0, oy = 620.0;
    const double h = side * std::sqrt(3.0) / 2.0;
    const Point v[3] = {{ox, oy}, {ox + side, oy}, {ox + side / 2.0, oy - h}};
    Point p;
    for (int i = 0; i < 3; ++i) {
        p.x += m[static_cast<std::size_t>(i)] * v[i].x;
        p.y += m[static_cast<std::size_t>(i)] * v[i].y;
    }
    return p;
}

}  // namespace

std::string emit_svg_price_series(const GameLog& log, std::optional<Money> p0) {
    const auto& txs = log.transactions;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;

    double lo = log.config.min_price, hi = log.config.max_price;
    if (!txs.empty()) {
        lo = hi = txs.front().price;
        for (const auto& t : txs) {
            lo = std::min(lo, t.price);
            hi = std::max(hi, t.price);
        }
        if (p0) {
            lo = std::min(lo, *p0);
            hi = std::max(hi, *p0);
        }
        const double pad = std::max(1.0, 0.1 * (hi - lo));
        lo -= pad;
        hi += pad;
    }
    const double n = std::max<double>(1.0, static_cast<double>(txs.size()));
    auto sx = [&](double i) { return kLeft + plot_w * (i + 0.5) / n; };
    auto sy = [&](double p) { return kTop + plot_h * (hi - p) / (hi - lo); };

    std::string out = header(kWidth, kHeight);
    const double x0 = kLeft, x1 = kLeft + plot_w, y0 = kTop, y1 = kTop + plot_h;
    out += "<g stroke=\"black\" stroke-width=\"1\">\n";
    out += "<line x1=\"" + f(x0) + "\" y1=\"" + f(y1) + "\" x2=\"" + f(x1) + "\" y2=\"" + f(y1) + "\"/>\n";
    out += "<line x1=\"" + f(x0) + "\" y1=\"" + f(y0) + "\" x2=\"" + f(x0) + "\" y2=\"" + f(y1) + "\"/>\n";
    out += "</g>\n";
    out += "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
    out += "<text x=\"" + f((x0 + x1) / 2) + "\" y=\"" + f(kHeight - 12) +
           "\" text-anchor=\"middle\">transaction</text>\n";
    out += "<text x=\"14\" y=\"" + f((y0 + y1) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
           f((y0 + y1) / 2) + ")\">price</text>\n";
    for (int k = 0; k <= 4; ++k) {
        const double p = lo + (hi - lo) * k / 4.0;
        out += "<text x=\"" + f(x0 - 6) + "\" y=\"" + f(sy(p) + 4) + "\" text-anchor=\"end\">" + format_fixed(p, 1) +
               "</text>\n";
    }
    out += "</g>\n";

    // Day rules sit halfway between the last trade of one day and the first of the next.
    out += "<g stroke=\"#999999\" stroke-width=\"1\">\n";
    for (std::size_t i = 1; i < txs.size(); ++i) {
        if (txs[i].time.day != txs[i - 1].time.day) {
            const double x = (sx(static_cast<double>(i) - 1) + sx(static_cast<double>(i))) / 2.0;
            out += "<line x1=\"" + f(x) + "\" y1=\"" + f(y0) + "\" x2=\"" + f(x) + "\" y2=\"" + f(y1) + "\"/>\n";
        }
    }
    out += "</g>\n";

    if (p0) {
        out += "<line x1=\"" + f(x0) + "\" y1=\"" + f(sy(*p0)) + "\" x2=\"" + f(x1) + "\" y2=\"" + f(sy(*p0)) +
               "\" stroke=\"#cc0000\" stroke-width=\"1\" stroke-dasharray=\"6,4\"/>\n";
    }

    if (!txs.empty()) {
        out += "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1\" points=\"";
        for (std::size_t i = 0; i < txs.size(); ++i) {
            out += (i ? " " : "") + f(sx(static_cast<double>(i))) + "," + f(sy(txs[i].price));
        }
        out += "\"/>\n<g fill=\"#1f4e9c\">\n";
        for (std::size_t i = 0; i < txs.size(); ++i) {
            out += "<circle cx=\"" + f(sx(static_cast<double>(i))) + "\" cy=\"" + f(sy(txs[i].price)) +
                   "\" r=\"2.5\"/>\n";
        }
        out += "</g>\n";
    }
    out += "</svg>\n";
    return out;
}

std::string emit_svg_simplex(const egt::HeuristicGame& g, const egt::EquilibriumSearch& search) {
    if (g.num_strategies() != 3) throw Error(ErrorCode::InvalidArgument, "simplex plot needs exactly 3 strategies");
    std::string out = header(800.0, 700.0);

    const egt::Mixture corners[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    out += "<polygon fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    for (int i = 0; i < 3; ++i) {
        const auto p = to_plane(corners[i]);
        out += (i ? " " : "") + f(p.x) + "," + f(p.y);
    }
    out += "\"/>\n<g font-family=\"sans-serif\" font-size=\"14\" fill=\"black\" text-anchor=\"middle\">\n";
    const double dy[3] = {24, 24, -10};
    for (int i = 0; i < 3; ++i) {
        const auto p = to_plane(corners[i]);
        out += "<text x=\"" + f(p.x) + "\" y=\"" + f(p.y + dy[i]) + "\">" + xml_escape(g.strategies()[static_cast<std::size_t>(i)]) +
               "</text>\n";
    }
    out += "</g>\n";

    // Direction field, arrow length scaled to the largest speed on the grid.
    constexpr int grid = 12;
    std::vector<std::pair<egt::Mixture, std::vector<double>>> field;
    double vmax = 0.0;
    for (int a = 0; a <= grid; ++a) {
        for (int b = 0; a + b <= grid; ++b) {
            const int c = grid - a - b;
            if (a == 0 || b == 0 || c == 0) continue;
            egt::Mixture x{static_cast<double>(a) / grid, static_cast<double>(b) / grid, static_cast<double>(c) / grid};
            auto v = egt::replicator_velocity(g, x);
            vmax = std::max(vmax, std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
            field.emplace_back(std::move(x), std::move(v));
        }
    }
    out += "<g stroke=\"#888888\" stroke-width=\"1\" fill=\"none\">\n";
    for (const auto& [x, v] : field) {
        if (vmax <= 0.0) break;
        const double scale = 0.035 / vmax;
        egt::Mixture tip{x[0] + v[0] * scale, x[1] + v[1] * scale, x[2] + v[2] * scale};
        const auto p = to_plane(x), q = to_plane(tip);
        out += "<line x1=\"" + f(p.x) + "\" y1=\"" + f(p.y) + "\" x2=\"" + f(q.x) + "\" y2=\"" + f(q.y) + "\"/>\n";
        const double dx = q.x - p.x, dyv = q.y - p.y, len = std::hypot(dx, dyv);
        if (len > 1e-9) {
            const double ux = dx / len, uy = dyv / len, hl = std::min(5.0, len * 0.5);
            const double lx = q.x - hl * (ux + 0.5 * uy), ly = q.y - hl * (uy - 0.5 * ux);
            const double rx = q.x - hl * (ux - 0.5 * uy), ry = q.y - hl * (uy + 0.5 * ux);
            out += "<polyline points=\"" + f(lx) + "," + f(ly) + " " + f(q.x) + "," + f(q.y) + " " + f(rx) + "," +
                   f(ry) + "\"/>\n";
        }
    }
    out += "</g>\n";

    out += "<g stroke=\"#1f4e9c\" stroke-width=\"0.8\" fill=\"none\" stroke-opacity=\"0.6\">\n";
    for (const auto& flow : search.flows) {
        if (flow.trajectory.size() < 2) continue;
        out += "<polyline points=\"";
        for (std::size_t k = 0; k < flow.trajectory.size(); ++k) {
            const auto p = to_plane(flow.trajectory[k]);
            out += (k ? " " : "") + f(p.x) + "," + f(p.y);
        }
        out += "\"/>\n";
    }
    out += "</g>\n";

    out += "<g stroke=\"black\" stroke-width=\"1\">\n";
    for (const auto& a : search.attractors) {
        const auto p = to_plane(a.point);
        const double r = 4.0 + 10.0 * std::sqrt(a.basin);
        out += "<circle cx=\"" + f(p.x) + "\" cy=\"" + f(p.y) + "\" r=\"" + f(r) + "\" fill=\"" +
               (a.verified_ne ? "black" : "white") + "\"/>\n";
    }
    out += "</g>\n</svg>\n";
    return out;
}

}  // namespace dasim::harness
