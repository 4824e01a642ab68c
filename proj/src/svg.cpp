#include "crl/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace crl {

namespace {

constexpr double kCell = 60.0;
constexpr double kMargin = 30.0;

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string header(double w, double h) {
    return fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        w, h, w, h);
}

}  // namespace

std::string policy_svg(const GridworldSpec& grid, const std::vector<int>& actions,
                       const PolicyMapAnnotations& annotations) {
    if (static_cast<int>(actions.size()) != grid.num_states()) {
        throw PreconditionError("policy map needs one action per grid cell");
    }
    const double w = grid.width * kCell + 2 * kMargin;
    const double h = grid.height * kCell + 2 * kMargin;
    std::string svg = header(w, h);
    svg += "<defs><marker id=\"head\" markerWidth=\"6\" markerHeight=\"6\" refX=\"3\" refY=\"3\" orient=\"auto\">"
           "<path d=\"M0,0 L6,3 L0,6 z\" fill=\"black\"/></marker></defs>\n";
    if (!annotations.title.empty()) {
        svg += fmt::format("<text x=\"{:.1f}\" y=\"18\" text-anchor=\"middle\">{}</text>\n", w / 2,
                           escape(annotations.title));
    }
    for (int s = 0; s < grid.num_states(); ++s) {
        const Cell c = grid.cell_of(s);
        const double x = kMargin + c.col * kCell;
        const double y = kMargin + c.row * kCell;
        const double r = grid.reward_at(c);
        const char* fill = r > grid.default_reward ? "#b7e4b0" : r < grid.default_reward ? "#f4b6b6" : "#f7f7f7";
        svg += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"{}\" "
                           "stroke=\"#999\"/>\n",
                           x, y, kCell, kCell, fill);
        if (c == grid.start) {
            svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"10\">S</text>\n", x + 4, y + 12);
        }
        const int a = actions[s];
        if (a < 0 || a >= kNumGridActions) throw PreconditionError("action index out of range for a gridworld");
        if (static_cast<Action>(a) == Action::Nothing) continue;
        static constexpr int dr[] = {-1, 1, 0, 0};
        static constexpr int dc[] = {0, 0, -1, 1};
        const double cx = x + kCell / 2, cy = y + kCell / 2, len = kCell * 0.3;
        svg += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"black\" "
                           "stroke-width=\"2\" marker-end=\"url(#head)\"/>\n",
                           cx - dc[a] * len, cy - dr[a] * len, cx + dc[a] * len, cy + dr[a] * len);
    }
    for (Cell c : annotations.outlined) {
        svg += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
                           "stroke=\"#1f5fd6\" stroke-width=\"4\"/>\n",
                           kMargin + c.col * kCell + 2, kMargin + c.row * kCell + 2, kCell - 4, kCell - 4);
    }
    svg += "</svg>\n";
    return svg;
}

std::string policy_svg(const GridworldSpec& grid, const TabularPolicy& policy,
                       const PolicyMapAnnotations& annotations, double tie_tolerance) {
    if (policy.num_states() != grid.num_states() || policy.num_actions() != kNumGridActions) {
        throw PreconditionError("policy is not defined on this gridworld");
    }
    return policy_svg(grid, policy.argmax(tie_tolerance), annotations);
}

std::vector<HistogramBin> histogram(const std::vector<double>& values, int bins, double lo, double hi) {
    if (bins < 1 || !(hi > lo)) throw PreconditionError("histogram needs bins >= 1 and hi > lo");
    std::vector<HistogramBin> out(bins);
    for (int i = 0; i < bins; ++i) {
        out[i].lo = lo + (hi - lo) * i / bins;
        out[i].hi = lo + (hi - lo) * (i + 1) / bins;
    }
    for (double v : values) {
        int i = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
        out[std::clamp(i, 0, bins - 1)].count += 1;
    }
    return out;
}

namespace {

struct Frame {
    double left = 60, top = 40, width = 400, height = 240;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    double px(double x) const { return left + (x - x0) / (x1 - x0) * width; }
    double py(double y) const { return top + height - (y - y0) / (y1 - y0) * height; }
};

std::string axes(const Frame& f, const std::string& title, const std::string& xlabel, const std::string& ylabel,
                 int x_ticks, bool log_x) {
    std::string svg = header(f.left + f.width + 30, f.top + f.height + 50);
    svg += fmt::format("<text x=\"{:.1f}\" y=\"20\" text-anchor=\"middle\">{}</text>\n", f.left + f.width / 2,
                       escape(title));
    svg += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
                       "stroke=\"black\"/>\n",
                       f.left, f.top, f.width, f.height);
    for (int i = 0; i <= x_ticks; ++i) {
        const double x = f.x0 + (f.x1 - f.x0) * i / x_ticks;
        const double label = log_x ? std::pow(10.0, x) : x;
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:g}</text>\n", f.px(x),
                           f.top + f.height + 16, label);
    }
    for (int i = 0; i <= 4; ++i) {
        const double y = f.y0 + (f.y1 - f.y0) * i / 4;
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:g}</text>\n", f.left - 6,
                           f.py(y) + 4, y);
    }
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", f.left + f.width / 2,
                       f.top + f.height + 38, escape(xlabel));
    svg += fmt::format("<text x=\"14\" y=\"{:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.1f})\">{}"
                       "</text>\n",
                       f.top + f.height / 2, f.top + f.height / 2, escape(ylabel));
    return svg;
}

}  // namespace

std::string histogram_svg(const std::vector<HistogramBin>& bins, double marker, const std::string& title,
                          const std::string& xlabel) {
    if (bins.empty()) throw PreconditionError("histogram has no bins");
    Frame f;
    f.x0 = bins.front().lo;
    f.x1 = bins.back().hi;
    int peak = 1;
    for (const auto& b : bins) peak = std::max(peak, b.count);
    f.y1 = peak;
    std::string svg = axes(f, title, xlabel, "count", 5, false);
    for (const auto& b : bins) {
        svg += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"#4c78a8\" "
                           "stroke=\"white\"/>\n",
                           f.px(b.lo), f.py(b.count), f.px(b.hi) - f.px(b.lo), f.py(0) - f.py(b.count));
    }
    svg += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#d62728\" "
                       "stroke-dasharray=\"5,4\" stroke-width=\"2\"/>\n",
                       f.px(marker), f.top, f.px(marker), f.top + f.height);
    svg += "</svg>\n";
    return svg;
}

std::string curve_svg(const std::vector<CurvePoint>& points, bool log_x, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel) {
    if (points.empty()) throw PreconditionError("curve has no points");
    auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
    Frame f;
    f.x0 = tx(points.front().x);
    f.x1 = tx(points.back().x);
    if (f.x1 == f.x0) f.x1 = f.x0 + 1;
    int ticks = log_x ? static_cast<int>(std::round(f.x1 - f.x0)) : 4;
    std::string svg = axes(f, title, xlabel, ylabel, std::max(ticks, 1), log_x);
    std::string line;
    for (const auto& p : points) {
        const double x = f.px(tx(p.x));
        line += fmt::format("{:.1f},{:.1f} ", x, f.py(p.mean));
        svg += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#4c78a8\"/>\n", x,
                           f.py(std::clamp(p.mean - p.std, 0.0, 1.0)), x, f.py(std::clamp(p.mean + p.std, 0.0, 1.0)));
        svg += fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"4\" fill=\"#4c78a8\"/>\n", x, f.py(p.mean));
    }
    line.pop_back();
    svg += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"#4c78a8\" stroke-width=\"2\"/>\n", line);
    svg += "</svg>\n";
    return svg;
}

std::string scatter_svg(const std::vector<std::pair<double, double>>& points, const std::string& title,
                        const std::string& xlabel, const std::string& ylabel) {
    Frame f;
    f.width = 300;
    f.height = 300;
    std::string svg = axes(f, title, xlabel, ylabel, 4, false);
    svg += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#999\" "
                       "stroke-dasharray=\"4,4\"/>\n",
                       f.px(0), f.py(0), f.px(1), f.py(1));
    for (const auto& [x, y] : points) {
        svg += fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"3\" fill=\"#4c78a8\" fill-opacity=\"0.6\"/>\n",
                           f.px(x), f.py(y));
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace crl
