#include "visrisk/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "visrisk/api.hpp"
#include "visrisk/error.hpp"

namespace visrisk::svg {
namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 540.0;
constexpr double kMargin = 48.0;

std::string escape(const std::string& s) {
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

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

// Categorical palette for series.
std::string series_color(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b",
                                    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#d62728"};
    return palette[i % 10];
}

class Canvas {
public:
    Canvas(const std::string& title) {
        out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
             << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
             << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
             << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
        text(kMargin, 24, title, 16, "start");
    }

    void text(double x, double y, const std::string& s, int size = 11, const char* anchor = "middle") {
        out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\" font-size=\"" << size
             << "\" text-anchor=\"" << anchor << "\">" << escape(s) << "</text>\n";
    }
    void rect(double x, double y, double w, double h, const std::string& fill, const std::string& extra = "") {
        out_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
             << "\" fill=\"" << fill << "\" " << extra << "/>\n";
    }
    void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1.0,
              const std::string& extra = "") {
        out_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
             << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width) << "\" " << extra << "/>\n";
    }
    void circle(double x, double y, double r, const std::string& fill, const std::string& extra = "") {
        out_ << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << num(r) << "\" fill=\"" << fill
             << "\" " << extra << "/>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke, double width = 1.5) {
        if (pts.empty()) return;
        out_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width) << "\" points=\"";
        for (const auto& [x, y] : pts) out_ << num(x) << ',' << num(y) << ' ';
        out_ << "\"/>\n";
    }
    void polygon(const std::vector<std::pair<double, double>>& pts, const std::string& fill) {
        out_ << "<polygon fill=\"" << fill << "\" fill-opacity=\"0.8\" points=\"";
        for (const auto& [x, y] : pts) out_ << num(x) << ',' << num(y) << ' ';
        out_ << "\"/>\n";
    }
    void raw(const std::string& s) { out_ << s; }

    std::string finish() {
        out_ << "</svg>\n";
        return out_.str();
    }

private:
    std::ostringstream out_;
};

struct TimeRange {
    std::size_t first = 0;
    std::size_t last = 0;  // inclusive
    bool empty = true;
};

TimeRange time_range(const DataCube& cube, const ViewState& st) {
    const auto window = api::parse_window(st.time_from, st.time_to);
    TimeRange r;
    for (std::size_t t = 0; t < cube.time_count(); ++t) {
        if (!window.contains(cube.times()[t])) continue;
        if (r.empty) r.first = t;
        r.last = t;
        r.empty = false;
    }
    return r;
}

std::vector<std::size_t> selected_entities(const DataCube& cube, const ViewState& st) {
    std::vector<std::size_t> out;
    if (st.entities.empty()) {
        for (std::size_t e = 0; e < cube.entity_count(); ++e) out.push_back(e);
    } else {
        for (const auto& id : st.entities) out.push_back(cube.require_entity(id));
    }
    return out;
}

void axes(Canvas& c, const std::string& y_label) {
    c.line(kMargin, kHeight - kMargin, kWidth - kMargin, kHeight - kMargin, "#333333");
    c.line(kMargin, kMargin, kMargin, kHeight - kMargin, "#333333");
    c.text(14, kHeight / 2, y_label, 11, "middle");
}

// Layer selectors of the map views; other views fall back to their default.
bool layer_keyword(const std::optional<std::string>& s) { return s && (*s == "state" || *s == "structural"); }

void empty_state(Canvas& c, const std::string& message) { c.text(kWidth / 2, kHeight / 2, message, 14); }

std::string render_dashboard(const Workspace& ws, const ViewState& st) {
    const auto& cube = ws.transformed(st.percentile ? "percentile" : "raw");
    const std::string fallback = cube.indicators().empty() ? "" : cube.indicators().front();
    const std::string indicator = layer_keyword(st.indicator) ? fallback : st.indicator.value_or(fallback);
    Canvas c("Dashboard: " + indicator + (st.percentile ? " (percentiles)" : ""));
    const auto k = cube.require_indicator(indicator);
    const auto range = time_range(cube, st);
    const auto entities = selected_entities(cube, st);
    if (range.empty) {
        empty_state(c, "No data in the selected time span");
        return c.finish();
    }
    double lo = INFINITY, hi = -INFINITY;
    for (auto e : entities)
        for (std::size_t t = range.first; t <= range.last; ++t)
            if (cube.observed(e, t, k)) {
                lo = std::min(lo, cube.value(e, t, k));
                hi = std::max(hi, cube.value(e, t, k));
            }
    if (!(hi >= lo)) {
        empty_state(c, "No observations for the selection");
        return c.finish();
    }
    if (hi == lo) {
        hi += 0.5;
        lo -= 0.5;
    }
    axes(c, indicator);
    const double span = static_cast<double>(std::max<std::size_t>(range.last - range.first, 1));
    auto X = [&](std::size_t t) { return kMargin + (kWidth - 2 * kMargin) * static_cast<double>(t - range.first) / span; };
    auto Y = [&](double v) { return kHeight - kMargin - (kHeight - 2 * kMargin) * (v - lo) / (hi - lo); };
    c.text(kMargin, kHeight - kMargin + 16, cube.times()[range.first].label, 10, "start");
    c.text(kWidth - kMargin, kHeight - kMargin + 16, cube.times()[range.last].label, 10, "end");
    c.text(kMargin - 4, Y(hi) + 4, num(hi), 10, "end");
    c.text(kMargin - 4, Y(lo) + 4, num(lo), 10, "end");

    for (std::size_t i = 0; i < entities.size(); ++i) {
        const auto e = entities[i];
        std::vector<std::pair<double, double>> pts;
        for (std::size_t t = range.first; t <= range.last; ++t) {
            if (!cube.observed(e, t, k)) {
                c.polyline(pts, series_color(i));
                pts.clear();
                continue;
            }
            pts.emplace_back(X(t), Y(cube.value(e, t, k)));
        }
        c.polyline(pts, series_color(i));
        c.text(kWidth - kMargin + 4, kMargin + 12.0 * static_cast<double>(i), cube.entities()[e], 9, "start");
    }
    for (const auto& ev : ws.events) {
        if (std::find(st.events.begin(), st.events.end(), event_id(ev)) == st.events.end()) continue;
        auto t = cube.time_index(ev.start.label);
        if (!t || *t < range.first || *t > range.last) continue;
        c.line(X(*t), kMargin, X(*t), kHeight - kMargin, "#444444", 1.0, "stroke-dasharray=\"4 3\"");
        c.text(X(*t), kMargin - 4, ev.entity + ": " + ev.label, 9);
    }
    return c.finish();
}

std::string render_ewm(const Workspace& ws, const ViewState& st) {
    Canvas c("Early-warning model");
    if (!ws.risk) throw NotFoundError("no early-warning scores published");
    const auto& cube = ws.cube;
    const auto range = time_range(cube, st);
    if (range.empty) {
        empty_state(c, "No data in the selected time span");
        return c.finish();
    }
    const auto entities = selected_entities(cube, st);
    const double span = static_cast<double>(std::max<std::size_t>(range.last - range.first, 1));
    auto X = [&](std::size_t t) { return kMargin + (kWidth - 2 * kMargin) * static_cast<double>(t - range.first) / span; };
    std::map<std::pair<std::string, std::string>, const ewm::RiskRow*> by_key;
    for (const auto& r : ws.risk->rows)
        if (r.scored) by_key[{r.entity, r.time}] = &r;
    auto row_of = [&](std::size_t e, std::size_t t) -> const ewm::RiskRow* {
        auto it = by_key.find({cube.entities()[e], cube.times()[t].label});
        return it == by_key.end() ? nullptr : it->second;
    };
    c.text(kMargin, kHeight - kMargin + 16, cube.times()[range.first].label, 10, "start");
    c.text(kWidth - kMargin, kHeight - kMargin + 16, cube.times()[range.last].label, 10, "end");

    if (entities.size() == 1) {
        // Stacked contributions of the indicator groups for a single entity.
        const auto e = entities.front();
        const std::size_t G = ws.risk->groups.size();
        double lo = 0.0, hi = 0.0;
        for (std::size_t t = range.first; t <= range.last; ++t)
            if (auto r = row_of(e, t)) {
                double pos = 0.0, neg = 0.0;
                for (double v : r->contributions) (v >= 0 ? pos : neg) += v;
                hi = std::max(hi, pos);
                lo = std::min(lo, neg);
            }
        if (hi == lo) hi = lo + 1.0;
        auto Y = [&](double v) { return kHeight - kMargin - (kHeight - 2 * kMargin) * (v - lo) / (hi - lo); };
        axes(c, "contribution to score");
        for (std::size_t g = 0; g < G; ++g) {
            std::vector<std::pair<double, double>> top, bottom;
            for (std::size_t t = range.first; t <= range.last; ++t) {
                auto r = row_of(e, t);
                if (!r) continue;
                double base = 0.0;
                const bool positive = r->contributions[g] >= 0;
                for (std::size_t h = 0; h < g; ++h)
                    if ((r->contributions[h] >= 0) == positive) base += r->contributions[h];
                bottom.emplace_back(X(t), Y(base));
                top.emplace_back(X(t), Y(base + r->contributions[g]));
            }
            std::reverse(bottom.begin(), bottom.end());
            top.insert(top.end(), bottom.begin(), bottom.end());
            if (!top.empty()) c.polygon(top, series_color(g));
            c.text(kWidth - kMargin + 4, kMargin + 12.0 * static_cast<double>(g), ws.risk->groups[g], 9, "start");
        }
        c.line(kMargin, Y(0.0), kWidth - kMargin, Y(0.0), "#000000", 0.5);
        for (const auto& ev : ws.events) {
            if (ev.entity != cube.entities()[e]) continue;
            auto t = cube.time_index(ev.start.label);
            if (!t || *t < range.first || *t > range.last) continue;
            c.line(X(*t), kMargin, X(*t), kHeight - kMargin, "#444444", 1.0, "stroke-dasharray=\"4 3\"");
        }
        return c.finish();
    }

    auto Y = [&](double p) { return kHeight - kMargin - (kHeight - 2 * kMargin) * p; };
    axes(c, "probability");
    for (std::size_t i = 0; i < entities.size(); ++i) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t t = range.first; t <= range.last; ++t) {
            auto r = row_of(entities[i], t);
            if (!r) {
                c.polyline(pts, series_color(i));
                pts.clear();
                continue;
            }
            pts.emplace_back(X(t), Y(r->probability));
        }
        c.polyline(pts, series_color(i));
    }
    return c.finish();
}

std::string render_fsm(const Workspace& ws, const ViewState& st) {
    if (!ws.som) throw NotFoundError("no SOM model published");
    const auto& a = *ws.som;
    const auto& m = a.model;
    const bool state_layer = !st.indicator || *st.indicator == "state";
    Canvas c(std::string("Financial Stability Map: ") + (state_layer ? "state layer" : *st.indicator));
    std::vector<double> field(m.unit_count(), 0.5);
    std::vector<std::size_t> partition;
    if (state_layer) {
        if (a.states) partition = a.states->partition;
    } else {
        const auto k = api::som_plane(ws, st.indicator);
        field = k["values"].get<std::vector<double>>();
        const auto [lo, hi] = std::minmax_element(field.begin(), field.end());
        const double l = *lo, h = *hi;
        for (double& v : field) v = h > l ? (v - l) / (h - l) : 0.5;
    }
    const double cell = std::min((kWidth - 2 * kMargin) / static_cast<double>(m.width()),
                                 (kHeight - 2 * kMargin) / static_cast<double>(m.height()));
    auto cx = [&](double col) { return kMargin + cell * (col + 0.5); };
    auto cy = [&](double row) { return kMargin + cell * (row + 0.5); };
    for (std::size_t i = 0; i < m.unit_count(); ++i) {
        const auto g = m.coord(i);
        const std::string fill =
            state_layer ? (partition.empty() ? "#dddddd" : series_color(partition[i])) : ramp(field[i]);
        c.rect(kMargin + cell * g.col, kMargin + cell * g.row, cell, cell, fill,
               "stroke=\"#ffffff\" stroke-width=\"0.5\"" + std::string(state_layer ? " fill-opacity=\"0.5\"" : ""));
    }
    if (state_layer && a.states)
        for (std::size_t cls = 0; cls < a.states->classes.size(); ++cls)
            c.text(kWidth - 150, kMargin + 14.0 * static_cast<double>(cls), a.states->classes[cls], 10, "start");

    for (std::size_t i = 0; i < st.entities.size(); ++i) {
        const auto traj = api::som_trajectory(ws, st.entities[i], st.time_from, st.time_to);
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : traj["coords"]) pts.emplace_back(cx(p[0].get<double>()), cy(p[1].get<double>()));
        c.polyline(pts, "#000000", 1.2);
        if (!pts.empty()) {
            c.circle(pts.back().first, pts.back().second, 3.5, series_color(i));
            c.text(pts.back().first, pts.back().second - 6, st.entities[i], 10);
        }
    }
    return c.finish();
}

std::string render_fsmt(const Workspace& ws, const ViewState& st) {
    if (!ws.sotm) throw NotFoundError("no SOTM model published");
    const auto& a = *ws.sotm;
    const auto& m = a.model;
    const bool structural = st.indicator && *st.indicator == "structural";
    const bool plane = st.indicator && !layer_keyword(st.indicator);
    Canvas c(std::string("Financial Stability Map over Time") + (plane ? ": " + *st.indicator : ""));
    const std::size_t T = m.times().size(), M = m.units();
    if (T == 0 || M == 0) {
        empty_state(c, "Empty model");
        return c.finish();
    }
    Matrix color = sotm::profile_coloring(m);
    if (plane) {
        std::size_t k = m.dim();
        for (std::size_t j = 0; j < m.dim(); ++j)
            if (m.dim_names()[j] == *st.indicator) k = j;
        if (k == m.dim()) throw NotFoundError("unknown indicator '" + *st.indicator + "'");
        color = sotm::component_plane_t(m, k);
        const auto [lo, hi] = std::minmax_element(color.data().begin(), color.data().end());
        const double l = *lo, h = *hi;
        for (double& v : color.data()) v = h > l ? (v - l) / (h - l) : 0.5;
    }
    const Matrix ypos = sotm::structural_positions(m);
    const auto flows = sotm::alluvial_flows(M, a.assignments);
    std::size_t max_size = 1;
    for (const auto& per : flows.node_sizes)
        for (auto s : per) max_size = std::max(max_size, s);

    const double col_w = (kWidth - 2 * kMargin) / static_cast<double>(T);
    const double band = (kHeight - 2 * kMargin) / static_cast<double>(M);
    auto X = [&](std::size_t t) { return kMargin + col_w * (static_cast<double>(t) + 0.5); };
    auto Y = [&](std::size_t t, std::size_t i) {
        const double frac = structural ? ypos(t, i) : (M > 1 ? static_cast<double>(i) / static_cast<double>(M - 1) : 0.5);
        return kMargin + band / 2 + (kHeight - 2 * kMargin - band) * frac;
    };
    for (const auto& tr : flows.transitions) {
        const double w = std::max(0.5, band * 0.8 * static_cast<double>(tr.entities.size()) / static_cast<double>(max_size));
        c.line(X(tr.time), Y(tr.time, tr.from), X(tr.time + 1), Y(tr.time + 1, tr.to), "#9aa7b8", w,
               "stroke-opacity=\"0.5\"");
    }
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < M; ++i) {
            const std::size_t size = t < flows.node_sizes.size() ? flows.node_sizes[t][i] : 0;
            const double h = std::max(1.0, band * 0.8 * static_cast<double>(size) / static_cast<double>(max_size));
            c.rect(X(t) - col_w * 0.3, Y(t, i) - h / 2, col_w * 0.6, h, ramp(color(t, i)));
        }
    }
    c.text(X(0), kHeight - kMargin + 16, m.times().front(), 10, "start");
    c.text(X(T - 1), kHeight - kMargin + 16, m.times().back(), 10, "end");

    for (std::size_t s = 0; s < st.entities.size(); ++s) {
        const auto& ents = a.assignments.entities;
        auto it = std::find(ents.begin(), ents.end(), st.entities[s]);
        if (it == ents.end()) throw NotFoundError("unknown entity '" + st.entities[s] + "'");
        const auto e = static_cast<std::size_t>(it - ents.begin());
        std::vector<std::pair<double, double>> pts;
        for (std::size_t t = 0; t < T; ++t)
            if (const auto& u = a.assignments.at(e, t)) pts.emplace_back(X(t), Y(t, *u));
        c.polyline(pts, series_color(s), 2.0);
    }
    return c.finish();
}

std::string render_bim(const Workspace& ws, const ViewState& st) {
    auto v = api::network_view(ws, api::parse_window(st.time_from, st.time_to), st.seed.value_or(ws.layout.seed));
    Canvas c("Bank Interrelation Map");
    if (v.net.nodes.empty()) {
        empty_state(c, "No records in the selected time span");
        return c.finish();
    }
    if (!st.pinned.empty()) v.layout = network::pin_and_relax(v.net, v.layout, st.pinned, 50);
    const double sx = (kWidth - 2 * kMargin) / v.layout.width, sy = (kHeight - 2 * kMargin) / v.layout.height;
    auto X = [&](std::size_t i) { return kMargin + sx * v.layout.positions[i].x; };
    auto Y = [&](std::size_t i) { return kMargin + sy * v.layout.positions[i].y; };
    const auto darkness = network::edge_styling(v.net);
    std::size_t e = 0;
    for (const auto& [key, _] : v.net.edges) {
        const auto a = *v.layout.index(key.first), b = *v.layout.index(key.second);
        const int grey = static_cast<int>(std::lround(220.0 * (1.0 - darkness[e++])));
        char color[8];
        std::snprintf(color, sizeof color, "#%02x%02x%02x", grey, grey, grey);
        c.line(X(a), Y(a), X(b), Y(b), color, 1.0);
    }
    std::size_t max_count = 1;
    for (const auto& [_, n] : v.net.nodes) max_count = std::max(max_count, n);
    std::size_t i = 0;
    for (const auto& [id, count] : v.net.nodes) {
        const double r = 3.0 + 12.0 * std::sqrt(static_cast<double>(count) / static_cast<double>(max_count));
        const bool distressed = v.distress[i] >= 0.5;
        const bool highlighted = std::find(st.entities.begin(), st.entities.end(), id) != st.entities.end();
        c.circle(X(i), Y(i), r, distressed ? "#d95f02" : "#1b9e77",
                 highlighted ? "stroke=\"#000000\" stroke-width=\"2\"" : "fill-opacity=\"0.85\"");
        c.text(X(i), Y(i) - r - 2, id, 9);
        ++i;
    }
    return c.finish();
}

}  // namespace

std::string ramp(double t) {
    t = std::clamp(std::isfinite(t) ? t : 0.5, 0.0, 1.0);
    // blue (#2166ac) to yellow (#fde725)
    const int r = static_cast<int>(std::lround(0x21 + (0xfd - 0x21) * t));
    const int g = static_cast<int>(std::lround(0x66 + (0xe7 - 0x66) * t));
    const int b = static_cast<int>(std::lround(0xac + (0x25 - 0xac) * t));
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

std::string render(const Workspace& ws, const ViewState& state) {
    switch (state.view) {
        case View::Dashboard: return render_dashboard(ws, state);
        case View::Ewm: return render_ewm(ws, state);
        case View::Fsm: return render_fsm(ws, state);
        case View::Fsmt: return render_fsmt(ws, state);
        case View::Bim: return render_bim(ws, state);
    }
    throw InvalidRequestError("unknown view");
}

}  // namespace visrisk::svg
