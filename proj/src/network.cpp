#include "visrisk/network.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "visrisk/csv.hpp"
#include "visrisk/error.hpp"
#include "visrisk/kernels.hpp"

namespace visrisk::network {

std::vector<OccurrenceRecord> ingest_occurrences(std::istream& in) {
    const auto table = csv::read(in);
    const auto c_doc = table.column("doc_id");
    const auto c_time = table.column("time");
    const auto c_entity = table.column("entity");
    const auto c_text = table.find_column("text");

    std::vector<OccurrenceRecord> records;
    std::unordered_map<std::string, std::size_t> by_doc;
    for (const auto& row : table.rows) {
        auto get = [&](std::size_t c) -> std::string { return c < row.fields.size() ? row.fields[c] : std::string{}; };
        const std::string where = " at row " + std::to_string(row.line);
        const auto doc = get(c_doc);
        const auto entity = get(c_entity);
        if (doc.empty()) throw DataError("empty doc_id" + where);
        if (entity.empty()) throw DataError("empty entity" + where);
        auto tp = TimePoint::parse(get(c_time));
        if (!tp) throw DataError("unparseable time '" + get(c_time) + "'" + where);

        auto [it, inserted] = by_doc.try_emplace(doc, records.size());
        if (inserted) records.push_back({doc, *tp, {}, std::nullopt});
        auto& rec = records[it->second];
        if (!(rec.time == *tp)) throw DataError("document '" + doc + "' has conflicting times" + where);
        rec.mentions.insert(entity);
        if (c_text != std::string::npos && !rec.text && !get(c_text).empty()) rec.text = get(c_text);
    }
    return records;
}

bool Window::contains(const TimePoint& t) const {
    if (start && t < *start) return false;
    if (end && *end < t) return false;
    return true;
}

CooccurrenceNetwork build_cooccurrence(const std::vector<OccurrenceRecord>& records, const Window& window) {
    CooccurrenceNetwork net;
    net.window = window;
    for (const auto& rec : records) {
        if (!window.contains(rec.time)) continue;
        for (auto a = rec.mentions.begin(); a != rec.mentions.end(); ++a) {
            ++net.nodes[*a];
            for (auto b = std::next(a); b != rec.mentions.end(); ++b) ++net.edges[{*a, *b}];
        }
    }
    return net;
}

std::vector<double> edge_styling(const CooccurrenceNetwork& network) {
    std::size_t w_max = 0;
    for (const auto& [_, w] : network.edges) w_max = std::max(w_max, w);
    std::vector<double> out;
    out.reserve(network.edges.size());
    const double denom = std::log1p(static_cast<double>(w_max));
    for (const auto& [_, w] : network.edges)
        out.push_back(w == w_max ? 1.0 : std::log1p(static_cast<double>(w)) / denom);
    return out;
}

std::optional<std::size_t> LayoutState::index(const std::string& node) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), node);
    if (it == nodes.end() || *it != node) return std::nullopt;
    return static_cast<std::size_t>(it - nodes.begin());
}

namespace {

struct EdgeIndex {
    std::size_t a, b;
};

std::vector<EdgeIndex> edge_indices(const CooccurrenceNetwork& net, const LayoutState& layout) {
    std::vector<EdgeIndex> edges;
    edges.reserve(net.edges.size());
    for (const auto& [key, _] : net.edges) edges.push_back({*layout.index(key.first), *layout.index(key.second)});
    return edges;
}

// Runs `iterations` force steps, cooling linearly from t0 to t_end. Nodes with
// fixed[i] set never move.
void relax(LayoutState& layout, const std::vector<EdgeIndex>& edges, const std::vector<unsigned char>& fixed,
           std::size_t iterations, double t0, double t_end) {
    const std::size_t n = layout.positions.size();
    if (n == 0 || iterations == 0) return;
    const double k = layout.k, k2 = k * k;
    const double tiny = 1e-6 * k;
    const auto& kern = kernels::active_kernels();
    std::mt19937_64 jitter_rng(layout.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> jitter(-tiny, tiny);

    std::vector<double> xs(n), ys(n), fx(n), fy(n), dx(n), dy(n);
    for (std::size_t it = 0; it < iterations; ++it) {
        const double temp =
            iterations == 1 ? t_end
                            : t0 + (t_end - t0) * static_cast<double>(it) / static_cast<double>(iterations - 1);

        // Separate coincident nodes before evaluating forces.
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (layout.positions[i] == layout.positions[j]) {
                    const std::size_t mv = fixed[j] ? i : j;
                    if (fixed[mv]) continue;
                    layout.positions[mv].x += jitter(jitter_rng);
                    layout.positions[mv].y += jitter(jitter_rng);
                }

        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = layout.positions[i].x;
            ys[i] = layout.positions[i].y;
        }
        for (std::size_t i = 0; i < n; ++i) {
            kern.repulsion(xs[i], ys[i], xs.data(), ys.data(), n, k2, fx.data(), fy.data());
            double sx = 0.0, sy = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                sx += fx[j];
                sy += fy[j];
            }
            dx[i] = sx;
            dy[i] = sy;
        }
        for (const auto& e : edges) {
            const double ex = xs[e.a] - xs[e.b], ey = ys[e.a] - ys[e.b];
            const double d = std::sqrt(ex * ex + ey * ey);
            if (d == 0.0) continue;
            // (delta / d) * d^2 / k
            const double s = d / k;
            dx[e.a] -= ex * s;
            dy[e.a] -= ey * s;
            dx[e.b] += ex * s;
            dy[e.b] += ey * s;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (fixed[i]) continue;
            const double len = std::sqrt(dx[i] * dx[i] + dy[i] * dy[i]);
            if (len > 0.0) {
                const double step = std::min(len, temp) / len;
                layout.positions[i].x += dx[i] * step;
                layout.positions[i].y += dy[i] * step;
            }
            layout.positions[i].x = std::clamp(layout.positions[i].x, 0.0, layout.width);
            layout.positions[i].y = std::clamp(layout.positions[i].y, 0.0, layout.height);
        }
        layout.temperature = temp;
    }
}

}  // namespace

LayoutState fr_layout(const CooccurrenceNetwork& network, const LayoutParams& params) {
    if (network.nodes.empty()) throw DataError("layout requires at least one node");
    if (!(params.width > 0.0) || !(params.height > 0.0)) throw std::invalid_argument("frame must have positive area");
    if (!(params.spread > 0.0)) throw std::invalid_argument("spread must be positive");
    LayoutState layout;
    for (const auto& [id, _] : network.nodes) layout.nodes.push_back(id);
    const std::size_t n = layout.nodes.size();
    layout.width = params.width;
    layout.height = params.height;
    layout.seed = params.seed;
    layout.k = params.spread * std::sqrt(params.width * params.height / static_cast<double>(n));

    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> ux(0.0, params.width), uy(0.0, params.height);
    layout.positions.resize(n);
    for (auto& p : layout.positions) {
        p.x = ux(rng);
        p.y = uy(rng);
    }
    const double t0 = params.width / 10.0;
    const double t_end = params.width / (10.0 * static_cast<double>(std::max<std::size_t>(params.iterations, 1)));
    layout.temperature = t0;
    relax(layout, edge_indices(network, layout), std::vector<unsigned char>(n, 0), params.iterations, t0, t_end);
    return layout;
}

LayoutState pin_and_relax(const CooccurrenceNetwork& network, const LayoutState& layout,
                          const std::map<std::string, Point>& pinned, std::size_t iterations) {
    LayoutState out = layout;
    std::vector<std::string> expected;
    for (const auto& [id, _] : network.nodes) expected.push_back(id);
    if (expected != layout.nodes) throw InvalidRequestError("layout does not match the network's node set");
    std::vector<unsigned char> fixed(out.nodes.size(), 0);
    for (const auto& [id, pos] : pinned) {
        auto i = out.index(id);
        if (!i) throw NotFoundError("unknown node '" + id + "'");
        if (!std::isfinite(pos.x) || !std::isfinite(pos.y)) throw InvalidRequestError("pinned position not finite");
        out.positions[*i] = {std::clamp(pos.x, 0.0, out.width), std::clamp(pos.y, 0.0, out.height)};
        fixed[*i] = 1;
    }
    const double t0 = out.width / 50.0;
    const double t_end = out.width / (10.0 * static_cast<double>(std::max<std::size_t>(iterations, 1)));
    relax(out, edge_indices(network, out), fixed, iterations, t0, std::min(t0, t_end));
    return out;
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || (c & 0x80); }

bool contains_word(const std::string& haystack, const std::string& needle) {
    if (needle.empty()) return false;
    for (std::size_t pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) {
        const bool left = pos == 0 || !word_char(haystack[pos - 1]);
        const std::size_t end = pos + needle.size();
        const bool right = end == haystack.size() || !word_char(haystack[end]);
        if (left && right) return true;
    }
    return false;
}

}  // namespace

double distress_share(const std::vector<OccurrenceRecord>& records, const std::string& entity,
                      const std::vector<std::string>& terms, const Window& window) {
    std::vector<std::string> lowered;
    for (const auto& t : terms) lowered.push_back(lower(t));
    std::size_t mentioning = 0, distressed = 0;
    for (const auto& rec : records) {
        if (!window.contains(rec.time) || !rec.mentions.contains(entity)) continue;
        ++mentioning;
        if (!rec.text) continue;
        const auto text = lower(*rec.text);
        if (std::any_of(lowered.begin(), lowered.end(), [&](const auto& w) { return contains_word(text, w); }))
            ++distressed;
    }
    return mentioning == 0 ? 0.0 : static_cast<double>(distressed) / static_cast<double>(mentioning);
}

}  // namespace visrisk::network
