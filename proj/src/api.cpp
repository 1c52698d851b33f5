#include "visrisk/api.hpp"

#include <charconv>

#include "visrisk/error.hpp"
#include "visrisk/viewstate.hpp"

namespace visrisk {

std::string event_id(const EventRecord& ev) { return ev.entity + "@" + ev.start.label; }

}  // namespace visrisk

namespace visrisk::api {
namespace {

const std::string& require(const Param& p, const char* name) {
    if (!p || p->empty()) throw InvalidRequestError(std::string("missing parameter '") + name + "'");
    return *p;
}

std::string transform_of(const Param& p) {
    if (!p || p->empty() || *p == "raw") return "raw";
    if (*p == "percentile") return "percentile";
    throw InvalidRequestError("transform must be 'raw' or 'percentile'");
}

std::uint64_t parse_seed(const Param& p, std::uint64_t fallback) {
    if (!p || p->empty()) return fallback;
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(p->data(), p->data() + p->size(), v);
    if (ec != std::errc{} || ptr != p->data() + p->size()) throw InvalidRequestError("seed must be an unsigned integer");
    return v;
}

const artifacts::SomArtifact& require_som(const Workspace& ws) {
    if (!ws.som) throw NotFoundError("no SOM model published");
    return *ws.som;
}

const artifacts::SotmArtifact& require_sotm(const Workspace& ws) {
    if (!ws.sotm) throw NotFoundError("no SOTM model published");
    return *ws.sotm;
}

std::size_t dim_index(const std::vector<std::string>& names, const std::string& id) {
    for (std::size_t k = 0; k < names.size(); ++k)
        if (names[k] == id) return k;
    throw NotFoundError("unknown indicator '" + id + "'");
}

nlohmann::json parse_body(const std::string& body) {
    auto doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw InvalidRequestError("request body must be a JSON object");
    return doc;
}

Param member(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
    if (doc.at(key).is_string()) return doc.at(key).get<std::string>();
    if (doc.at(key).is_number_unsigned()) return std::to_string(doc.at(key).get<std::uint64_t>());
    throw InvalidRequestError(std::string("'") + key + "' has the wrong type");
}

std::map<std::string, network::Point> points(const nlohmann::json& doc, const char* key) {
    std::map<std::string, network::Point> out;
    if (!doc.contains(key)) return out;
    const auto& obj = doc.at(key);
    if (!obj.is_object()) throw InvalidRequestError(std::string("'") + key + "' must be an object");
    for (const auto& [id, xy] : obj.items()) {
        if (!xy.is_array() || xy.size() != 2 || !xy[0].is_number() || !xy[1].is_number())
            throw InvalidRequestError("positions must be [x, y] pairs");
        out[id] = {xy[0].get<double>(), xy[1].get<double>()};
    }
    return out;
}

}  // namespace

Json meta(const Workspace& ws) {
    Json doc;
    doc["version"] = ws.version;
    doc["entities"] = ws.cube.entities();
    Json times = Json::array();
    for (const auto& t : ws.cube.times()) times.push_back(t.label);
    doc["times"] = std::move(times);
    doc["indicators"] = ws.cube.indicators();
    doc["views"] = {"dashboard", "ewm", "fsm", "fsmt", "bim"};
    doc["available"] = {{"som", ws.som.has_value()},
                        {"sotm", ws.sotm.has_value()},
                        {"network", !ws.occurrences.empty()},
                        {"ewm", ws.risk.has_value()}};
    Json groups = Json::array();
    if (ws.ewm)
        for (const auto& g : ws.ewm->groups) groups.push_back(g.name);
    doc["ewm_groups"] = std::move(groups);
    doc["distress_terms"] = ws.distress_terms;
    return doc;
}

Json cube_panel(const Workspace& ws, const Param& indicator, const Param& transform) {
    const auto tf = transform_of(transform);
    auto doc = artifacts::slice_to_json(slice_indicator_panel(ws.transformed(tf), require(indicator, "indicator")));
    doc["indicator"] = *indicator;
    doc["transform"] = tf;
    return doc;
}

Json cube_series(const Workspace& ws, const Param& entity, const Param& transform) {
    const auto tf = transform_of(transform);
    auto doc = artifacts::slice_to_json(slice_entity_series(ws.transformed(tf), require(entity, "entity")));
    doc["entity"] = *entity;
    doc["transform"] = tf;
    return doc;
}

Json events(const Workspace& ws) {
    auto list = artifacts::events_to_json(ws.events);
    for (std::size_t i = 0; i < ws.events.size(); ++i) list[i]["id"] = event_id(ws.events[i]);
    return {{"events", std::move(list)}};
}

Json som(const Workspace& ws) {
    const auto& a = require_som(ws);
    auto doc = artifacts::som_to_json(a);
    Json coords = Json::array();
    for (std::size_t i = 0; i < a.model.unit_count(); ++i) {
        const auto c = a.model.coord(i);
        coords.push_back({c.col, c.row});
    }
    doc["coords"] = std::move(coords);
    return doc;
}

Json som_plane(const Workspace& ws, const Param& indicator) {
    const auto& a = require_som(ws);
    const auto k = dim_index(a.model.dim_names(), require(indicator, "indicator"));
    return {{"indicator", *indicator},
            {"width", a.model.width()},
            {"height", a.model.height()},
            {"values", som::component_plane(a.model, k)}};
}

Json som_trajectory(const Workspace& ws, const Param& entity, const Param& from, const Param& to) {
    const auto& a = require_som(ws);
    const auto window = parse_window(from, to);
    const auto& cube = ws.transformed(a.transform);
    const auto e = cube.require_entity(require(entity, "entity"));
    std::vector<PooledRow> rows;
    for (auto& r : entity_rows(cube, e))
        if (window.contains(cube.times()[r.time])) rows.push_back(std::move(r));
    const auto path = som::project_trajectory(a.model, to_masked_rows(rows, cube.indicator_count()));
    Json times = Json::array(), coords = Json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        times.push_back(cube.times()[rows[i].time].label);
        coords.push_back({path[i].col, path[i].row});
    }
    return {{"entity", *entity}, {"times", std::move(times)}, {"coords", std::move(coords)}};
}

Json sotm(const Workspace& ws) { return artifacts::sotm_to_json(require_sotm(ws)); }

Json sotm_plane(const Workspace& ws, const Param& indicator) {
    const auto& a = require_sotm(ws);
    const auto k = dim_index(a.model.dim_names(), require(indicator, "indicator"));
    return {{"indicator", *indicator},
            {"times", a.model.times()},
            {"values", artifacts::matrix_to_json(sotm::component_plane_t(a.model, k))}};
}

network::Window parse_window(const Param& from, const Param& to) {
    network::Window w;
    if (from && !from->empty()) {
        w.start = TimePoint::parse(*from);
        if (!w.start) throw InvalidRequestError("malformed window start '" + *from + "'");
    }
    if (to && !to->empty()) {
        w.end = TimePoint::parse(*to);
        if (!w.end) throw InvalidRequestError("malformed window end '" + *to + "'");
    }
    if (w.start && w.end && *w.end < *w.start) throw InvalidRequestError("window end precedes start");
    return w;
}

NetworkView network_view(const Workspace& ws, const network::Window& window, std::uint64_t seed) {
    NetworkView v;
    v.net = network::build_cooccurrence(ws.occurrences, window);
    if (!v.net.nodes.empty()) {
        auto params = ws.layout;
        params.seed = seed;
        v.layout = network::fr_layout(v.net, params);
    } else {
        v.layout.width = ws.layout.width;
        v.layout.height = ws.layout.height;
        v.layout.seed = seed;
    }
    for (const auto& [id, _] : v.net.nodes)
        v.distress.push_back(network::distress_share(ws.occurrences, id, ws.distress_terms, window));
    return v;
}

Json network(const Workspace& ws, const Param& from, const Param& to, const Param& seed) {
    const auto v = network_view(ws, parse_window(from, to), parse_seed(seed, ws.layout.seed));
    return artifacts::network_to_json(v.net, v.layout, v.distress);
}

Json network_relax(const Workspace& ws, const std::string& body) {
    const auto doc = parse_body(body);
    const auto window = parse_window(member(doc, "from"), member(doc, "to"));
    auto v = network_view(ws, window, parse_seed(member(doc, "seed"), ws.layout.seed));
    if (v.net.nodes.empty()) return artifacts::network_to_json(v.net, v.layout, v.distress);
    for (const auto& [id, p] : points(doc, "positions")) {
        auto i = v.layout.index(id);
        if (!i) throw NotFoundError("unknown node '" + id + "'");
        v.layout.positions[*i] = p;
    }
    std::size_t iterations = 50;
    if (doc.contains("iterations")) {
        if (!doc.at("iterations").is_number_unsigned()) throw InvalidRequestError("iterations must be unsigned");
        iterations = std::min<std::size_t>(doc.at("iterations").get<std::size_t>(), 5000);
    }
    v.layout = network::pin_and_relax(v.net, v.layout, points(doc, "pinned"), iterations);
    return artifacts::network_to_json(v.net, v.layout, v.distress);
}

Json ewm(const Workspace& ws, const Param& entity) {
    if (!ws.risk) throw NotFoundError("no early-warning scores published");
    if (entity && !entity->empty()) ws.cube.require_entity(*entity);
    Json doc;
    doc["groups"] = ws.risk->groups;
    doc["bias"] = ws.risk->bias;
    auto all = artifacts::risk_to_json(*ws.risk);
    Json rows = Json::array();
    for (auto& r : all["rows"])
        if (!entity || entity->empty() || r["entity"] == *entity) rows.push_back(r);
    doc["rows"] = std::move(rows);
    if (entity && !entity->empty()) {
        Json evs = Json::array();
        for (const auto& ev : ws.events)
            if (ev.entity == *entity) evs.push_back({{"id", event_id(ev)}, {"start", ev.start.label}, {"label", ev.label}});
        doc["events"] = std::move(evs);
    }
    return doc;
}

Json post_state(const std::string& body) {
    const auto state = state_from_json(parse_body(body));
    return {{"token", encode_state(state)}};
}

Json get_state(const std::string& token) { return state_to_json(decode_state(token)); }

}  // namespace visrisk::api
