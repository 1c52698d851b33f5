#include "visrisk/artifacts.hpp"

#include <filesystem>
#include <fstream>

#include "visrisk/error.hpp"

namespace visrisk::artifacts {
namespace {

template <class F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed ") + what + " document: " + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("malformed ") + what + " document: " + e.what());
    }
}

Json time_or_null(const std::optional<TimePoint>& t) { return t ? Json(t->label) : Json(nullptr); }

std::vector<std::string> strings(const Json& doc) { return doc.get<std::vector<std::string>>(); }

}  // namespace

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    return rows;
}

Matrix matrix_from_json(const Json& doc) {
    if (!doc.is_array()) throw DataError("matrix must be an array of rows");
    const std::size_t rows = doc.size();
    const std::size_t cols = rows == 0 ? 0 : doc[0].size();
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!doc[r].is_array() || doc[r].size() != cols) throw DataError("ragged matrix");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = doc[r][c].get<double>();
    }
    return m;
}

Json events_to_json(const std::vector<EventRecord>& events) {
    Json out = Json::array();
    for (const auto& ev : events)
        out.push_back({{"entity", ev.entity}, {"start", ev.start.label}, {"end", time_or_null(ev.end)},
                       {"label", ev.label}});
    return out;
}

Json cube_to_json(const DataCube& cube, const std::vector<EventRecord>& events) {
    Json doc;
    doc["entities"] = cube.entities();
    Json times = Json::array();
    for (const auto& t : cube.times()) times.push_back(t.label);
    doc["times"] = times;
    doc["indicators"] = cube.indicators();
    Json values = Json::array();
    for (std::size_t e = 0; e < cube.entity_count(); ++e) {
        Json per_entity = Json::array();
        for (std::size_t t = 0; t < cube.time_count(); ++t) {
            Json row = Json::array();
            for (std::size_t k = 0; k < cube.indicator_count(); ++k)
                row.push_back(cube.observed(e, t, k) ? Json(cube.value(e, t, k)) : Json(nullptr));
            per_entity.push_back(std::move(row));
        }
        values.push_back(std::move(per_entity));
    }
    doc["values"] = std::move(values);
    Json links = Json::object();
    for (const auto& [t, m] : cube.links()) links[cube.times()[t].label] = matrix_to_json(m);
    doc["links"] = std::move(links);
    doc["events"] = events_to_json(events);
    return doc;
}

DataCube cube_from_json(const Json& doc) {
    return guarded("cube", [&] {
        std::vector<TimePoint> times;
        for (const auto& t : doc.at("times")) times.push_back(TimePoint::parse_or_throw(t.get<std::string>()));
        DataCube cube(strings(doc.at("entities")), std::move(times), strings(doc.at("indicators")));
        const auto& values = doc.at("values");
        if (values.size() != cube.entity_count()) throw DataError("cube values do not match the entity axis");
        for (std::size_t e = 0; e < cube.entity_count(); ++e) {
            if (values[e].size() != cube.time_count()) throw DataError("cube values do not match the time axis");
            for (std::size_t t = 0; t < cube.time_count(); ++t) {
                const auto& row = values[e][t];
                if (row.size() != cube.indicator_count())
                    throw DataError("cube values do not match the indicator axis");
                for (std::size_t k = 0; k < cube.indicator_count(); ++k)
                    if (!row[k].is_null()) cube.set(e, t, k, row[k].get<double>());
            }
        }
        if (doc.contains("links"))
            for (const auto& [label, m] : doc.at("links").items()) cube.set_links(cube.require_time(label), matrix_from_json(m));
        return cube;
    });
}

std::vector<EventRecord> events_from_json(const Json& doc) {
    return guarded("events", [&] {
        std::vector<EventRecord> out;
        if (!doc.contains("events")) return out;
        for (const auto& ev : doc.at("events")) {
            EventRecord r{ev.at("entity").get<std::string>(), TimePoint::parse_or_throw(ev.at("start").get<std::string>()),
                          std::nullopt, ev.value("label", std::string{})};
            if (!ev.at("end").is_null()) r.end = TimePoint::parse_or_throw(ev.at("end").get<std::string>());
            out.push_back(std::move(r));
        }
        return out;
    });
}

Json slice_to_json(const CubeSlice& s) {
    auto axis = [](Axis a) {
        switch (a) {
            case Axis::Entity: return "entity";
            case Axis::Time: return "time";
            case Axis::Indicator: return "indicator";
        }
        return "entity";
    };
    Json doc;
    doc["row_axis"] = axis(s.row_axis);
    doc["col_axis"] = axis(s.col_axis);
    doc["rows"] = s.row_labels;
    doc["cols"] = s.col_labels;
    Json values = Json::array();
    for (std::size_t r = 0; r < s.values.rows(); ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < s.values.cols(); ++c)
            row.push_back(s.observed(r, c) ? Json(s.values(r, c)) : Json(nullptr));
        values.push_back(std::move(row));
    }
    doc["values"] = std::move(values);
    return doc;
}

Json state_layer_to_json(const som::StateLayer& layer) {
    Json doc;
    doc["classes"] = layer.classes;
    doc["probabilities"] = matrix_to_json(layer.probabilities);
    doc["partition"] = layer.partition;
    std::vector<bool> inherited(layer.inherited.begin(), layer.inherited.end());
    doc["inherited"] = inherited;
    return doc;
}

som::StateLayer state_layer_from_json(const Json& doc) {
    return guarded("state layer", [&] {
        som::StateLayer layer;
        layer.classes = strings(doc.at("classes"));
        layer.probabilities = matrix_from_json(doc.at("probabilities"));
        layer.partition = doc.at("partition").get<std::vector<std::size_t>>();
        for (bool b : doc.at("inherited").get<std::vector<bool>>()) layer.inherited.push_back(b ? 1 : 0);
        return layer;
    });
}

Json som_to_json(const SomArtifact& a) {
    const auto& m = a.model;
    Json doc;
    doc["grid"] = {{"width", m.width()}, {"height", m.height()}};
    doc["dim_names"] = m.dim_names();
    doc["refs"] = matrix_to_json(m.refs());
    doc["config"] = {{"epochs", m.config().epochs}, {"sigma_final", m.config().sigma_final}, {"seed", m.config().seed}};
    doc["transform"] = a.transform;
    doc["quantization_error"] = a.quantization_error;
    doc["state_layer"] = a.states ? state_layer_to_json(*a.states) : Json(nullptr);
    return doc;
}

SomArtifact som_from_json(const Json& doc) {
    return guarded("SOM", [&] {
        som::TrainConfig cfg;
        const auto& c = doc.at("config");
        cfg.epochs = c.at("epochs").get<std::size_t>();
        cfg.sigma_final = c.at("sigma_final").get<double>();
        cfg.seed = c.at("seed").get<std::uint64_t>();
        SomArtifact a;
        a.model = som::SomModel(doc.at("grid").at("width").get<std::size_t>(),
                                doc.at("grid").at("height").get<std::size_t>(), strings(doc.at("dim_names")),
                                matrix_from_json(doc.at("refs")), cfg);
        a.transform = doc.value("transform", std::string("percentile"));
        a.quantization_error = doc.value("quantization_error", 0.0);
        if (doc.contains("state_layer") && !doc.at("state_layer").is_null())
            a.states = state_layer_from_json(doc.at("state_layer"));
        return a;
    });
}

Json flows_to_json(const sotm::AlluvialFlows& flows, const std::vector<std::string>& times) {
    Json doc;
    doc["node_sizes"] = flows.node_sizes;
    Json transitions = Json::array();
    for (const auto& tr : flows.transitions)
        transitions.push_back({{"from_time", times.at(tr.time)},
                               {"to_time", times.at(tr.time + 1)},
                               {"from", tr.from},
                               {"to", tr.to},
                               {"count", tr.entities.size()},
                               {"entities", tr.entities}});
    doc["transitions"] = std::move(transitions);
    return doc;
}

Json sotm_to_json(const SotmArtifact& a) {
    const auto& m = a.model;
    Json doc;
    doc["times"] = m.times();
    doc["M"] = m.units();
    doc["sigma"] = m.config().sigma;
    doc["epochs_per_slice"] = m.config().epochs_per_slice;
    doc["dim_names"] = m.dim_names();
    doc["transform"] = a.transform;
    Json slices = Json::array();
    for (const auto& s : m.slices()) slices.push_back(matrix_to_json(s));
    doc["slices"] = std::move(slices);
    doc["coloring"] = matrix_to_json(sotm::profile_coloring(m));
    doc["flows"] = flows_to_json(sotm::alluvial_flows(m.units(), a.assignments), m.times());
    doc["structural_positions"] = matrix_to_json(sotm::structural_positions(m));
    Json assignments = Json::object();
    for (std::size_t e = 0; e < a.assignments.entities.size(); ++e) {
        Json per = Json::array();
        for (std::size_t t = 0; t < a.assignments.time_count; ++t) {
            const auto& u = a.assignments.at(e, t);
            per.push_back(u ? Json(*u) : Json(nullptr));
        }
        assignments[a.assignments.entities[e]] = std::move(per);
    }
    doc["assignments"] = std::move(assignments);
    return doc;
}

SotmArtifact sotm_from_json(const Json& doc) {
    return guarded("SOTM", [&] {
        sotm::SotmConfig cfg;
        cfg.units = doc.at("M").get<std::size_t>();
        cfg.sigma = doc.at("sigma").get<double>();
        cfg.epochs_per_slice = doc.at("epochs_per_slice").get<std::size_t>();
        std::vector<Matrix> slices;
        for (const auto& s : doc.at("slices")) {
            auto m = matrix_from_json(s);
            if (m.rows() == 0) m = Matrix(cfg.units, 0);
            slices.push_back(std::move(m));
        }
        SotmArtifact a;
        a.model = sotm::SotmModel(strings(doc.at("times")), strings(doc.at("dim_names")), std::move(slices), cfg);
        a.transform = doc.value("transform", std::string("percentile"));
        a.assignments.time_count = a.model.times().size();
        if (doc.contains("assignments")) {
            for (const auto& [entity, per] : doc.at("assignments").items()) {
                if (per.size() != a.assignments.time_count) throw DataError("assignment length mismatch");
                a.assignments.entities.push_back(entity);
                for (const auto& u : per)
                    a.assignments.units.push_back(u.is_null() ? std::nullopt
                                                              : std::optional<std::size_t>(u.get<std::size_t>()));
            }
        }
        return a;
    });
}

Json network_to_json(const network::CooccurrenceNetwork& net, const network::LayoutState& layout,
                     const std::vector<double>& distress_shares) {
    Json doc;
    Json nodes = Json::array();
    std::size_t i = 0;
    for (const auto& [id, count] : net.nodes) {
        Json node = {{"id", id}, {"count", count}};
        if (auto idx = layout.index(id)) {
            node["x"] = layout.positions[*idx].x;
            node["y"] = layout.positions[*idx].y;
        }
        node["distress_share"] = i < distress_shares.size() ? distress_shares[i] : 0.0;
        nodes.push_back(std::move(node));
        ++i;
    }
    doc["nodes"] = std::move(nodes);
    const auto darkness = network::edge_styling(net);
    Json edges = Json::array();
    i = 0;
    for (const auto& [key, count] : net.edges)
        edges.push_back({{"a", key.first}, {"b", key.second}, {"count", count}, {"darkness", darkness[i++]}});
    doc["edges"] = std::move(edges);
    doc["window"] = {{"from", time_or_null(net.window.start)}, {"to", time_or_null(net.window.end)}};
    doc["layout"] = {{"width", layout.width},
                     {"height", layout.height},
                     {"k", layout.k},
                     {"temperature", layout.temperature},
                     {"seed", layout.seed}};
    return doc;
}

network::LayoutState layout_from_json(const Json& doc) {
    return guarded("layout", [&] {
        network::LayoutState layout;
        const auto& meta = doc.at("layout");
        layout.width = meta.at("width").get<double>();
        layout.height = meta.at("height").get<double>();
        layout.k = meta.at("k").get<double>();
        layout.temperature = meta.at("temperature").get<double>();
        layout.seed = meta.at("seed").get<std::uint64_t>();
        for (const auto& node : doc.at("nodes")) {
            layout.nodes.push_back(node.at("id").get<std::string>());
            layout.positions.push_back({node.at("x").get<double>(), node.at("y").get<double>()});
        }
        return layout;
    });
}

Json ewm_model_to_json(const ewm::EwmModel& model) {
    Json doc;
    Json groups = Json::array();
    for (const auto& g : model.groups) groups.push_back({{"name", g.name}, {"indicators", g.indicators}});
    doc["groups"] = std::move(groups);
    Json weights = Json::object();
    for (const auto& k : model.indicators()) {
        auto it = model.weights.find(k);
        weights[k] = it == model.weights.end() ? 0.0 : it->second;
    }
    doc["weights"] = std::move(weights);
    doc["bias"] = model.bias;
    return doc;
}

ewm::EwmModel ewm_model_from_json(const Json& doc) {
    return guarded("early-warning model", [&] {
        ewm::EwmModel model;
        for (const auto& g : doc.at("groups"))
            model.groups.push_back({g.at("name").get<std::string>(), strings(g.at("indicators"))});
        if (doc.contains("weights"))
            for (const auto& [k, w] : doc.at("weights").items()) model.weights[k] = w.get<double>();
        model.bias = doc.value("bias", 0.0);
        model.validate();
        return model;
    });
}

Json risk_to_json(const ewm::RiskSeries& series) {
    Json doc;
    doc["groups"] = series.groups;
    doc["bias"] = series.bias;
    Json rows = Json::array();
    for (const auto& r : series.rows) {
        Json row = {{"entity", r.entity}, {"time", r.time}, {"scored", r.scored}};
        if (r.scored) {
            row["score"] = r.score;
            row["probability"] = r.probability;
            row["contributions"] = r.contributions;
        } else {
            row["missing"] = r.missing;
        }
        rows.push_back(std::move(row));
    }
    doc["rows"] = std::move(rows);
    return doc;
}

ewm::RiskSeries risk_from_json(const Json& doc) {
    return guarded("risk series", [&] {
        ewm::RiskSeries s;
        s.groups = strings(doc.at("groups"));
        s.bias = doc.at("bias").get<double>();
        for (const auto& r : doc.at("rows")) {
            ewm::RiskRow row;
            row.entity = r.at("entity").get<std::string>();
            row.time = r.at("time").get<std::string>();
            row.scored = r.at("scored").get<bool>();
            if (row.scored) {
                row.score = r.at("score").get<double>();
                row.probability = r.at("probability").get<double>();
                row.contributions = r.at("contributions").get<std::vector<double>>();
            } else {
                row.missing = strings(r.at("missing"));
            }
            s.rows.push_back(std::move(row));
        }
        return s;
    });
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    auto doc = Json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw DataError("'" + path + "' is not valid JSON");
    return doc;
}

// Written beside the target and renamed over it, so readers never see a partial file.
void write_json_file(const std::string& path, const Json& doc) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write '" + path + "'");
        out << doc.dump(1) << '\n';
        out.close();
        if (!out) throw DataError("failed writing '" + path + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw DataError("cannot replace '" + path + "': " + ec.message());
}

}  // namespace visrisk::artifacts
