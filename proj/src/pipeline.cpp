#include "visrisk/pipeline.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "visrisk/artifacts.hpp"
#include "visrisk/error.hpp"
#include "visrisk/svg.hpp"
#include "visrisk/viewstate.hpp"

namespace visrisk::pipeline {
namespace {

using artifacts::Json;

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return in;
}

fs::path artifact(const fs::path& dir, const char* name) { return dir / name; }

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create data directory '" + dir.string() + "'");
}

std::string check_transform(const std::string& t) {
    if (t != "raw" && t != "percentile") throw std::invalid_argument("transform must be 'raw' or 'percentile'");
    return t;
}

struct LoadedCube {
    DataCube cube;
    std::vector<EventRecord> events;
};

LoadedCube load_cube(const fs::path& data_dir) {
    const auto doc = artifacts::read_json_file(artifact(data_dir, kCubeFile).string());
    return {artifacts::cube_from_json(doc), artifacts::events_from_json(doc)};
}

std::vector<network::OccurrenceRecord> load_occurrences(const Config& cfg) {
    if (!cfg.occurrences) return {};
    auto in = open_input(*cfg.occurrences);
    return network::ingest_occurrences(in);
}

template <class T>
T get_or(const nlohmann::json& obj, const char* key, T fallback) {
    if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw std::invalid_argument(std::string("config key '") + key + "' has the wrong type");
    }
}

}  // namespace

std::vector<ewm::IndicatorGroup> default_groups(const std::vector<std::string>& indicators) {
    std::vector<ewm::IndicatorGroup> groups{
        {"domestic macroeconomic", {}}, {"credit and asset imbalances", {}}, {"global imbalances", {}}};
    const std::size_t n = indicators.size();
    for (std::size_t i = 0; i < n; ++i) groups[std::min<std::size_t>(3 * i / std::max<std::size_t>(n, 1), 2)].indicators.push_back(indicators[i]);
    return groups;
}

Config load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open config '" + path.string() + "'");
    auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw std::invalid_argument("config is not a JSON object");

    Config cfg;
    cfg.base_dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    auto resolve = [&](const char* key) -> std::optional<fs::path> {
        auto p = get_or<std::string>(doc, key, "");
        if (p.empty()) return std::nullopt;
        fs::path fp(p);
        return fp.is_absolute() ? fp : cfg.base_dir / fp;
    };
    cfg.observations = resolve("observations");
    cfg.links = resolve("links");
    cfg.events = resolve("events");
    cfg.occurrences = resolve("occurrences");
    cfg.ewm_labels = resolve("ewm_labels");
    cfg.state_labels = resolve("state_labels");

    if (doc.contains("som")) {
        const auto& s = doc.at("som");
        cfg.som.width = get_or<std::size_t>(s, "width", cfg.som.width);
        cfg.som.height = get_or<std::size_t>(s, "height", cfg.som.height);
        cfg.som.train.epochs = get_or<std::size_t>(s, "epochs", cfg.som.train.epochs);
        cfg.som.train.sigma_final = get_or<double>(s, "sigma_final", cfg.som.train.sigma_final);
        cfg.som.train.seed = get_or<std::uint64_t>(s, "seed", cfg.som.train.seed);
        cfg.som.transform = check_transform(get_or<std::string>(s, "transform", cfg.som.transform));
    }
    if (cfg.som.width == 0 || cfg.som.height == 0) throw std::invalid_argument("som grid must be non-empty");
    som::validate(cfg.som.train);

    if (doc.contains("sotm")) {
        const auto& s = doc.at("sotm");
        cfg.sotm.train.units = get_or<std::size_t>(s, "units", cfg.sotm.train.units);
        cfg.sotm.train.sigma = get_or<double>(s, "sigma", cfg.sotm.train.sigma);
        cfg.sotm.train.epochs_per_slice = get_or<std::size_t>(s, "epochs_per_slice", cfg.sotm.train.epochs_per_slice);
        cfg.sotm.transform = check_transform(get_or<std::string>(s, "transform", cfg.sotm.transform));
    }
    sotm::validate(cfg.sotm.train);

    if (doc.contains("network")) {
        const auto& s = doc.at("network");
        if (auto f = get_or<std::string>(s, "from", ""); !f.empty()) cfg.network.from = f;
        if (auto t = get_or<std::string>(s, "to", ""); !t.empty()) cfg.network.to = t;
        cfg.network.layout.width = get_or<double>(s, "width", cfg.network.layout.width);
        cfg.network.layout.height = get_or<double>(s, "height", cfg.network.layout.height);
        cfg.network.layout.iterations = get_or<std::size_t>(s, "iterations", cfg.network.layout.iterations);
        cfg.network.layout.spread = get_or<double>(s, "spread", cfg.network.layout.spread);
        cfg.network.layout.seed = get_or<std::uint64_t>(s, "seed", cfg.network.layout.seed);
        cfg.network.distress_terms = get_or<std::vector<std::string>>(s, "distress_terms", cfg.network.distress_terms);
    }
    if (!(cfg.network.layout.width > 0) || !(cfg.network.layout.height > 0))
        throw std::invalid_argument("network frame must have positive area");

    if (doc.contains("ewm")) {
        const auto& s = doc.at("ewm");
        if (s.contains("groups"))
            for (const auto& g : s.at("groups"))
                cfg.ewm.groups.push_back({get_or<std::string>(g, "name", ""),
                                          get_or<std::vector<std::string>>(g, "indicators", {})});
        cfg.ewm.weights = get_or<std::map<std::string, double>>(s, "weights", {});
        cfg.ewm.bias = get_or<double>(s, "bias", 0.0);
        if (s.contains("fit")) {
            const auto& f = s.at("fit");
            cfg.ewm.fit.learning_rate = get_or<double>(f, "learning_rate", cfg.ewm.fit.learning_rate);
            cfg.ewm.fit.iterations = get_or<std::size_t>(f, "iterations", cfg.ewm.fit.iterations);
            cfg.ewm.fit.l2 = get_or<double>(f, "l2", cfg.ewm.fit.l2);
            cfg.ewm.fit.tolerance = get_or<double>(f, "tolerance", cfg.ewm.fit.tolerance);
        }
    }
    return cfg;
}

fs::path run_ingest(const Config& cfg, const fs::path& data_dir) {
    if (!cfg.observations) throw std::invalid_argument("config names no observations file");
    auto in = open_input(*cfg.observations);
    DataCube cube = ingest_observations(in);
    if (cfg.links) {
        auto lin = open_input(*cfg.links);
        cube = ingest_links(lin, cube);
    }
    std::vector<EventRecord> events;
    if (cfg.events) {
        auto ein = open_input(*cfg.events);
        events = ingest_events(ein);
    }
    ensure_dir(data_dir);
    const auto out = artifact(data_dir, kCubeFile);
    artifacts::write_json_file(out.string(), artifacts::cube_to_json(cube, events));
    return out;
}

fs::path run_train_som(const Config& cfg, const fs::path& data_dir) {
    const auto loaded = load_cube(data_dir);
    const DataCube data = cfg.som.transform == "percentile" ? percentile_transform(loaded.cube) : loaded.cube;
    const auto rows = to_masked_rows(pool_panel(data), data.indicator_count());
    artifacts::SomArtifact a;
    a.model = som::train(rows, cfg.som.width, cfg.som.height, data.indicators(), cfg.som.train);
    a.transform = cfg.som.transform;
    a.quantization_error = som::quantization_error(a.model, rows);

    if (cfg.state_labels) {
        auto in = open_input(*cfg.state_labels);
        const auto labels = ingest_labels(in);
        std::set<std::string> class_set;
        for (const auto& l : labels) class_set.insert(l.label);
        std::vector<std::string> classes(class_set.begin(), class_set.end());
        MaskedRows labelled(data.indicator_count());
        std::vector<std::size_t> ids;
        for (const auto& l : labels) {
            auto e = data.entity_index(l.entity);
            auto t = data.time_index(l.time.label);
            if (!e || !t) continue;
            std::vector<double> v(data.indicator_count());
            std::vector<unsigned char> m(data.indicator_count());
            bool any = false;
            for (std::size_t k = 0; k < data.indicator_count(); ++k) {
                m[k] = data.observed(*e, *t, k);
                v[k] = data.value(*e, *t, k);
                any = any || m[k];
            }
            if (!any) continue;
            labelled.push_back(v, m);
            ids.push_back(static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), l.label) - classes.begin()));
        }
        if (!labelled.empty()) a.states = som::state_layer(a.model, labelled, ids, classes);
    }
    const auto out = artifact(data_dir, kSomFile);
    artifacts::write_json_file(out.string(), artifacts::som_to_json(a));
    return out;
}

fs::path run_train_sotm(const Config& cfg, const fs::path& data_dir) {
    const auto loaded = load_cube(data_dir);
    const DataCube data = cfg.sotm.transform == "percentile" ? percentile_transform(loaded.cube) : loaded.cube;
    artifacts::SotmArtifact a;
    a.model = sotm::train_sotm(data, cfg.sotm.train);
    a.transform = cfg.sotm.transform;
    a.assignments = sotm::assign_entities(a.model, data);
    const auto out = artifact(data_dir, kSotmFile);
    artifacts::write_json_file(out.string(), artifacts::sotm_to_json(a));
    return out;
}

fs::path run_network(const Config& cfg, const fs::path& data_dir) {
    if (!cfg.occurrences) throw std::invalid_argument("config names no occurrences file");
    const auto records = load_occurrences(cfg);
    network::Window window;
    if (cfg.network.from) window.start = TimePoint::parse_or_throw(*cfg.network.from);
    if (cfg.network.to) window.end = TimePoint::parse_or_throw(*cfg.network.to);
    const auto net = network::build_cooccurrence(records, window);
    if (net.nodes.empty()) throw DataError("no occurrence records in the configured window");
    const auto layout = network::fr_layout(net, cfg.network.layout);
    std::vector<double> distress;
    for (const auto& [id, _] : net.nodes)
        distress.push_back(network::distress_share(records, id, cfg.network.distress_terms, window));
    ensure_dir(data_dir);
    const auto out = artifact(data_dir, kNetworkFile);
    artifacts::write_json_file(out.string(), artifacts::network_to_json(net, layout, distress));
    return out;
}

namespace {

std::vector<ewm::IndicatorGroup> configured_groups(const Config& cfg, const DataCube& cube) {
    return cfg.ewm.groups.empty() ? default_groups(cube.indicators()) : cfg.ewm.groups;
}

}  // namespace

fs::path run_ewm_fit(const Config& cfg, const fs::path& data_dir, std::optional<std::string>* warning) {
    if (!cfg.ewm_labels) throw std::invalid_argument("config names no ewm_labels file");
    const auto loaded = load_cube(data_dir);
    const auto pct = percentile_transform(loaded.cube);
    auto in = open_input(*cfg.ewm_labels);
    const auto labels = ingest_labels(in);
    const auto groups = configured_groups(cfg, loaded.cube);
    ewm::EwmModel shape{groups, {}, 0.0};
    shape.validate();
    const auto design = ewm::build_design(pct, labels, shape.indicators());
    const auto result = ewm::fit(design, groups, cfg.ewm.fit);
    if (warning) *warning = result.warning;
    const auto out = artifact(data_dir, kEwmModelFile);
    auto doc = artifacts::ewm_model_to_json(result.model);
    doc["fit"] = {{"iterations", result.iterations},
                  {"gradient_norm", result.gradient_norm},
                  {"converged", result.converged},
                  {"warning", result.warning ? Json(*result.warning) : Json(nullptr)}};
    artifacts::write_json_file(out.string(), doc);
    return out;
}

fs::path run_ewm_score(const Config& cfg, const fs::path& data_dir) {
    const auto loaded = load_cube(data_dir);
    ewm::EwmModel model;
    const auto model_path = artifact(data_dir, kEwmModelFile);
    if (fs::exists(model_path)) {
        model = artifacts::ewm_model_from_json(artifacts::read_json_file(model_path.string()));
    } else if (!cfg.ewm.weights.empty()) {
        model = {configured_groups(cfg, loaded.cube), cfg.ewm.weights, cfg.ewm.bias};
        model.validate();
    } else {
        throw DataError("no early-warning model: run ewm-fit or configure ewm.weights");
    }
    const auto series = ewm::score(model, percentile_transform(loaded.cube));
    const auto out = artifact(data_dir, kRiskFile);
    auto doc = artifacts::risk_to_json(series);
    doc["model"] = artifacts::ewm_model_to_json(model);
    artifacts::write_json_file(out.string(), doc);
    return out;
}

std::shared_ptr<const Workspace> load_workspace(const Config& cfg, const fs::path& data_dir) {
    auto ws = std::make_shared<Workspace>();
    auto loaded = load_cube(data_dir);
    ws->cube = std::move(loaded.cube);
    ws->events = std::move(loaded.events);
    ws->percentiles = percentile_transform(ws->cube);
    if (auto p = artifact(data_dir, kSomFile); fs::exists(p))
        ws->som = artifacts::som_from_json(artifacts::read_json_file(p.string()));
    if (auto p = artifact(data_dir, kSotmFile); fs::exists(p))
        ws->sotm = artifacts::sotm_from_json(artifacts::read_json_file(p.string()));
    if (auto p = artifact(data_dir, kRiskFile); fs::exists(p)) {
        const auto doc = artifacts::read_json_file(p.string());
        ws->risk = artifacts::risk_from_json(doc);
        if (doc.contains("model")) ws->ewm = artifacts::ewm_model_from_json(doc.at("model"));
    }
    ws->occurrences = load_occurrences(cfg);
    ws->distress_terms = cfg.network.distress_terms;
    ws->layout = cfg.network.layout;
    ws->version = static_cast<std::uint64_t>(fs::last_write_time(artifact(data_dir, kCubeFile)).time_since_epoch().count());
    return ws;
}

std::string artifact_signature(const fs::path& data_dir) {
    std::string sig;
    for (const char* name : {kCubeFile, kSomFile, kSotmFile, kNetworkFile, kEwmModelFile, kRiskFile}) {
        std::error_code ec;
        const auto p = artifact(data_dir, name);
        const auto t = fs::last_write_time(p, ec);
        if (ec) continue;
        const auto size = fs::file_size(p, ec);
        sig += std::string(name) + ':' + std::to_string(t.time_since_epoch().count()) + ':' +
               std::to_string(ec ? 0 : size) + ';';
    }
    return sig;
}

void run_export(const Config& cfg, const fs::path& data_dir, const std::string& view, const std::string& token,
                const fs::path& out) {
    const auto parsed = parse_view(view);
    if (!parsed) throw std::invalid_argument("unknown view '" + view + "'");
    ViewState state;
    if (!token.empty()) state = decode_state(token);
    state.view = *parsed;
    const auto ws = load_workspace(cfg, data_dir);
    const auto doc = svg::render(*ws, state);
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write '" + out.string() + "'");
    f << doc;
}

}  // namespace visrisk::pipeline
