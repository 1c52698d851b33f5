#include "visrisk/server.hpp"

#include <httplib.h>

#include "visrisk/api.hpp"
#include "visrisk/error.hpp"
#include "visrisk/svg.hpp"
#include "visrisk/viewstate.hpp"

namespace visrisk {
namespace {

api::Param param(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) return std::nullopt;
    return req.get_param_value(name);
}

void send_json(httplib::Response& res, const artifacts::Json& doc) {
    res.status = 200;
    res.set_content(doc.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    res.status = status;
    res.set_content(nlohmann::json{{"error", message}, {"status", status}}.dump(), "application/json");
}

}  // namespace

ApiServer::ApiServer(std::shared_ptr<const Workspace> workspace)
    : workspace_(std::move(workspace)), http_(std::make_unique<httplib::Server>()) {
    install_routes();
}

ApiServer::~ApiServer() { stop(); }

void ApiServer::publish(std::shared_ptr<const Workspace> workspace) {
    std::lock_guard lock(mutex_);
    workspace_ = std::move(workspace);
}

std::shared_ptr<const Workspace> ApiServer::snapshot() const {
    std::lock_guard lock(mutex_);
    return workspace_;
}

int ApiServer::bind(const std::string& host, int port) {
    if (port == 0) return http_->bind_to_any_port(host);
    return http_->bind_to_port(host, port) ? port : -1;
}

bool ApiServer::listen_after_bind() { return http_->listen_after_bind(); }

void ApiServer::stop() {
    if (http_) http_->stop();
}

void ApiServer::install_routes() {
    auto& s = *http_;
    // Each handler runs against one snapshot; exceptions map to status codes.
    auto get = [this](auto&& body) {
        return [this, body](const httplib::Request& req, httplib::Response& res) {
            try {
                const auto ws = snapshot();
                body(*ws, req, res);
            } catch (const NotFoundError& e) {
                send_error(res, 404, e.what());
            } catch (const InvalidRequestError& e) {
                send_error(res, 422, e.what());
            } catch (const DataError& e) {
                send_error(res, 422, e.what());
            } catch (const std::exception& e) {
                send_error(res, 500, e.what());
            }
        };
    };
    using Req = httplib::Request;
    using Res = httplib::Response;

    s.Get("/api/meta", get([](const Workspace& ws, const Req&, Res& res) { send_json(res, api::meta(ws)); }));
    s.Get("/api/cube/panel", get([](const Workspace& ws, const Req& q, Res& res) {
              send_json(res, api::cube_panel(ws, param(q, "indicator"), param(q, "transform")));
          }));
    s.Get("/api/cube/series", get([](const Workspace& ws, const Req& q, Res& res) {
              send_json(res, api::cube_series(ws, param(q, "entity"), param(q, "transform")));
          }));
    s.Get("/api/events", get([](const Workspace& ws, const Req&, Res& res) { send_json(res, api::events(ws)); }));
    s.Get("/api/som", get([](const Workspace& ws, const Req&, Res& res) { send_json(res, api::som(ws)); }));
    s.Get("/api/som/plane", get([](const Workspace& ws, const Req& q, Res& res) {
              send_json(res, api::som_plane(ws, param(q, "indicator")));
          }));
    s.Get("/api/som/trajectory", get([](const Workspace& ws, const Req& q, Res& res) {
              send_json(res, api::som_trajectory(ws, param(q, "entity"), param(q, "from"), param(q, "to")));
          }));
    s.Get("/api/sotm", get([](const Workspace& ws, const Req&, Res& res) { send_json(res, api::sotm(ws)); }));
    s.Get("/api/sotm/plane", get([](const Workspace& ws, const Req& q, Res& res) {
              send_json(res, api::sotm_plane(ws, param(q, "indicator")));
          }));
    s.Get("/api/network", get([](const Workspace& ws, const Req& q, Res& res) {
              send_json(res, api::network(ws, param(q, "from"), param(q, "to"), param(q, "seed")));
          }));
    s.Post("/api/network/relax", get([](const Workspace& ws, const Req& q, Res& res) {
               send_json(res, api::network_relax(ws, q.body));
           }));
    s.Get("/api/ewm", get([](const Workspace& ws, const Req& q, Res& res) {
              send_json(res, api::ewm(ws, param(q, "entity")));
          }));
    s.Post("/api/state", get([](const Workspace&, const Req& q, Res& res) { send_json(res, api::post_state(q.body)); }));
    s.Get(R"(/api/state/(.+))", get([](const Workspace&, const Req& q, Res& res) {
              send_json(res, api::get_state(q.matches[1]));
          }));
    s.Get(R"(/api/export/([a-z]+)\.svg)", get([](const Workspace& ws, const Req& q, Res& res) {
              const std::string view_name = q.matches[1];
              const auto view = parse_view(view_name);
              if (!view) throw NotFoundError("unknown view '" + view_name + "'");
              ViewState state;
              if (auto token = param(q, "state"); token && !token->empty()) state = decode_state(*token);
              state.view = *view;
              res.status = 200;
              res.set_content(svg::render(ws, state), "image/svg+xml");
          }));
    s.Get("/", get([](const Workspace& ws, const Req&, Res& res) {
              send_json(res, {{"service", "visrisk"}, {"version", ws.version}, {"api", "/api/meta"}});
          }));
}

}  // namespace visrisk
