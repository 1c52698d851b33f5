#pragma once

// JSON payloads of the HTTP API, independent of the transport so they can be
// tested and rendered (SVG export) without a running server. Lookup failures
// throw NotFoundError; malformed parameters throw InvalidRequestError.

#include <cstdint>
#include <optional>
#include <string>

#include "visrisk/artifacts.hpp"
#include "visrisk/network.hpp"
#include "visrisk/workspace.hpp"

namespace visrisk::api {

using Json = artifacts::Json;
using Param = std::optional<std::string>;

Json meta(const Workspace& ws);
Json cube_panel(const Workspace& ws, const Param& indicator, const Param& transform);
Json cube_series(const Workspace& ws, const Param& entity, const Param& transform);
Json events(const Workspace& ws);

Json som(const Workspace& ws);
Json som_plane(const Workspace& ws, const Param& indicator);
Json som_trajectory(const Workspace& ws, const Param& entity, const Param& from, const Param& to);

Json sotm(const Workspace& ws);
Json sotm_plane(const Workspace& ws, const Param& indicator);

/// Inclusive window from optional time labels; 422 on bad labels or from > to.
network::Window parse_window(const Param& from, const Param& to);

struct NetworkView {
    network::CooccurrenceNetwork net;
    network::LayoutState layout;
    std::vector<double> distress;
};

NetworkView network_view(const Workspace& ws, const network::Window& window, std::uint64_t seed);
Json network(const Workspace& ws, const Param& from, const Param& to, const Param& seed);
/// Body: {from, to, seed, iterations, positions: {id: [x, y]}, pinned: {id: [x, y]}}.
Json network_relax(const Workspace& ws, const std::string& body);

Json ewm(const Workspace& ws, const Param& entity);

Json post_state(const std::string& body);
Json get_state(const std::string& token);

}  // namespace visrisk::api
