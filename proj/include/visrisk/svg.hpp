#pragma once

#include <string>

#include "visrisk/viewstate.hpp"
#include "visrisk/workspace.hpp"

namespace visrisk::svg {

/// Static rendering of one view, built from the same payloads the API serves.
std::string render(const Workspace& ws, const ViewState& state);

/// Blue-to-yellow ramp for t in [0, 1], as "#rrggbb".
std::string ramp(double t);

}  // namespace visrisk::svg
