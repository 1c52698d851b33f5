#pragma once

// JSON documents exchanged between pipeline stages and served by the API.
// Key order is fixed (ordered_json) so artifacts diff cleanly.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "visrisk/datacube.hpp"
#include "visrisk/ewm.hpp"
#include "visrisk/network.hpp"
#include "visrisk/som.hpp"
#include "visrisk/sotm.hpp"

namespace visrisk::artifacts {

using Json = nlohmann::ordered_json;

Json cube_to_json(const DataCube& cube, const std::vector<EventRecord>& events = {});
DataCube cube_from_json(const Json& doc);
std::vector<EventRecord> events_from_json(const Json& doc);  // reads the "events" member
Json events_to_json(const std::vector<EventRecord>& events);
Json slice_to_json(const CubeSlice& slice);
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& doc);

Json state_layer_to_json(const som::StateLayer& layer);
som::StateLayer state_layer_from_json(const Json& doc);

/// {grid, dim_names, refs, config, transform, quantization_error, state_layer}
struct SomArtifact {
    som::SomModel model;
    std::optional<som::StateLayer> states;
    std::string transform = "percentile";
    double quantization_error = 0.0;
};
Json som_to_json(const SomArtifact& artifact);
SomArtifact som_from_json(const Json& doc);

/// {times, M, sigma, epochs_per_slice, dim_names, transform, slices, coloring,
///  flows, structural_positions, assignments}
struct SotmArtifact {
    sotm::SotmModel model;
    std::string transform = "percentile";
    sotm::Assignments assignments;
};
Json flows_to_json(const sotm::AlluvialFlows& flows, const std::vector<std::string>& times);
Json sotm_to_json(const SotmArtifact& artifact);
SotmArtifact sotm_from_json(const Json& doc);

/// {nodes: [{id, count, x, y, distress_share}], edges: [{a, b, count, darkness}],
///  window, layout: {width, height, k, temperature, seed}}
Json network_to_json(const network::CooccurrenceNetwork& net, const network::LayoutState& layout,
                     const std::vector<double>& distress_shares);
network::LayoutState layout_from_json(const Json& doc);

Json ewm_model_to_json(const ewm::EwmModel& model);
ewm::EwmModel ewm_model_from_json(const Json& doc);
Json risk_to_json(const ewm::RiskSeries& series);
ewm::RiskSeries risk_from_json(const Json& doc);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& doc);

}  // namespace visrisk::artifacts
