#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "visrisk/artifacts.hpp"
#include "visrisk/datacube.hpp"
#include "visrisk/ewm.hpp"
#include "visrisk/network.hpp"

namespace visrisk {

/// Everything the API serves. Treated as immutable once published.
struct Workspace {
    std::uint64_t version = 0;
    DataCube cube;
    DataCube percentiles;
    std::vector<EventRecord> events;
    std::optional<artifacts::SomArtifact> som;
    std::optional<artifacts::SotmArtifact> sotm;
    std::vector<network::OccurrenceRecord> occurrences;
    std::vector<std::string> distress_terms;
    network::LayoutParams layout;
    std::optional<ewm::EwmModel> ewm;
    std::optional<ewm::RiskSeries> risk;

    const DataCube& transformed(const std::string& transform) const {
        return transform == "percentile" ? percentiles : cube;
    }
};

/// Stable identifier of an event for view selections: "<entity>@<start>".
std::string event_id(const EventRecord& ev);

}  // namespace visrisk
