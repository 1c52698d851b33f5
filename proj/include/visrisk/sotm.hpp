#pragma once

// Self-Organizing Time Map: a chain of one-dimensional batch SOMs, one per
// time slice. The first slice is initialised along the first principal
// component; every later slice starts from its predecessor's reference
// vectors, which keeps unit orientation comparable over time.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "visrisk/datacube.hpp"
#include "visrisk/matrix.hpp"

namespace visrisk::sotm {

struct SotmConfig {
    std::size_t units = 5;              // M
    double sigma = 1.0;                 // constant over all slices
    std::size_t epochs_per_slice = 10;  // 1 = a single batch update per slice

    friend bool operator==(const SotmConfig&, const SotmConfig&) = default;
};

void validate(const SotmConfig& config);

class SotmModel {
public:
    SotmModel() = default;
    SotmModel(std::vector<std::string> times, std::vector<std::string> dim_names, std::vector<Matrix> slices,
              SotmConfig config);

    const std::vector<std::string>& times() const noexcept { return times_; }
    const std::vector<std::string>& dim_names() const noexcept { return dim_names_; }
    const std::vector<Matrix>& slices() const noexcept { return slices_; }
    const Matrix& slice(std::size_t t) const { return slices_.at(t); }
    const SotmConfig& config() const noexcept { return config_; }
    std::size_t units() const noexcept { return config_.units; }
    std::size_t dim() const noexcept { return dim_names_.size(); }

    friend bool operator==(const SotmModel&, const SotmModel&) = default;

private:
    std::vector<std::string> times_;
    std::vector<std::string> dim_names_;
    std::vector<Matrix> slices_;  // per time: units x dim
    SotmConfig config_;
};

/// First-principal-component initialisation of one slice: mean +- 2 sd over
/// `units` evenly spaced positions.
Matrix first_component_init(const MaskedRows& rows, std::size_t units, const std::vector<std::string>& dim_names);

/// Throws DataError naming the time point of an empty slice.
SotmModel train_sotm(const DataCube& cube, const SotmConfig& config);

/// times x units, first-PC projection of all reference vectors rescaled to [0, 1].
Matrix profile_coloring(const SotmModel& model);

/// times x units, value of one indicator.
Matrix component_plane_t(const SotmModel& model, std::size_t indicator);

/// BMU unit of every (entity, time); nullopt where the entity has no data.
struct Assignments {
    std::vector<std::string> entities;
    std::size_t time_count = 0;
    std::vector<std::optional<std::size_t>> units;  // entity-major

    const std::optional<std::size_t>& at(std::size_t e, std::size_t t) const { return units[e * time_count + t]; }
};

Assignments assign_entities(const SotmModel& model, const DataCube& cube);

struct Transition {
    std::size_t time = 0;  // flow from time to time + 1
    std::size_t from = 0;
    std::size_t to = 0;
    std::vector<std::string> entities;

    friend bool operator==(const Transition&, const Transition&) = default;
};

struct AlluvialFlows {
    std::vector<std::vector<std::size_t>> node_sizes;  // [time][unit]
    std::vector<Transition> transitions;               // sorted by (time, from, to)
};

AlluvialFlows alluvial_flows(std::size_t units, const Assignments& assignments);

/// times x units. Cumulative data-space distance along each slice's unit
/// chain, normalised by the longest chain over all slices.
Matrix structural_positions(const SotmModel& model);

}  // namespace visrisk::sotm
