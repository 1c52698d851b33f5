#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "visrisk/matrix.hpp"
#include "visrisk/time_point.hpp"

namespace visrisk {

/// Entities x time x indicators panel with an observation mask, plus
/// optional directed entity-to-entity link matrices per time index.
/// Immutable once built; every operation below returns a new value.
class DataCube {
public:
    DataCube() = default;
    /// All cells start unobserved.
    DataCube(std::vector<std::string> entities, std::vector<TimePoint> times,
             std::vector<std::string> indicators);

    const std::vector<std::string>& entities() const noexcept { return entities_; }
    const std::vector<TimePoint>& times() const noexcept { return times_; }
    const std::vector<std::string>& indicators() const noexcept { return indicators_; }
    std::size_t entity_count() const noexcept { return entities_.size(); }
    std::size_t time_count() const noexcept { return times_.size(); }
    std::size_t indicator_count() const noexcept { return indicators_.size(); }

    std::optional<std::size_t> entity_index(const std::string& id) const;
    std::optional<std::size_t> time_index(const std::string& label) const;
    std::optional<std::size_t> indicator_index(const std::string& id) const;
    /// Throwing variants (NotFoundError).
    std::size_t require_entity(const std::string& id) const;
    std::size_t require_time(const std::string& label) const;
    std::size_t require_indicator(const std::string& id) const;

    double value(std::size_t e, std::size_t t, std::size_t k) const { return values_[offset(e, t, k)]; }
    bool observed(std::size_t e, std::size_t t, std::size_t k) const { return observed_[offset(e, t, k)] != 0; }
    /// Sets and marks observed; throws DataError for non-finite values.
    void set(std::size_t e, std::size_t t, std::size_t k, double v);
    void clear(std::size_t e, std::size_t t, std::size_t k);
    std::size_t observed_total() const;

    const std::map<std::size_t, Matrix>& links() const noexcept { return links_; }
    /// Throws DataError unless `m` is square over the entities with entries >= 0.
    void set_links(std::size_t t, Matrix m);

    friend bool operator==(const DataCube&, const DataCube&) = default;

private:
    std::size_t offset(std::size_t e, std::size_t t, std::size_t k) const {
        return (e * times_.size() + t) * indicators_.size() + k;
    }

    std::vector<std::string> entities_;
    std::vector<TimePoint> times_;
    std::vector<std::string> indicators_;
    std::vector<double> values_;
    std::vector<unsigned char> observed_;
    std::map<std::size_t, Matrix> links_;
};

struct EventRecord {
    std::string entity;
    TimePoint start;
    std::optional<TimePoint> end;
    std::string label;

    friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

enum class Axis { Entity, Time, Indicator };

/// Two-axis projection of the cube.
struct CubeSlice {
    Axis row_axis = Axis::Entity;
    Axis col_axis = Axis::Indicator;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    Matrix values;
    std::vector<unsigned char> mask;  // row-major, same shape as values

    bool observed(std::size_t r, std::size_t c) const { return mask[r * values.cols() + c] != 0; }
};

/// One (entity, time) observation vector from the pooled panel.
struct PooledRow {
    std::size_t entity = 0;
    std::size_t time = 0;
    std::vector<double> values;
    std::vector<unsigned char> mask;
};

// Ingestion. Each reads CSV with a header row and throws DataError on bad input.
DataCube ingest_observations(std::istream& in);
DataCube ingest_links(std::istream& in, const DataCube& cube);
std::vector<EventRecord> ingest_events(std::istream& in);

// Slices. Unknown keys throw NotFoundError.
CubeSlice slice_cross_section(const DataCube& cube, const std::string& time);
CubeSlice slice_indicator_panel(const DataCube& cube, const std::string& indicator);
CubeSlice slice_entity_series(const DataCube& cube, const std::string& entity);
Matrix slice_links(const DataCube& cube, const std::string& time);

/// Per (entity, indicator) mean-rank percentiles in [0, 100]; a lone observation maps to 50.
DataCube percentile_transform(const DataCube& cube);

/// Rows in (entity, time) axis order; rows with nothing observed are dropped.
std::vector<PooledRow> pool_panel(const DataCube& cube);
MaskedRows to_masked_rows(const std::vector<PooledRow>& rows, std::size_t dim);

/// Observed rows of one time slice, in entity order, with their entity indices.
std::vector<PooledRow> cross_section_rows(const DataCube& cube, std::size_t t);
/// Observed rows of one entity, in time order.
std::vector<PooledRow> entity_rows(const DataCube& cube, std::size_t e);

}  // namespace visrisk

namespace visrisk {

/// One row of a `entity,time,label` file. The label is kept as text: the
/// early-warning fit reads 0/1, the state layer reads class names.
struct LabelRecord {
    std::string entity;
    TimePoint time;
    std::string label;
};

std::vector<LabelRecord> ingest_labels(std::istream& in);

}  // namespace visrisk
