#pragma once

// Batch Self-Organizing Map: PCA-initialised rectangular grid, masked
// Euclidean matching, Gaussian neighbourhood with a linearly shrinking radius.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "visrisk/matrix.hpp"

namespace visrisk::som {

struct TrainConfig {
    std::size_t epochs = 40;   // T
    double sigma_final = 1.0;  // radius reached at the last epoch
    std::uint64_t seed = 0;    // unused by the deterministic pipeline; kept for provenance

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Throws std::invalid_argument when epochs == 0 or sigma_final <= 0.
void validate(const TrainConfig& config);

struct GridCoord {
    double col = 0.0;
    double row = 0.0;
    friend bool operator==(const GridCoord&, const GridCoord&) = default;
};

/// Units are numbered row-major: unit i sits at column i % width, row i / width.
class SomModel {
public:
    SomModel() = default;
    SomModel(std::size_t width, std::size_t height, std::vector<std::string> dim_names, Matrix refs,
             TrainConfig config = {});

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t unit_count() const noexcept { return refs_.rows(); }
    std::size_t dim() const noexcept { return refs_.cols(); }

    const Matrix& refs() const noexcept { return refs_; }
    std::span<const double> ref(std::size_t unit) const { return refs_.row(unit); }
    const std::vector<std::string>& dim_names() const noexcept { return dim_names_; }
    const TrainConfig& config() const noexcept { return config_; }

    GridCoord coord(std::size_t unit) const {
        return {static_cast<double>(unit % width_), static_cast<double>(unit / width_)};
    }
    double grid_distance(std::size_t a, std::size_t b) const;

    /// Reference vectors in dimension-major order for the distance kernels.
    std::vector<double> refs_transposed() const;

    SomModel with_refs(Matrix refs) const;

    friend bool operator==(const SomModel&, const SomModel&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<std::string> dim_names_;
    Matrix refs_;
    TrainConfig config_;
};

struct Bmu {
    std::size_t unit = 0;
    double distance = 0.0;  // masked distance, see masked_distance()
};

/// Euclidean distance over the components observed in `mask`, scaled by
/// sqrt(n / #observed). Throws DataError when nothing is observed.
double masked_distance(std::span<const double> x, std::span<const unsigned char> mask, std::span<const double> ref);

/// Nearest reference vector; ties resolve to the lowest unit index.
Bmu find_bmu(const SomModel& model, std::span<const double> x, std::span<const unsigned char> mask);
std::vector<Bmu> find_bmus(const SomModel& model, const MaskedRows& data);

/// Gaussian exp(-d^2 / (2 sigma^2)). Throws std::invalid_argument for sigma <= 0.
double neighborhood(double grid_distance, double sigma);

/// Linear decay from half the grid diagonal at t = 1 to sigma_final at t = T.
double radius_schedule(std::size_t t, std::size_t epochs, std::size_t width, std::size_t height,
                       double sigma_final);

/// Leading principal axes of the complete-case data.
struct PrincipalBasis {
    std::vector<double> mean;
    std::vector<double> stddev;  // sqrt of eigenvalues, clamped at 0
    Matrix axes;                 // row c = c-th principal direction
};

/// Throws DataError with fewer than two complete rows, or naming the first
/// indicator with zero variance.
PrincipalBasis principal_basis(const MaskedRows& data, std::size_t components,
                               const std::vector<std::string>& dim_names);

/// Grid spanning +-2 standard deviations along the first two principal
/// components; the first component runs along the longer grid side.
SomModel pca_init(const MaskedRows& data, std::size_t width, std::size_t height,
                  std::vector<std::string> dim_names, TrainConfig config = {});

/// One batch update with Gaussian neighbourhood radius `sigma`. Each component
/// is averaged only over rows observing it; components with no support keep
/// their previous value.
SomModel batch_epoch(const SomModel& model, const MaskedRows& data, double sigma);

/// The sigma -> 0 limit: every unit becomes the mean of the rows it wins.
SomModel batch_epoch_hard(const SomModel& model, const MaskedRows& data);

/// pca_init followed by config.epochs batch epochs along radius_schedule.
SomModel train(const MaskedRows& data, std::size_t width, std::size_t height, std::vector<std::string> dim_names,
               TrainConfig config = {});

/// BMU coordinates of each row, in order; repeats are kept.
std::vector<GridCoord> project_trajectory(const SomModel& model, const MaskedRows& series);

std::vector<double> component_plane(const SomModel& model, std::size_t indicator);

struct StateLayer {
    std::vector<std::string> classes;
    Matrix probabilities;                  // units x classes
    std::vector<std::size_t> partition;    // argmax class per unit
    std::vector<unsigned char> inherited;  // unit had no rows and copied its nearest non-empty unit
};

/// Class frequencies among rows mapped to each unit. `labels[j]` indexes `classes`.
StateLayer state_layer(const SomModel& model, const MaskedRows& rows, std::span<const std::size_t> labels,
                       std::vector<std::string> classes);

/// Mean masked distance from each row to its BMU; 0 for an empty dataset.
double quantization_error(const SomModel& model, const MaskedRows& data);

}  // namespace visrisk::som
