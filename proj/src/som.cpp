#include "visrisk/som.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "visrisk/error.hpp"
#include "visrisk/kernels.hpp"
#include "visrisk/linalg.hpp"

namespace visrisk::som {
namespace {

std::size_t observed(std::span<const unsigned char> mask) {
    return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](unsigned char m) { return m != 0; }));
}

double scale_distance(double squared, std::size_t dim, std::size_t observed_count) {
    return std::sqrt(squared * (static_cast<double>(dim) / static_cast<double>(observed_count)));
}

// Per-unit, per-component sums and counts of the rows each unit wins.
struct WinnerTotals {
    Matrix sums;
    Matrix counts;
    std::vector<unsigned char> used;
};

WinnerTotals accumulate_winners(const SomModel& model, const MaskedRows& data, const std::vector<Bmu>& bmus) {
    const std::size_t units = model.unit_count(), n = model.dim();
    WinnerTotals w{Matrix(units, n, 0.0), Matrix(units, n, 0.0), std::vector<unsigned char>(units, 0)};
    for (std::size_t j = 0; j < data.size(); ++j) {
        const std::size_t b = bmus[j].unit;
        auto x = data.values(j);
        auto m = data.mask(j);
        w.used[b] = 1;
        for (std::size_t k = 0; k < n; ++k) {
            if (!m[k]) continue;
            w.sums(b, k) += x[k];
            w.counts(b, k) += 1.0;
        }
    }
    return w;
}

// m_i = sum_b h(i,b) S_b / sum_b h(i,b) C_b, componentwise.
SomModel apply_weights(const SomModel& model, const WinnerTotals& w, const Matrix& h) {
    const std::size_t units = model.unit_count(), n = model.dim();
    const auto& kern = kernels::active_kernels();
    Matrix next = model.refs();
    std::vector<double> num(n), den(n);
    for (std::size_t i = 0; i < units; ++i) {
        std::fill(num.begin(), num.end(), 0.0);
        std::fill(den.begin(), den.end(), 0.0);
        for (std::size_t b = 0; b < units; ++b) {
            const double weight = h(i, b);
            if (!w.used[b] || weight == 0.0) continue;
            kern.axpy(weight, w.sums.row(b).data(), num.data(), n);
            kern.axpy(weight, w.counts.row(b).data(), den.data(), n);
        }
        for (std::size_t k = 0; k < n; ++k)
            if (den[k] > 0.0) next(i, k) = num[k] / den[k];
    }
    return model.with_refs(std::move(next));
}

}  // namespace

void validate(const TrainConfig& config) {
    if (config.epochs == 0) throw std::invalid_argument("epochs must be >= 1");
    if (!(config.sigma_final > 0.0) || !std::isfinite(config.sigma_final))
        throw std::invalid_argument("sigma_final must be > 0");
}

SomModel::SomModel(std::size_t width, std::size_t height, std::vector<std::string> dim_names, Matrix refs,
                   TrainConfig config)
    : width_(width), height_(height), dim_names_(std::move(dim_names)), refs_(std::move(refs)), config_(config) {
    if (width == 0 || height == 0) throw std::invalid_argument("grid dimensions must be positive");
    if (refs_.rows() != width * height) throw std::invalid_argument("reference count must equal width * height");
    if (!dim_names_.empty() && dim_names_.size() != refs_.cols())
        throw std::invalid_argument("dim_names size must equal reference dimension");
    for (double v : refs_.data())
        if (!std::isfinite(v)) throw NumericError("non-finite reference vector component");
}

double SomModel::grid_distance(std::size_t a, std::size_t b) const {
    const auto ca = coord(a), cb = coord(b);
    const double dc = ca.col - cb.col, dr = ca.row - cb.row;
    return std::sqrt(dc * dc + dr * dr);
}

std::vector<double> SomModel::refs_transposed() const {
    const std::size_t units = unit_count(), n = dim();
    std::vector<double> t(units * n);
    for (std::size_t i = 0; i < units; ++i)
        for (std::size_t k = 0; k < n; ++k) t[k * units + i] = refs_(i, k);
    return t;
}

SomModel SomModel::with_refs(Matrix refs) const {
    return SomModel(width_, height_, dim_names_, std::move(refs), config_);
}

double masked_distance(std::span<const double> x, std::span<const unsigned char> mask, std::span<const double> ref) {
    const std::size_t obs = observed(mask);
    if (obs == 0) throw DataError("vector has no observed components");
    double sum = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!mask[k]) continue;
        const double diff = x[k] - ref[k];
        sum = sum + diff * diff;
    }
    return scale_distance(sum, x.size(), obs);
}

namespace {

Bmu bmu_with(const std::vector<double>& refs_t, std::size_t units, std::span<const double> x,
             std::span<const unsigned char> mask, std::vector<double>& scratch) {
    const std::size_t obs = observed(mask);
    if (obs == 0) throw DataError("vector has no observed components");
    scratch.resize(units);
    kernels::active_kernels().masked_sq_distances(x.data(), mask.data(), x.size(), refs_t.data(), units,
                                                  scratch.data());
    std::size_t best = 0;
    for (std::size_t i = 1; i < units; ++i)
        if (scratch[i] < scratch[best]) best = i;
    return {best, scale_distance(scratch[best], x.size(), obs)};
}

}  // namespace

Bmu find_bmu(const SomModel& model, std::span<const double> x, std::span<const unsigned char> mask) {
    if (x.size() != model.dim() || mask.size() != model.dim()) throw std::invalid_argument("dimension mismatch");
    std::vector<double> scratch;
    return bmu_with(model.refs_transposed(), model.unit_count(), x, mask, scratch);
}

std::vector<Bmu> find_bmus(const SomModel& model, const MaskedRows& data) {
    if (!data.empty() && data.dim() != model.dim()) throw std::invalid_argument("dimension mismatch");
    const auto refs_t = model.refs_transposed();
    std::vector<double> scratch;
    std::vector<Bmu> out;
    out.reserve(data.size());
    for (std::size_t j = 0; j < data.size(); ++j)
        out.push_back(bmu_with(refs_t, model.unit_count(), data.values(j), data.mask(j), scratch));
    return out;
}

double neighborhood(double grid_distance, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
    return std::exp(-(grid_distance * grid_distance) / (2.0 * sigma * sigma));
}

double radius_schedule(std::size_t t, std::size_t epochs, std::size_t width, std::size_t height,
                       double sigma_final) {
    if (epochs == 0 || t < 1 || t > epochs) throw std::invalid_argument("iteration out of range");
    const double w = static_cast<double>(width), h = static_cast<double>(height);
    const double sigma0 = std::sqrt(w * w + h * h) / 2.0;
    if (t == epochs) return sigma_final;
    const double frac = static_cast<double>(t - 1) / static_cast<double>(std::max<std::size_t>(epochs - 1, 1));
    return sigma0 + (sigma_final - sigma0) * frac;
}

PrincipalBasis principal_basis(const MaskedRows& data, std::size_t components,
                               const std::vector<std::string>& dim_names) {
    const auto moments = linalg::complete_case_moments(data);
    if (moments.count < 2) throw DataError("at least two complete rows are required for PCA initialisation");
    const std::size_t n = data.dim();
    for (std::size_t k = 0; k < n; ++k) {
        if (moments.covariance(k, k) <= 0.0) {
            const std::string name = k < dim_names.size() ? dim_names[k] : "#" + std::to_string(k);
            throw DataError("zero covariance: indicator '" + name + "' is constant over complete rows");
        }
    }
    const auto eig = linalg::symmetric_eigen(moments.covariance);
    components = std::min(components, n);
    PrincipalBasis basis{moments.mean, std::vector<double>(components), Matrix(components, n)};
    for (std::size_t c = 0; c < components; ++c) {
        basis.stddev[c] = std::sqrt(std::max(eig.values[c], 0.0));
        for (std::size_t k = 0; k < n; ++k) basis.axes(c, k) = eig.vectors(c, k);
    }
    return basis;
}

namespace {

// Evenly spaced offsets in [-2, 2]; a single position sits at 0.
double span_offset(std::size_t pos, std::size_t count) {
    if (count <= 1) return 0.0;
    return -2.0 + 4.0 * static_cast<double>(pos) / static_cast<double>(count - 1);
}

}  // namespace

SomModel pca_init(const MaskedRows& data, std::size_t width, std::size_t height,
                  std::vector<std::string> dim_names, TrainConfig config) {
    if (width == 0 || height == 0) throw std::invalid_argument("grid dimensions must be positive");
    if (data.dim() < 2) throw DataError("PCA initialisation needs at least two indicators");
    const auto basis = principal_basis(data, 2, dim_names);
    const std::size_t n = data.dim();
    const bool first_along_cols = width >= height;
    Matrix refs(width * height, n);
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            const double a_col = span_offset(c, width), a_row = span_offset(r, height);
            const double a1 = first_along_cols ? a_col : a_row;
            const double a2 = first_along_cols ? a_row : a_col;
            for (std::size_t k = 0; k < n; ++k)
                refs(r * width + c, k) = basis.mean[k] + a1 * basis.stddev[0] * basis.axes(0, k) +
                                         a2 * basis.stddev[1] * basis.axes(1, k);
        }
    }
    return SomModel(width, height, std::move(dim_names), std::move(refs), config);
}

SomModel batch_epoch(const SomModel& model, const MaskedRows& data, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
    if (data.empty()) return model;
    const auto bmus = find_bmus(model, data);
    const auto totals = accumulate_winners(model, data, bmus);
    const std::size_t units = model.unit_count();
    Matrix h(units, units);
    for (std::size_t i = 0; i < units; ++i)
        for (std::size_t b = 0; b < units; ++b) h(i, b) = neighborhood(model.grid_distance(i, b), sigma);
    return apply_weights(model, totals, h);
}

SomModel batch_epoch_hard(const SomModel& model, const MaskedRows& data) {
    if (data.empty()) return model;
    const auto bmus = find_bmus(model, data);
    const auto totals = accumulate_winners(model, data, bmus);
    const std::size_t units = model.unit_count();
    Matrix h(units, units, 0.0);
    for (std::size_t i = 0; i < units; ++i) h(i, i) = 1.0;
    return apply_weights(model, totals, h);
}

SomModel train(const MaskedRows& data, std::size_t width, std::size_t height, std::vector<std::string> dim_names,
               TrainConfig config) {
    validate(config);
    auto model = pca_init(data, width, height, std::move(dim_names), config);
    for (std::size_t t = 1; t <= config.epochs; ++t)
        model = batch_epoch(model, data, radius_schedule(t, config.epochs, width, height, config.sigma_final));
    return model;
}

std::vector<GridCoord> project_trajectory(const SomModel& model, const MaskedRows& series) {
    std::vector<GridCoord> path;
    for (const auto& b : find_bmus(model, series)) path.push_back(model.coord(b.unit));
    return path;
}

std::vector<double> component_plane(const SomModel& model, std::size_t indicator) {
    if (indicator >= model.dim()) throw NotFoundError("indicator index out of range");
    std::vector<double> plane(model.unit_count());
    for (std::size_t i = 0; i < model.unit_count(); ++i) plane[i] = model.refs()(i, indicator);
    return plane;
}

StateLayer state_layer(const SomModel& model, const MaskedRows& rows, std::span<const std::size_t> labels,
                       std::vector<std::string> classes) {
    if (rows.size() != labels.size()) throw std::invalid_argument("one label per row required");
    if (rows.empty()) throw DataError("state layer needs at least one labelled row");
    const std::size_t units = model.unit_count(), nc = classes.size();
    for (auto l : labels)
        if (l >= nc) throw std::invalid_argument("label index out of range");

    Matrix counts(units, nc, 0.0);
    std::vector<std::size_t> totals(units, 0);
    const auto bmus = find_bmus(model, rows);
    for (std::size_t j = 0; j < rows.size(); ++j) {
        counts(bmus[j].unit, labels[j]) += 1.0;
        ++totals[bmus[j].unit];
    }

    StateLayer layer{std::move(classes), Matrix(units, nc, 0.0), std::vector<std::size_t>(units, 0),
                     std::vector<unsigned char>(units, 0)};
    for (std::size_t i = 0; i < units; ++i) {
        std::size_t source = i;
        if (totals[i] == 0) {
            layer.inherited[i] = 1;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t u = 0; u < units; ++u) {
                if (totals[u] == 0) continue;
                const double d = model.grid_distance(i, u);
                if (d < best) {
                    best = d;
                    source = u;
                }
            }
        }
        for (std::size_t c = 0; c < nc; ++c)
            layer.probabilities(i, c) = counts(source, c) / static_cast<double>(totals[source]);
        std::size_t arg = 0;
        for (std::size_t c = 1; c < nc; ++c)
            if (layer.probabilities(i, c) > layer.probabilities(i, arg)) arg = c;
        layer.partition[i] = arg;
    }
    return layer;
}

double quantization_error(const SomModel& model, const MaskedRows& data) {
    if (data.empty()) return 0.0;
    double total = 0.0;
    for (const auto& b : find_bmus(model, data)) total += b.distance;
    return total / static_cast<double>(data.size());
}

}  // namespace visrisk::som
