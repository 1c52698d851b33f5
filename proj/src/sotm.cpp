#include "visrisk/sotm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "visrisk/error.hpp"
#include "visrisk/linalg.hpp"
#include "visrisk/som.hpp"

namespace visrisk::sotm {

void validate(const SotmConfig& config) {
    if (config.units == 0) throw std::invalid_argument("units must be >= 1");
    if (!(config.sigma > 0.0) || !std::isfinite(config.sigma)) throw std::invalid_argument("sigma must be > 0");
    if (config.epochs_per_slice == 0) throw std::invalid_argument("epochs_per_slice must be >= 1");
}

SotmModel::SotmModel(std::vector<std::string> times, std::vector<std::string> dim_names, std::vector<Matrix> slices,
                     SotmConfig config)
    : times_(std::move(times)), dim_names_(std::move(dim_names)), slices_(std::move(slices)), config_(config) {
    if (slices_.size() != times_.size()) throw std::invalid_argument("one slice per time point required");
    for (const auto& s : slices_) {
        if (s.rows() != config_.units || s.cols() != dim_names_.size())
            throw std::invalid_argument("slice shape must be units x dim");
        for (double v : s.data())
            if (!std::isfinite(v)) throw NumericError("non-finite SOTM reference vector");
    }
}

Matrix first_component_init(const MaskedRows& rows, std::size_t units, const std::vector<std::string>& dim_names) {
    const auto basis = som::principal_basis(rows, 1, dim_names);
    const std::size_t n = rows.dim();
    Matrix init(units, n);
    for (std::size_t i = 0; i < units; ++i) {
        const double a = units <= 1 ? 0.0 : -2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(units - 1);
        for (std::size_t k = 0; k < n; ++k) init(i, k) = basis.mean[k] + a * basis.stddev[0] * basis.axes(0, k);
    }
    return init;
}

SotmModel train_sotm(const DataCube& cube, const SotmConfig& config) {
    validate(config);
    if (cube.time_count() == 0) throw DataError("cube has no time points");
    const auto& names = cube.indicators();
    std::vector<std::string> times;
    std::vector<Matrix> slices;
    Matrix previous;
    for (std::size_t t = 0; t < cube.time_count(); ++t) {
        const auto rows = to_masked_rows(cross_section_rows(cube, t), cube.indicator_count());
        if (rows.empty()) throw DataError("empty slice at time " + cube.times()[t].label);
        Matrix init;
        try {
            init = t == 0 ? first_component_init(rows, config.units, names) : previous;
        } catch (const DataError& e) {
            throw DataError("first slice " + cube.times()[t].label + ": " + e.what());
        }
        som::SomModel chain(config.units, 1, names, std::move(init));
        for (std::size_t epoch = 0; epoch < config.epochs_per_slice; ++epoch)
            chain = som::batch_epoch(chain, rows, config.sigma);
        previous = chain.refs();
        times.push_back(cube.times()[t].label);
        slices.push_back(chain.refs());
    }
    return SotmModel(std::move(times), names, std::move(slices), config);
}

Matrix profile_coloring(const SotmModel& model) {
    const std::size_t T = model.times().size(), M = model.units(), n = model.dim();
    Matrix colors(T, M, 0.5);
    if (T == 0 || n == 0) return colors;
    MaskedRows pooled(n);
    for (const auto& s : model.slices())
        for (std::size_t i = 0; i < M; ++i) pooled.push_back(s.row(i));
    const auto moments = linalg::complete_case_moments(pooled);
    double trace = 0.0;
    for (std::size_t k = 0; k < n; ++k) trace += moments.covariance(k, k);
    if (moments.count < 2 || trace <= 0.0) return colors;
    const auto eig = linalg::symmetric_eigen(moments.covariance);

    Matrix proj(T, M);
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t i = 0; i < M; ++i) {
            double p = 0.0;
            for (std::size_t k = 0; k < n; ++k) p += (model.slice(t)(i, k) - moments.mean[k]) * eig.vectors(0, k);
            proj(t, i) = p;
            lo = std::min(lo, p);
            hi = std::max(hi, p);
        }
    if (!(hi > lo)) return colors;
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t i = 0; i < M; ++i) colors(t, i) = (proj(t, i) - lo) / (hi - lo);
    return colors;
}

Matrix component_plane_t(const SotmModel& model, std::size_t indicator) {
    if (indicator >= model.dim()) throw NotFoundError("indicator index out of range");
    Matrix plane(model.times().size(), model.units());
    for (std::size_t t = 0; t < model.times().size(); ++t)
        for (std::size_t i = 0; i < model.units(); ++i) plane(t, i) = model.slice(t)(i, indicator);
    return plane;
}

Assignments assign_entities(const SotmModel& model, const DataCube& cube) {
    Assignments out{cube.entities(), cube.time_count(), {}};
    out.units.assign(cube.entity_count() * cube.time_count(), std::nullopt);
    for (std::size_t t = 0; t < cube.time_count(); ++t) {
        const auto& label = cube.times()[t].label;
        auto it = std::find(model.times().begin(), model.times().end(), label);
        if (it == model.times().end()) continue;
        const auto mt = static_cast<std::size_t>(it - model.times().begin());
        som::SomModel chain(model.units(), 1, model.dim_names(), model.slice(mt));
        const auto rows = cross_section_rows(cube, t);
        const auto bmus = som::find_bmus(chain, to_masked_rows(rows, cube.indicator_count()));
        for (std::size_t j = 0; j < rows.size(); ++j) out.units[rows[j].entity * out.time_count + t] = bmus[j].unit;
    }
    return out;
}

AlluvialFlows alluvial_flows(std::size_t units, const Assignments& a) {
    AlluvialFlows flows;
    flows.node_sizes.assign(a.time_count, std::vector<std::size_t>(units, 0));
    const std::size_t E = a.entities.size();
    for (std::size_t t = 0; t < a.time_count; ++t) {
        std::map<std::pair<std::size_t, std::size_t>, std::vector<std::string>> moves;
        for (std::size_t e = 0; e < E; ++e) {
            const auto& here = a.at(e, t);
            if (!here) continue;
            if (*here >= units) throw std::invalid_argument("assignment unit out of range");
            ++flows.node_sizes[t][*here];
            if (t + 1 >= a.time_count) continue;
            const auto& next = a.at(e, t + 1);
            if (!next) continue;
            if (*next >= units) throw std::invalid_argument("assignment unit out of range");
            moves[{*here, *next}].push_back(a.entities[e]);
        }
        for (auto& [key, ids] : moves) flows.transitions.push_back({t, key.first, key.second, std::move(ids)});
    }
    return flows;
}

Matrix structural_positions(const SotmModel& model) {
    const std::size_t T = model.times().size(), M = model.units();
    Matrix y(T, M, 0.0);
    double longest = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        const auto& s = model.slice(t);
        for (std::size_t i = 1; i < M; ++i) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < model.dim(); ++k) {
                const double d = s(i, k) - s(i - 1, k);
                d2 += d * d;
            }
            y(t, i) = y(t, i - 1) + std::sqrt(d2);
        }
        if (M > 0) longest = std::max(longest, y(t, M - 1));
    }
    if (longest > 0.0)
        for (double& v : y.data()) v /= longest;
    return y;
}

}  // namespace visrisk::sotm
