#include "visrisk/datacube.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "visrisk/csv.hpp"
#include "visrisk/error.hpp"

namespace visrisk {
namespace {

std::string row_ref(const csv::Row& row) { return "row " + std::to_string(row.line); }

const std::string& field(const csv::Row& row, std::size_t col) {
    static const std::string empty;
    return col < row.fields.size() ? row.fields[col] : empty;
}

std::optional<double> parse_double(const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

template <class T>
std::optional<std::size_t> index_of(const std::vector<T>& axis, const std::string& key) {
    for (std::size_t i = 0; i < axis.size(); ++i) {
        if constexpr (std::is_same_v<T, TimePoint>) {
            if (axis[i].label == key) return i;
        } else {
            if (axis[i] == key) return i;
        }
    }
    return std::nullopt;
}

std::vector<std::string> time_labels(const std::vector<TimePoint>& times) {
    std::vector<std::string> out;
    out.reserve(times.size());
    for (const auto& t : times) out.push_back(t.label);
    return out;
}

}  // namespace

DataCube::DataCube(std::vector<std::string> entities, std::vector<TimePoint> times,
                   std::vector<std::string> indicators)
    : entities_(std::move(entities)), times_(std::move(times)), indicators_(std::move(indicators)) {
    auto unique = [](auto v) {
        std::sort(v.begin(), v.end());
        return std::adjacent_find(v.begin(), v.end()) == v.end();
    };
    if (!unique(entities_)) throw DataError("duplicate entity identifier");
    if (!unique(indicators_)) throw DataError("duplicate indicator identifier");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i - 1] < times_[i])) throw DataError("time axis must be strictly increasing");
    const std::size_t n = entities_.size() * times_.size() * indicators_.size();
    values_.assign(n, 0.0);
    observed_.assign(n, 0);
}

std::optional<std::size_t> DataCube::entity_index(const std::string& id) const { return index_of(entities_, id); }
std::optional<std::size_t> DataCube::time_index(const std::string& label) const {
    if (auto i = index_of(times_, label)) return i;
    // Accept alternative spellings such as "2000q1".
    if (auto tp = TimePoint::parse(label)) return index_of(times_, tp->label);
    return std::nullopt;
}
std::optional<std::size_t> DataCube::indicator_index(const std::string& id) const {
    return index_of(indicators_, id);
}

std::size_t DataCube::require_entity(const std::string& id) const {
    if (auto i = entity_index(id)) return *i;
    throw NotFoundError("unknown entity '" + id + "'");
}
std::size_t DataCube::require_time(const std::string& label) const {
    if (auto i = time_index(label)) return *i;
    throw NotFoundError("unknown time '" + label + "'");
}
std::size_t DataCube::require_indicator(const std::string& id) const {
    if (auto i = indicator_index(id)) return *i;
    throw NotFoundError("unknown indicator '" + id + "'");
}

void DataCube::set(std::size_t e, std::size_t t, std::size_t k, double v) {
    if (!std::isfinite(v)) throw DataError("non-finite value");
    values_[offset(e, t, k)] = v;
    observed_[offset(e, t, k)] = 1;
}

void DataCube::clear(std::size_t e, std::size_t t, std::size_t k) {
    values_[offset(e, t, k)] = 0.0;
    observed_[offset(e, t, k)] = 0;
}

std::size_t DataCube::observed_total() const {
    return static_cast<std::size_t>(std::count(observed_.begin(), observed_.end(), 1));
}

void DataCube::set_links(std::size_t t, Matrix m) {
    if (t >= times_.size()) throw DataError("link time index out of range");
    if (m.rows() != entities_.size() || m.cols() != entities_.size())
        throw DataError("link matrix must be square over the entities");
    for (double w : m.data())
        if (!(w >= 0.0) || !std::isfinite(w)) throw DataError("link weights must be finite and non-negative");
    links_[t] = std::move(m);
}

DataCube ingest_observations(std::istream& in) {
    if (in.peek() == std::char_traits<char>::eof()) throw DataError("no observations: empty file");
    const auto table = csv::read(in);
    const auto c_entity = table.column("entity");
    const auto c_time = table.column("time");
    const auto c_indicator = table.column("indicator");
    const auto c_value = table.column("value");
    if (table.rows.empty()) throw DataError("no observations");

    struct Parsed {
        std::string entity;
        TimePoint time;
        std::string indicator;
        std::optional<double> value;
        std::size_t line;
    };
    std::vector<Parsed> parsed;
    parsed.reserve(table.rows.size());
    std::set<std::string> entities, indicators;
    std::set<TimePoint> times;
    std::set<std::tuple<std::string, std::string, std::string>> seen;

    for (const auto& row : table.rows) {
        Parsed p;
        p.line = row.line;
        p.entity = field(row, c_entity);
        p.indicator = field(row, c_indicator);
        if (p.entity.empty()) throw DataError("empty entity at " + row_ref(row));
        if (p.indicator.empty()) throw DataError("empty indicator at " + row_ref(row));
        auto tp = TimePoint::parse(field(row, c_time));
        if (!tp) throw DataError("unparseable time '" + field(row, c_time) + "' at " + row_ref(row));
        p.time = *tp;
        const auto& raw = field(row, c_value);
        if (!raw.empty()) {
            auto v = parse_double(raw);
            if (!v) throw DataError("unparseable value '" + raw + "' at " + row_ref(row));
            if (!std::isfinite(*v)) throw DataError("non-finite value at " + row_ref(row));
            p.value = v;
        }
        if (!seen.emplace(p.entity, p.time.label, p.indicator).second)
            throw DataError("duplicate observation (" + p.entity + "," + p.time.label + "," + p.indicator +
                            ") at " + row_ref(row));
        entities.insert(p.entity);
        indicators.insert(p.indicator);
        times.insert(p.time);
        parsed.push_back(std::move(p));
    }

    DataCube cube({entities.begin(), entities.end()}, {times.begin(), times.end()},
                  {indicators.begin(), indicators.end()});
    for (const auto& p : parsed) {
        if (!p.value) continue;
        cube.set(*cube.entity_index(p.entity), *cube.time_index(p.time.label), *cube.indicator_index(p.indicator),
                 *p.value);
    }
    return cube;
}

DataCube ingest_links(std::istream& in, const DataCube& cube) {
    const auto table = csv::read(in);
    const auto c_source = table.column("source");
    const auto c_target = table.column("target");
    const auto c_time = table.column("time");
    const auto c_weight = table.column("weight");

    DataCube out = cube;
    std::map<std::size_t, Matrix> links = cube.links();
    const std::size_t n = cube.entity_count();
    for (const auto& row : table.rows) {
        auto s = cube.entity_index(field(row, c_source));
        auto d = cube.entity_index(field(row, c_target));
        if (!s) throw DataError("unknown entity '" + field(row, c_source) + "' at " + row_ref(row));
        if (!d) throw DataError("unknown entity '" + field(row, c_target) + "' at " + row_ref(row));
        if (!TimePoint::parse(field(row, c_time)))
            throw DataError("unparseable time '" + field(row, c_time) + "' at " + row_ref(row));
        auto t = cube.time_index(field(row, c_time));
        if (!t) throw DataError("time '" + field(row, c_time) + "' not in cube at " + row_ref(row));
        auto w = parse_double(field(row, c_weight));
        if (!w || !std::isfinite(*w)) throw DataError("unparseable weight at " + row_ref(row));
        if (*w < 0.0) throw DataError("negative weight at " + row_ref(row));
        auto [it, _] = links.try_emplace(*t, n, n, 0.0);
        it->second(*s, *d) = *w;
    }
    for (auto& [t, m] : links) out.set_links(t, std::move(m));
    return out;
}

std::vector<EventRecord> ingest_events(std::istream& in) {
    const auto table = csv::read(in);
    const auto c_entity = table.column("entity");
    const auto c_start = table.column("start");
    const auto c_end = table.column("end");
    const auto c_label = table.find_column("label");

    std::vector<EventRecord> events;
    for (const auto& row : table.rows) {
        EventRecord ev;
        ev.entity = field(row, c_entity);
        if (ev.entity.empty()) throw DataError("empty entity at " + row_ref(row));
        auto start = TimePoint::parse(field(row, c_start));
        if (!start) throw DataError("unparseable start '" + field(row, c_start) + "' at " + row_ref(row));
        ev.start = *start;
        if (!field(row, c_end).empty()) {
            auto end = TimePoint::parse(field(row, c_end));
            if (!end) throw DataError("unparseable end '" + field(row, c_end) + "' at " + row_ref(row));
            if (*end < ev.start) throw DataError("event end before start at " + row_ref(row));
            ev.end = *end;
        }
        if (c_label != std::string::npos) ev.label = field(row, c_label);
        events.push_back(std::move(ev));
    }
    std::stable_sort(events.begin(), events.end(), [](const EventRecord& a, const EventRecord& b) {
        if (a.entity != b.entity) return a.entity < b.entity;
        return a.start < b.start;
    });
    return events;
}

CubeSlice slice_cross_section(const DataCube& cube, const std::string& time) {
    const auto t = cube.require_time(time);
    CubeSlice s{Axis::Entity, Axis::Indicator, cube.entities(), cube.indicators(),
                Matrix(cube.entity_count(), cube.indicator_count()), {}};
    s.mask.assign(cube.entity_count() * cube.indicator_count(), 0);
    for (std::size_t e = 0; e < cube.entity_count(); ++e)
        for (std::size_t k = 0; k < cube.indicator_count(); ++k) {
            s.values(e, k) = cube.value(e, t, k);
            s.mask[e * cube.indicator_count() + k] = cube.observed(e, t, k);
        }
    return s;
}

CubeSlice slice_indicator_panel(const DataCube& cube, const std::string& indicator) {
    const auto k = cube.require_indicator(indicator);
    CubeSlice s{Axis::Entity, Axis::Time, cube.entities(), time_labels(cube.times()),
                Matrix(cube.entity_count(), cube.time_count()), {}};
    s.mask.assign(cube.entity_count() * cube.time_count(), 0);
    for (std::size_t e = 0; e < cube.entity_count(); ++e)
        for (std::size_t t = 0; t < cube.time_count(); ++t) {
            s.values(e, t) = cube.value(e, t, k);
            s.mask[e * cube.time_count() + t] = cube.observed(e, t, k);
        }
    return s;
}

CubeSlice slice_entity_series(const DataCube& cube, const std::string& entity) {
    const auto e = cube.require_entity(entity);
    CubeSlice s{Axis::Time, Axis::Indicator, time_labels(cube.times()), cube.indicators(),
                Matrix(cube.time_count(), cube.indicator_count()), {}};
    s.mask.assign(cube.time_count() * cube.indicator_count(), 0);
    for (std::size_t t = 0; t < cube.time_count(); ++t)
        for (std::size_t k = 0; k < cube.indicator_count(); ++k) {
            s.values(t, k) = cube.value(e, t, k);
            s.mask[t * cube.indicator_count() + k] = cube.observed(e, t, k);
        }
    return s;
}

Matrix slice_links(const DataCube& cube, const std::string& time) {
    const auto t = cube.require_time(time);
    auto it = cube.links().find(t);
    if (it == cube.links().end()) return Matrix(cube.entity_count(), cube.entity_count(), 0.0);
    return it->second;
}

DataCube percentile_transform(const DataCube& cube) {
    DataCube out = cube;
    std::vector<std::size_t> idx;
    std::vector<double> rank;
    for (std::size_t e = 0; e < cube.entity_count(); ++e) {
        for (std::size_t k = 0; k < cube.indicator_count(); ++k) {
            idx.clear();
            for (std::size_t t = 0; t < cube.time_count(); ++t)
                if (cube.observed(e, t, k)) idx.push_back(t);
            const std::size_t n = idx.size();
            if (n == 0) continue;
            if (n == 1) {
                out.set(e, idx[0], k, 50.0);
                continue;
            }
            std::stable_sort(idx.begin(), idx.end(),
                             [&](std::size_t a, std::size_t b) { return cube.value(e, a, k) < cube.value(e, b, k); });
            rank.assign(n, 0.0);
            for (std::size_t i = 0; i < n;) {
                std::size_t j = i;
                while (j + 1 < n && cube.value(e, idx[j + 1], k) == cube.value(e, idx[i], k)) ++j;
                // 1-based ranks i+1 .. j+1 share their mean
                const double mean_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
                for (std::size_t r = i; r <= j; ++r) rank[r] = mean_rank;
                i = j + 1;
            }
            for (std::size_t r = 0; r < n; ++r)
                out.set(e, idx[r], k, 100.0 * (rank[r] - 1.0) / static_cast<double>(n - 1));
        }
    }
    return out;
}

namespace {

std::optional<PooledRow> make_row(const DataCube& cube, std::size_t e, std::size_t t) {
    PooledRow row{e, t, std::vector<double>(cube.indicator_count(), 0.0),
                  std::vector<unsigned char>(cube.indicator_count(), 0)};
    bool any = false;
    for (std::size_t k = 0; k < cube.indicator_count(); ++k) {
        if (!cube.observed(e, t, k)) continue;
        row.values[k] = cube.value(e, t, k);
        row.mask[k] = 1;
        any = true;
    }
    if (!any) return std::nullopt;
    return row;
}

}  // namespace

std::vector<PooledRow> pool_panel(const DataCube& cube) {
    std::vector<PooledRow> rows;
    for (std::size_t e = 0; e < cube.entity_count(); ++e)
        for (std::size_t t = 0; t < cube.time_count(); ++t)
            if (auto r = make_row(cube, e, t)) rows.push_back(std::move(*r));
    return rows;
}

std::vector<PooledRow> cross_section_rows(const DataCube& cube, std::size_t t) {
    std::vector<PooledRow> rows;
    for (std::size_t e = 0; e < cube.entity_count(); ++e)
        if (auto r = make_row(cube, e, t)) rows.push_back(std::move(*r));
    return rows;
}

std::vector<PooledRow> entity_rows(const DataCube& cube, std::size_t e) {
    std::vector<PooledRow> rows;
    for (std::size_t t = 0; t < cube.time_count(); ++t)
        if (auto r = make_row(cube, e, t)) rows.push_back(std::move(*r));
    return rows;
}

MaskedRows to_masked_rows(const std::vector<PooledRow>& rows, std::size_t dim) {
    MaskedRows out(dim);
    for (const auto& r : rows) out.push_back(r.values, r.mask);
    return out;
}

}  // namespace visrisk

namespace visrisk {

std::vector<LabelRecord> ingest_labels(std::istream& in) {
    const auto table = csv::read(in);
    const auto c_entity = table.column("entity");
    const auto c_time = table.column("time");
    const auto c_label = table.column("label");
    std::vector<LabelRecord> out;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& row : table.rows) {
        LabelRecord rec;
        rec.entity = field(row, c_entity);
        auto tp = TimePoint::parse(field(row, c_time));
        if (!tp) throw DataError("unparseable time '" + field(row, c_time) + "' at " + row_ref(row));
        rec.time = *tp;
        rec.label = field(row, c_label);
        if (rec.entity.empty() || rec.label.empty()) throw DataError("empty entity or label at " + row_ref(row));
        if (!seen.emplace(rec.entity, rec.time.label).second)
            throw DataError("duplicate label (" + rec.entity + "," + rec.time.label + ") at " + row_ref(row));
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace visrisk
