#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "visrisk/time_point.hpp"

namespace visrisk::network {

/// One document (e.g. a forum post) and the entities it mentions.
struct OccurrenceRecord {
    std::string doc_id;
    TimePoint time;
    std::set<std::string> mentions;  // deduplicated per document
    std::optional<std::string> text;
};

/// Reads `doc_id,time,entity[,text]`, one row per mention, grouped by doc_id.
/// The first non-empty text of a document wins.
std::vector<OccurrenceRecord> ingest_occurrences(std::istream& in);

/// Inclusive time window; an absent bound is open.
struct Window {
    std::optional<TimePoint> start;
    std::optional<TimePoint> end;

    bool contains(const TimePoint& t) const;
};

struct CooccurrenceNetwork {
    std::map<std::string, std::size_t> nodes;                          // entity -> #records
    std::map<std::pair<std::string, std::string>, std::size_t> edges;  // (a < b) -> #records with both
    Window window;
};

CooccurrenceNetwork build_cooccurrence(const std::vector<OccurrenceRecord>& records, const Window& window = {});

/// ln(1 + w) / ln(1 + w_max), in edge order.
std::vector<double> edge_styling(const CooccurrenceNetwork& network);

struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

struct LayoutParams {
    double width = 1000.0;
    double height = 1000.0;
    std::size_t iterations = 500;
    std::uint64_t seed = 1;
    // Scale of the ideal edge length. At 1 a ring's natural radius is about
    // twice the half-frame and clamping folds it against the walls.
    double spread = 0.5;
};

struct LayoutState {
    std::vector<std::string> nodes;  // same order as CooccurrenceNetwork::nodes
    std::vector<Point> positions;
    double width = 0.0;
    double height = 0.0;
    double temperature = 0.0;  // after the last iteration
    double k = 0.0;            // ideal edge length
    std::uint64_t seed = 0;

    std::optional<std::size_t> index(const std::string& node) const;
};

/// Fruchterman-Reingold: repulsion k^2/d between all pairs, attraction d^2/k
/// along edges, k = spread * sqrt(W H / n), displacement capped by a temperature cooling
/// linearly from W/10 to W/(10 iterations), positions clamped to [0,W]x[0,H].
LayoutState fr_layout(const CooccurrenceNetwork& network, const LayoutParams& params);

/// Continues from `layout` with `pinned` nodes held at the given positions.
/// The free nodes relax from a reheated temperature of W/50.
LayoutState pin_and_relax(const CooccurrenceNetwork& network, const LayoutState& layout,
                          const std::map<std::string, Point>& pinned, std::size_t iterations);

/// Fraction of the records mentioning `entity` whose text contains one of
/// `terms` as a whole word, case-insensitively. 0 if the entity is never mentioned.
double distress_share(const std::vector<OccurrenceRecord>& records, const std::string& entity,
                      const std::vector<std::string>& terms, const Window& window = {});

}  // namespace visrisk::network
