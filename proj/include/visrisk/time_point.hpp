#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace visrisk {

/// A labelled point on the time axis. Accepts quarterly labels (`2007Q3`,
/// `2007q3`) and ISO dates (`2007-09-30`). Ordering is chronological; a
/// quarter sorts at its first day, equal instants fall back to the label.
struct TimePoint {
    std::string label;
    int year = 0;
    int month = 1;
    int day = 1;

    static std::optional<TimePoint> parse(std::string_view text);
    /// Throws DataError when `text` is not a recognised time label.
    static TimePoint parse_or_throw(std::string_view text);

    friend bool operator==(const TimePoint& a, const TimePoint& b) { return a.label == b.label; }
    friend std::strong_ordering operator<=>(const TimePoint& a, const TimePoint& b) {
        if (auto c = a.year <=> b.year; c != 0) return c;
        if (auto c = a.month <=> b.month; c != 0) return c;
        if (auto c = a.day <=> b.day; c != 0) return c;
        return a.label <=> b.label;
    }
};

}  // namespace visrisk
