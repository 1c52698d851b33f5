#include "visrisk/time_point.hpp"

#include <cctype>
#include <charconv>

#include "visrisk/error.hpp"

namespace visrisk {
namespace {

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static constexpr int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && leap(y) ? 29 : days[m - 1];
}

}  // namespace

std::optional<TimePoint> TimePoint::parse(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);

    // YYYYQn
    if (text.size() == 6 && (text[4] == 'Q' || text[4] == 'q')) {
        int year = 0, quarter = 0;
        if (!parse_int(text.substr(0, 4), year) || !parse_int(text.substr(5, 1), quarter)) return std::nullopt;
        if (quarter < 1 || quarter > 4) return std::nullopt;
        TimePoint tp;
        tp.label = std::string(text.substr(0, 4)) + "Q" + std::string(text.substr(5, 1));
        tp.year = year;
        tp.month = 3 * (quarter - 1) + 1;
        tp.day = 1;
        return tp;
    }
    // YYYY-MM-DD
    if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
        int year = 0, month = 0, day = 0;
        if (!parse_int(text.substr(0, 4), year) || !parse_int(text.substr(5, 2), month) ||
            !parse_int(text.substr(8, 2), day))
            return std::nullopt;
        if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month)) return std::nullopt;
        return TimePoint{std::string(text), year, month, day};
    }
    return std::nullopt;
}

TimePoint TimePoint::parse_or_throw(std::string_view text) {
    if (auto tp = parse(text)) return *tp;
    throw DataError("unparseable time '" + std::string(text) + "'");
}

}  // namespace visrisk
