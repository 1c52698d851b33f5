#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace visrisk::csv {

struct Row {
    std::size_t line = 0;  // 1-based line number in the source (header is line 1)
    std::vector<std::string> fields;
};

struct Table {
    std::vector<std::string> header;
    std::vector<Row> rows;

    /// Index of a named column; throws DataError if the header lacks it.
    std::size_t column(std::string_view name) const;
    /// Index of a named column, or npos when absent.
    std::size_t find_column(std::string_view name) const;
};

/// RFC 4180 reader: quoted fields, doubled quotes, CRLF. Blank lines are skipped.
Table read(std::istream& in);
Table read_file(const std::string& path);

/// Quotes a field when it contains a comma, quote or newline.
std::string escape(std::string_view field);

}  // namespace visrisk::csv
