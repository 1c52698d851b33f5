#include "visrisk/csv.hpp"

#include <fstream>

#include "visrisk/error.hpp"

namespace visrisk::csv {
namespace {

// Reads one logical record; quoted fields may span lines. Returns false at EOF.
bool read_record(std::istream& in, std::size_t& line, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field += '"';
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            if (in.peek() == '\n') continue;
            fields.push_back(std::move(field));
            return true;
        } else if (c == '\n') {
            fields.push_back(std::move(field));
            return true;
        } else {
            field += c;
        }
    }
    if (in_quotes) throw DataError("unterminated quoted field at line " + std::to_string(line));
    if (any) fields.push_back(std::move(field));
    return any;
}

bool blank(const std::vector<std::string>& fields) {
    return fields.size() == 1 && fields[0].find_first_not_of(" \t") == std::string::npos;
}

}  // namespace

std::size_t Table::find_column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    return std::string::npos;
}

std::size_t Table::column(std::string_view name) const {
    auto i = find_column(name);
    if (i == std::string::npos) throw DataError("missing column '" + std::string(name) + "' in header");
    return i;
}

Table read(std::istream& in) {
    Table table;
    std::vector<std::string> fields;
    std::size_t line = 0;
    bool have_header = false;
    while (true) {
        std::size_t start = ++line;
        if (!read_record(in, line, fields)) break;
        if (blank(fields)) continue;
        for (auto& f : fields) {
            auto b = f.find_first_not_of(" \t");
            auto e = f.find_last_not_of(" \t");
            f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
        }
        if (!have_header) {
            // Strip a UTF-8 byte order mark.
            if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
            table.header = fields;
            have_header = true;
        } else {
            table.rows.push_back({start, fields});
        }
    }
    if (!have_header) throw DataError("missing header row");
    return table;
}

Table read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    return read(in);
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace visrisk::csv
