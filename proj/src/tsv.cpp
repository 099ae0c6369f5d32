#include "cogkit/tsv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "cogkit/error.hpp"

namespace cogkit {

void for_each_tsv_row(const std::string& path,
                      const std::function<void(const TsvRow&)>& row_fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);

    std::string line;
    std::size_t line_no = 0;
    TsvRow row;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        row.line = line_no;
        row.fields.clear();
        std::size_t start = 0;
        while (true) {
            std::size_t tab = line.find('\t', start);
            if (tab == std::string::npos) {
                row.fields.emplace_back(line.substr(start));
                break;
            }
            row.fields.emplace_back(line.substr(start, tab - start));
            start = tab + 1;
        }
        row_fn(row);
    }
    if (in.bad()) throw IoError("read failure on file: " + path);
}

std::vector<TsvRow> read_tsv(const std::string& path) {
    std::vector<TsvRow> rows;
    for_each_tsv_row(path, [&](const TsvRow& r) { rows.push_back(r); });
    return rows;
}

long long parse_int_field(std::string_view field, const std::string& what,
                          std::size_t line) {
    const std::string s(field);
    if (s.empty()) throw ParseError("empty integer field in " + what, line);
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(s.c_str(), &end, 10);
    if (errno != 0 || end != s.c_str() + s.size())
        throw ParseError(what + ": invalid integer '" + s + "'", line);
    return v;
}

double parse_double_field(std::string_view field, const std::string& what,
                          std::size_t line) {
    const std::string s(field);
    if (s.empty()) throw ParseError("empty numeric field in " + what, line);
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (errno != 0 || end != s.c_str() + s.size())
        throw ParseError(what + ": invalid number '" + s + "'", line);
    if (!std::isfinite(v))
        throw ParseError(what + ": non-finite number '" + s + "'", line);
    return v;
}

}  // namespace cogkit
