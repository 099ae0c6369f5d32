#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace cogkit {

/// One data row of a TSV file.
struct TsvRow {
    std::size_t line;  // 1-based line number in the source file
    std::vector<std::string> fields;
};

/// Reads a UTF-8 TSV file. Fields are split on '\t' only; a trailing '\r'
/// (CRLF input) is stripped; lines that are entirely empty are skipped.
/// Throws IoError if the file cannot be opened.
std::vector<TsvRow> read_tsv(const std::string& path);

/// Streaming variant: invokes row_fn per non-empty line.
void for_each_tsv_row(const std::string& path,
                      const std::function<void(const TsvRow&)>& row_fn);

/// Parses a required integer field; throws ParseError naming the line.
long long parse_int_field(std::string_view field, const std::string& what,
                          std::size_t line);

/// Parses a required finite double field; throws ParseError naming the line.
double parse_double_field(std::string_view field, const std::string& what,
                          std::size_t line);

}  // namespace cogkit
