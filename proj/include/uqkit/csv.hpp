#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace uqkit {

/// Numeric table with a header row. Cells parse locale-independently.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> values;  // one vector per column

    std::size_t rows() const noexcept { return values.empty() ? 0 : values.front().size(); }
    /// Index of `name`, or throws DataError naming the file's columns.
    std::size_t column_index(std::string_view name) const;
    bool has_column(std::string_view name) const;
    const std::vector<double>& column(std::string_view name) const;
};

/// Reads a comma-separated numeric file. Errors name the 1-based file row and the column.
CsvTable read_csv_table(const std::filesystem::path& path);
void write_csv_table(const std::filesystem::path& path, const CsvTable& table);

/// Shortest text with 17 significant digits; round-trips bit-exactly.
std::string format_double(double v);
/// Parses a whole cell as a double; returns false on trailing garbage.
bool parse_double(std::string_view cell, double& out);

std::vector<std::string> split_line(std::string_view line);

} // namespace uqkit
