#include "uqkit/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "uqkit/error.hpp"

namespace uqkit {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

} // namespace

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool parse_double(std::string_view cell, double& out) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    if (cell.empty()) return false;
    const auto* end = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(cell.data(), end, out, std::chars_format::general);
    return ec == std::errc{} && ptr == end;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return {buf, ptr};
}

std::size_t CsvTable::column_index(std::string_view name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) {
        std::string known;
        for (const auto& c : columns) known += (known.empty() ? "" : ",") + c;
        throw DataError("missing column '" + std::string(name) + "' (have: " + known + ")");
    }
    return static_cast<std::size_t>(it - columns.begin());
}

bool CsvTable::has_column(std::string_view name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
}

const std::vector<double>& CsvTable::column(std::string_view name) const {
    return values[column_index(name)];
}

CsvTable read_csv_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || trim(line).empty()) {
        throw DataError(path.string() + ": empty file");
    }
    CsvTable table;
    table.columns = split_line(line);
    table.values.resize(table.columns.size());
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != table.columns.size()) {
            throw DataError(path.string() + ": row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(table.columns.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            if (!parse_double(cells[c], v)) {
                throw DataError(path.string() + ": parse error at row " + std::to_string(row) +
                                ", column " + table.columns[c] + ": '" + cells[c] + "'");
            }
            table.values[c].push_back(v);
        }
    }
    return table;
}

void write_csv_table(const std::filesystem::path& path, const CsvTable& table) {
    std::ostringstream out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out << (c ? "," : "") << table.columns[c];
    }
    out << '\n';
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            out << (c ? "," : "") << format_double(table.values[c][r]);
        }
        out << '\n';
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw DataError("cannot write " + path.string());
    }
    file << out.str();
}

} // namespace uqkit
