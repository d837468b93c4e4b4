#include "uqkit/cli/io.hpp"

#include <cmath>
#include <fstream>

#include "uqkit/cli/pipeline.hpp"
#include "uqkit/error.hpp"

namespace uqkit::cli {

namespace {

std::string where(const std::filesystem::path& path, std::size_t row) {
    // header is file row 1
    return path.string() + ": row " + std::to_string(row + 2);
}

} // namespace

Matrix read_matrix(const std::filesystem::path& path) {
    const CsvTable t = read_csv_table(path);
    if (t.rows() == 0) throw DataError(path.string() + ": no data rows");
    Matrix m(t.rows(), t.columns.size());
    for (std::size_t c = 0; c < t.columns.size(); ++c)
        for (std::size_t r = 0; r < t.rows(); ++r) {
            const double v = t.values[c][r];
            if (!std::isfinite(v)) throw DataError(where(path, r) + ", column " + t.columns[c] + ": value is not finite");
            m(r, c) = v;
        }
    return m;
}

Matrix read_probs(const std::filesystem::path& path) {
    Matrix p = read_matrix(path);
    if (p.cols() < 2) throw DataError(path.string() + ": probabilities need at least two class columns");
    for (std::size_t r = 0; r < p.rows(); ++r) {
        double s = 0.0;
        for (double v : p.row(r)) {
            if (v < 0.0) throw DataError(where(path, r) + ": negative probability");
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-6) throw DataError(where(path, r) + ": probabilities sum to " + format_double(s));
    }
    return p;
}

std::vector<double> read_targets(const std::filesystem::path& path) {
    const CsvTable t = read_csv_table(path);
    if (t.rows() == 0) throw DataError(path.string() + ": no data rows");
    if (!t.has_column("target") && t.columns.size() != 1)
        throw DataError(path.string() + ": expected a 'target' column or a single column");
    const auto& col = t.has_column("target") ? t.column("target") : t.values[0];
    for (std::size_t r = 0; r < col.size(); ++r)
        if (!std::isfinite(col[r])) throw DataError(where(path, r) + ": target is not finite");
    return col;
}

std::vector<int> read_labels(const std::filesystem::path& path, std::size_t num_classes) {
    const auto raw = read_targets(path);
    std::vector<int> labels;
    for (std::size_t r = 0; r < raw.size(); ++r) {
        const double v = raw[r];
        if (v != std::floor(v) || v < 0.0 || v >= static_cast<double>(num_classes))
            throw DataError(where(path, r) + ": label " + format_double(v) + " is not an integer in [0, " +
                            std::to_string(num_classes) + ")");
        labels.push_back(static_cast<int>(v));
    }
    return labels;
}

std::vector<std::vector<double>> read_columns(const std::filesystem::path& path,
                                              const std::vector<std::string>& names) {
    const CsvTable t = read_csv_table(path);
    if (t.rows() == 0) throw DataError(path.string() + ": no data rows");
    std::vector<std::vector<double>> out;
    for (const auto& name : names) {
        const auto& col = t.column(name);
        for (std::size_t r = 0; r < col.size(); ++r)
            if (!std::isfinite(col[r])) throw DataError(where(path, r) + ", column " + name + ": value is not finite");
        out.push_back(col);
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
}

void write_sets(const std::filesystem::path& path, const std::vector<conformal::PredictionSet>& sets) {
    std::string text = "set,size\n";
    for (const auto& s : sets) text += format_set(s) + "," + std::to_string(s.size()) + "\n";
    write_text(path, text);
}

void write_intervals(const std::filesystem::path& path, const std::vector<Interval>& intervals) {
    CsvTable t{{"lower", "upper"}, {{}, {}}};
    for (const auto& i : intervals) {
        t.values[0].push_back(i.lower);
        t.values[1].push_back(i.upper);
    }
    write_csv_table(path, t);
}

} // namespace uqkit::cli
