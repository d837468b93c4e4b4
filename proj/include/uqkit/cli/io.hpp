#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "uqkit/conformal.hpp"
#include "uqkit/csv.hpp"
#include "uqkit/matrix.hpp"

// File formats of the command-line tool. Every reader raises DataError with
// the file name and row on malformed content.
namespace uqkit::cli {

/// All columns, as an n x K matrix of finite values.
Matrix read_matrix(const std::filesystem::path& path);
/// As read_matrix, and every row must be a probability vector (tolerance 1e-6).
Matrix read_probs(const std::filesystem::path& path);
/// Column `target` if present, otherwise the only column.
std::vector<double> read_targets(const std::filesystem::path& path);
/// Integer labels in [0, num_classes).
std::vector<int> read_labels(const std::filesystem::path& path, std::size_t num_classes);
/// Named columns, in the order requested.
std::vector<std::vector<double>> read_columns(const std::filesystem::path& path,
                                              const std::vector<std::string>& names);

/// `set,size` rows; labels joined by ';'.
void write_sets(const std::filesystem::path& path, const std::vector<conformal::PredictionSet>& sets);
void write_intervals(const std::filesystem::path& path, const std::vector<Interval>& intervals);
void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace uqkit::cli
