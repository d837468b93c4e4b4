#include "uqkit/data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "uqkit/csv.hpp"
#include "uqkit/error.hpp"
#include "uqkit/rng.hpp"

namespace uqkit {

std::string_view to_string(Task task) {
    return task == Task::classification ? "classification" : "regression";
}

Task parse_task(std::string_view name) {
    if (name == "classification") return Task::classification;
    if (name == "regression") return Task::regression;
    throw InvalidInput("unknown task '" + std::string(name) + "'");
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.task = task;
    out.num_classes = num_classes;
    out.feature_names = feature_names;
    out.inputs = inputs.select_rows(rows);
    if (task == Task::classification) {
        out.labels.reserve(rows.size());
        for (auto r : rows) out.labels.push_back(labels[r]);
    } else {
        out.targets.reserve(rows.size());
        for (auto r : rows) out.targets.push_back(targets[r]);
    }
    return out;
}

void Dataset::validate() const {
    if (size() == 0) {
        throw InvalidInput("dataset is empty");
    }
    if (!inputs.all_finite()) {
        throw InvalidInput("dataset inputs contain non-finite values");
    }
    if (task == Task::classification) {
        if (labels.size() != size()) throw InvalidInput("label count differs from row count");
        for (int y : labels) {
            if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
                throw InvalidInput("label " + std::to_string(y) + " outside [0, " + std::to_string(num_classes) + ")");
            }
        }
    } else {
        if (targets.size() != size()) throw InvalidInput("target count differs from row count");
        for (double t : targets) {
            if (!std::isfinite(t)) throw InvalidInput("regression targets contain non-finite values");
        }
    }
}

Dataset load_csv(const std::filesystem::path& path, Task task, std::string_view target_column,
                 std::optional<std::size_t> num_classes) {
    const CsvTable table = read_csv_table(path);
    const std::size_t target = table.column_index(target_column);
    const std::size_t n = table.rows();
    if (n == 0) {
        throw DataError(path.string() + ": no data rows");
    }
    Dataset ds;
    ds.task = task;
    ds.inputs = Matrix(n, table.columns.size() - 1);
    std::size_t col = 0;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c == target) continue;
        ds.feature_names.push_back(table.columns[c]);
        for (std::size_t r = 0; r < n; ++r) {
            const double v = table.values[c][r];
            if (!std::isfinite(v)) {
                throw DataError(path.string() + ": non-finite value at row " + std::to_string(r + 2) +
                                ", column " + table.columns[c]);
            }
            ds.inputs(r, col) = v;
        }
        ++col;
    }
    const auto& raw = table.values[target];
    if (task == Task::classification) {
        int max_label = 0;
        for (std::size_t r = 0; r < n; ++r) {
            const double v = raw[r];
            if (!(v >= 0.0) || v != std::floor(v) || v > 1e9) {
                throw DataError(path.string() + ": row " + std::to_string(r + 2) + ", column " +
                                std::string(target_column) + " is not a non-negative integer label");
            }
            ds.labels.push_back(static_cast<int>(v));
            max_label = std::max(max_label, ds.labels.back());
        }
        ds.num_classes = num_classes.value_or(static_cast<std::size_t>(max_label) + 1);
        if (static_cast<std::size_t>(max_label) >= ds.num_classes) {
            throw DataError(path.string() + ": label " + std::to_string(max_label) +
                            " exceeds the configured class count");
        }
    } else {
        for (double v : raw) {
            if (!std::isfinite(v)) throw DataError(path.string() + ": non-finite regression target");
        }
        ds.targets = raw;
    }
    return ds;
}

void write_csv(const std::filesystem::path& path, const Dataset& ds, std::string_view target_column) {
    CsvTable table;
    for (std::size_t c = 0; c < ds.dim(); ++c) {
        table.columns.push_back(c < ds.feature_names.size() ? ds.feature_names[c] : "x" + std::to_string(c));
        std::vector<double> col(ds.size());
        for (std::size_t r = 0; r < ds.size(); ++r) col[r] = ds.inputs(r, c);
        table.values.push_back(std::move(col));
    }
    table.columns.emplace_back(target_column);
    if (ds.task == Task::classification) {
        table.values.emplace_back(ds.labels.begin(), ds.labels.end());
    } else {
        table.values.push_back(ds.targets);
    }
    write_csv_table(path, table);
}

Splits split(const Dataset& ds, std::array<double, 3> fractions, std::uint64_t seed) {
    double total = 0.0;
    for (double f : fractions) {
        if (!(f > 0.0)) throw InvalidInput("split fractions must be positive");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw InvalidInput("split fractions must sum to 1");
    }
    const std::size_t n = ds.size();
    // The epsilon absorbs products such as 0.29 * 100 = 28.999999999999996.
    const auto part = [n](double f) { return static_cast<std::size_t>(std::floor(static_cast<double>(n) * f + 1e-9)); };
    const std::size_t n_calib = part(fractions[1]);
    const std::size_t n_test = part(fractions[2]);
    if (n_calib == 0 || n_test == 0 || n_calib + n_test >= n) {
        throw InvalidInput("invalid split: a partition would be empty for n=" + std::to_string(n));
    }
    const std::size_t n_train = n - n_calib - n_test;
    Rng rng(seed);
    const auto perm = rng.permutation(n);
    const std::span<const std::size_t> all(perm);
    return {ds.subset(all.subspan(0, n_train)), ds.subset(all.subspan(n_train, n_calib)),
            ds.subset(all.subspan(n_train + n_calib, n_test))};
}

std::size_t batches_per_epoch(std::size_t n, const BatchPlan& plan) {
    return plan.drop_last ? n / plan.batch_size : (n + plan.batch_size - 1) / plan.batch_size;
}

std::vector<Batch> batches(const Dataset& ds, const BatchPlan& plan, std::size_t epoch) {
    if (plan.batch_size == 0) {
        throw InvalidInput("batch_size must be at least 1");
    }
    Rng rng = Rng::child(plan.shuffle_seed, epoch);
    const auto perm = rng.permutation(ds.size());
    const std::size_t count = batches_per_epoch(ds.size(), plan);
    std::vector<Batch> out;
    out.reserve(count);
    for (std::size_t b = 0; b < count; ++b) {
        const std::size_t start = b * plan.batch_size;
        const std::size_t len = std::min(plan.batch_size, ds.size() - start);
        const std::span<const std::size_t> rows(perm.data() + start, len);
        Batch batch;
        batch.rows.assign(rows.begin(), rows.end());
        batch.inputs = ds.inputs.select_rows(rows);
        if (ds.task == Task::classification) {
            for (auto r : rows) batch.labels.push_back(ds.labels[r]);
        } else {
            for (auto r : rows) batch.targets.push_back(ds.targets[r]);
        }
        out.push_back(std::move(batch));
    }
    return out;
}

Dataset synth_classification(std::string_view name, std::size_t n, double noise, std::uint64_t seed,
                             std::size_t classes) {
    if (n < 2) throw InvalidInput("synthetic datasets need n >= 2");
    if (!(noise >= 0.0)) throw InvalidInput("noise must be non-negative");
    Rng rng(seed);
    Matrix points(n, 2);
    std::vector<int> labels(n);
    std::size_t k = 0;
    if (name == "two_moons") {
        k = 2;
        const std::size_t n_outer = n / 2;
        const std::size_t n_inner = n - n_outer;
        const auto angle = [](std::size_t i, std::size_t count) {
            return count <= 1 ? 0.0 : std::numbers::pi * static_cast<double>(i) / static_cast<double>(count - 1);
        };
        for (std::size_t i = 0; i < n_outer; ++i) {
            const double t = angle(i, n_outer);
            points(i, 0) = std::cos(t);
            points(i, 1) = std::sin(t);
            labels[i] = 0;
        }
        for (std::size_t i = 0; i < n_inner; ++i) {
            const double t = angle(i, n_inner);
            points(n_outer + i, 0) = 1.0 - std::cos(t);
            points(n_outer + i, 1) = 0.5 - std::sin(t);
            labels[n_outer + i] = 1;
        }
        for (double& v : points.flat()) v += noise * rng.standard_normal();
    } else if (name == "gaussian_blobs") {
        if (classes < 2) throw InvalidInput("gaussian_blobs needs at least 2 classes");
        k = classes;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = i % k;
            const double phi = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(k);
            points(i, 0) = 3.0 * std::cos(phi) + noise * rng.standard_normal();
            points(i, 1) = 3.0 * std::sin(phi) + noise * rng.standard_normal();
            labels[i] = static_cast<int>(c);
        }
    } else {
        throw InvalidInput("unknown synthetic generator '" + std::string(name) + "'");
    }
    Dataset ds;
    ds.task = Task::classification;
    ds.num_classes = k;
    ds.feature_names = {"x0", "x1"};
    Dataset ordered = ds;
    ordered.inputs = std::move(points);
    ordered.labels = std::move(labels);
    const auto perm = rng.permutation(n);
    return ordered.subset(perm);
}

Dataset synth_regression(std::size_t n, double noise, std::uint64_t seed) {
    if (n < 2) throw InvalidInput("synthetic datasets need n >= 2");
    Rng rng(seed);
    Dataset ds;
    ds.task = Task::regression;
    ds.feature_names = {"x0"};
    ds.inputs = Matrix(n, 1);
    ds.targets.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 2.0 * rng.uniform() - 1.0;
        ds.inputs(i, 0) = x;
        ds.targets[i] = std::sin(3.0 * x + 1.0) + noise * rng.standard_normal();
    }
    return ds;
}

} // namespace uqkit
