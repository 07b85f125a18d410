#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace spl {

/// Row-major state matrix: one row per variable, N samples per row.
struct DataMatrix {
    std::vector<std::vector<double>> rows;

    std::size_t num_vars() const { return rows.size(); }
    std::size_t num_points() const { return rows.empty() ? 0 : rows[0].size(); }
};

struct DatasetMeta {
    double noise_level = 0.0;
    double dt = 0.0;
    std::string smoothing;  // e.g. "savitzky_golay(21,3)" or empty
    std::string source;
};

/// Training unit: state variables Y (m rows x N columns) and the target
/// vector the candidate expression must reproduce (a numerically estimated
/// derivative, or the dependent variable for plain regression).
struct Dataset {
    std::vector<std::string> var_names;  // size m, aligned with Y.rows
    DataMatrix Y;
    std::vector<double> target;
    DatasetMeta meta;

    std::size_t num_points() const { return target.size(); }
};

}  // namespace spl
