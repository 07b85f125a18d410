#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "spl/dataset.hpp"
#include "spl/expr.hpp"
#include "spl/rng.hpp"

namespace spl {

/// Add i.i.d. Gaussian noise scaled so that RMS(noise) = level * RMS(values).
/// Throws DataError for an all-zero signal with level > 0.
std::vector<double> add_noise(std::span<const double> values, double level, Rng& rng);

/// Second-order derivative estimate: central differences on the interior,
/// one-sided 3-point formulas at the ends. Requires length >= 3, dt > 0.
std::vector<double> central_difference(std::span<const double> series, double dt);

/// Savitzky-Golay smoothing: per-point least-squares polynomial fit over a
/// centered window. Edge points use the first/last full window's polynomial
/// evaluated at their offsets. window must be odd, > polyorder, <= length.
std::vector<double> savitzky_golay(std::span<const double> series, int window, int polyorder);

/// Weights of the filter for the point at `offset` from the window center
/// (offset 0 = the smoothed center point). Exposed for testing.
std::vector<double> savitzky_golay_weights(int window, int polyorder, int offset);

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;  // one row per state variable
};

/// Classic fixed-step RK4. Throws DataError (with the blow-up time) when the
/// state leaves the finite range.
Trajectory integrate_ode(const OdeRhs& rhs, std::span<const double> y0, double t0, double t1,
                         double dt);

struct LorenzConfig {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
    std::vector<double> y0 = {-8.0, 7.0, 27.0};
    double dt = 1e-3;
    double t_end = 10.0;
    double noise_level = 0.05;
    int sg_window = 21;
    int sg_polyorder = 3;
    bool smooth_states_first = false;  // default: differentiate, then smooth
    /// Emit filtered states as the observation matrix Y instead of the raw
    /// noisy ones. Raw noisy observations leak attenuation bias into fitted
    /// coefficients through the product terms, so the dynamics experiment
    /// enables this.
    bool smooth_observations = false;
    std::uint64_t seed = 0;
};

/// Integrate the Lorenz system, add noise, estimate derivatives numerically
/// and smooth them; returns one dataset per state dimension (target = that
/// dimension's smoothed derivative, Y = the noisy states).
std::vector<Dataset> make_lorenz_dataset(const LorenzConfig& cfg);

/// Analytic Lorenz right-hand side (test oracle support).
void lorenz_rhs(double sigma, double rho, double beta, std::span<const double> y,
                std::span<double> dydt);

struct SamplingSpec {
    struct VarRange {
        std::string name;
        double lo;
        double hi;
    };
    std::vector<VarRange> vars;
    int points = 20;
    /// If true, points where the target is non-finite are redrawn; otherwise
    /// such a draw is an error.
    bool resample_invalid = true;
};

struct FunctionDatasetPair {
    Dataset train;
    Dataset test;
};

/// Sample a ground-truth expression uniformly per the spec and return a
/// train/test dataset pair (independent draws, same protocol). Noise is
/// applied to the training target only.
FunctionDatasetPair make_function_dataset(const ExpressionTree& target, const SamplingSpec& spec,
                                          double noise_level, Rng& rng);

struct CsvSchema {
    std::vector<std::string> variable_columns;  // empty = every non-target column
    std::string target_column;
    std::string time_column;  // optional; exposed through meta.dt when regular
};

struct CsvLoadInfo {
    std::size_t rows_dropped = 0;  // non-finite rows removed
};

/// Load a comma-separated file (header row, '.' decimal separator) into a
/// Dataset. Rows containing non-finite values are dropped and counted.
Dataset load_csv(const std::string& path, const CsvSchema& schema,
                 CsvLoadInfo* info = nullptr);

/// Columnar CSV writer used by every report (deterministic formatting).
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Least squares fit rhs ~ sum_j coeff_j * columns[j] by normal equations.
/// Small column counts only (polynomial projections, filter design).
std::vector<double> solve_least_squares(const std::vector<std::vector<double>>& columns,
                                        std::span<const double> rhs);

/// Dataset metadata sidecar (structured text), written next to exported data.
void save_dataset_meta(const Dataset& ds, const std::string& path);

}  // namespace spl
