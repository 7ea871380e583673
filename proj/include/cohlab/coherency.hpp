#pragma once

#include "cohlab/transient_sim.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace cohlab {

enum class Metric { cc, ks };
const char* to_string(Metric metric);
Metric parse_metric(const std::string& s);

/// Square symmetric machine x machine similarity.
struct SimilarityMatrix {
    Eigen::MatrixXd values;
    Metric metric = Metric::cc;
    double t_ref = 0.0;
    std::vector<std::string> machine_labels;
    std::vector<bool> degenerate;  // cc only: machine whose window series is constant

    std::size_t order() const { return static_cast<std::size_t>(values.rows()); }
};

/// Series whose standard deviation is below this (in series units) count as constant.
inline constexpr double kConstantSeriesStd = 1e-9;

struct Correlation {
    double value = 0.0;
    bool degenerate = false;
};

/// Pearson product-moment correlation. A constant input is degenerate: the
/// value is 1 when both series are constant, else 0.
Correlation pearson_cc(std::span<const double> x, std::span<const double> y);

struct TimeWindow {
    double begin = 0.0;
    double end = 0.0;  // also the evaluation instant t_ref
};

struct WindowSpec {
    double length_s = 2.0;
    double step_s = 0.1;
};

/// Sample index range [first, last) of `times` falling inside the closed window.
std::pair<std::size_t, std::size_t> window_samples(std::span<const double> times, const TimeWindow& w);

/// Windows [t_k - length, t_k] with t_k = t_0 + length + k*step up to the last sample.
std::vector<TimeWindow> sliding_windows(std::span<const double> times, const WindowSpec& spec);
inline std::vector<TimeWindow> sliding_windows(const RotorTrajectory& traj, const WindowSpec& spec) {
    return sliding_windows(traj.times, spec);
}

/// Pairwise correlation of referenced rotor angles inside `window`.
SimilarityMatrix cc_matrix(const RotorTrajectory& traj, const TimeWindow& window);
/// Same, over a precomputed referenced-angle matrix (machines x samples).
SimilarityMatrix cc_matrix(const SeriesMatrix& angles, std::span<const double> times,
                           const std::vector<std::string>& labels, const TimeWindow& window);

/// Ks_ij = |E'_i||E'_j| Im(y_red_ij) cos(d_i - d_j) off the diagonal; zero diagonal.
SimilarityMatrix ks_matrix(const ReducedNetwork& red, std::span<const double> delta);

/// Per-machine sum over j of Ks_ij.
Eigen::VectorXd ks_row_sums(const SimilarityMatrix& ks);

}  // namespace cohlab
