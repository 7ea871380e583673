#pragma once

#include "cohlab/clustering.hpp"
#include "cohlab/coherency.hpp"
#include "cohlab/indices.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cohlab {

struct AnalysisOptions {
    Metric metric = Metric::cc;
    WindowSpec windows{};
    Linkage linkage = Linkage::average;
    CutCriterion cut = LargestGap{};
    // When set, every window uses this partition instead of re-clustering.
    std::optional<std::vector<std::vector<std::string>>> frozen_groups;
};

struct WindowResult {
    TimeWindow window;
    SimilarityMatrix similarity;
    Dendrogram dendrogram;
    CoherencyGrouping grouping;
    IndexSample indices;
};

/// Similarity for one window: cc over the window samples, or ks at the window
/// end using the network epoch in force at that instant.
SimilarityMatrix window_similarity(const RotorTrajectory& traj, const SeriesMatrix& angles, const TimeWindow& w,
                                   Metric metric);

WindowResult analyze_window(const RotorTrajectory& traj, const SeriesMatrix& angles, const TimeWindow& w,
                            const AnalysisOptions& opts);

/// Reference implementation: one window after another.
std::vector<WindowResult> analyze_windows_serial(const RotorTrajectory& traj, const AnalysisOptions& opts);

/// Same results, windows distributed over OpenMP threads.
std::vector<WindowResult> analyze_windows_parallel(const RotorTrajectory& traj, const AnalysisOptions& opts);

inline std::vector<WindowResult> analyze_windows(const RotorTrajectory& traj, const AnalysisOptions& opts) {
    return analyze_windows_parallel(traj, opts);
}

IndexSeries index_series(const std::vector<WindowResult>& results);

}  // namespace cohlab
