#include "cohlab/window_analysis.hpp"

#include <exception>

namespace cohlab {

namespace {

void check_inputs(const RotorTrajectory& traj, const AnalysisOptions& opts) {
    if (traj.machine_count() == 0) throw InputError("trajectory has no machines");
    if (opts.metric == Metric::ks && traj.epochs.empty()) {
        throw InputError("metric ks requires the epochs sidecar (--epochs)");
    }
}

}  // namespace

SimilarityMatrix window_similarity(const RotorTrajectory& traj, const SeriesMatrix& angles, const TimeWindow& w,
                                   Metric metric) {
    if (metric == Metric::cc) return cc_matrix(angles, traj.times, traj.machine_labels, w);

    const auto [first, last] = window_samples(traj.times, w);
    if (last == first) throw InputError("ks: window holds no samples");
    const auto col = static_cast<Eigen::Index>(last - 1);
    std::vector<double> delta(traj.machine_count());
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = angles(static_cast<Eigen::Index>(i), col);

    SimilarityMatrix sim = ks_matrix(traj.epoch_at(w.end).network, delta);
    sim.t_ref = w.end;
    sim.machine_labels = traj.machine_labels;
    return sim;
}

WindowResult analyze_window(const RotorTrajectory& traj, const SeriesMatrix& angles, const TimeWindow& w,
                            const AnalysisOptions& opts) {
    WindowResult r;
    r.window = w;
    r.similarity = window_similarity(traj, angles, w, opts.metric);
    r.dendrogram = agglomerate(to_distance(r.similarity), opts.linkage, traj.machine_labels);
    if (opts.frozen_groups) {
        r.grouping = grouping_from_labels(*opts.frozen_groups, traj.machine_labels, opts.metric);
    } else {
        r.grouping = cut(r.dendrogram, opts.cut, opts.metric);
    }
    r.indices = index_sample(r.similarity, r.grouping);
    return r;
}

std::vector<WindowResult> analyze_windows_serial(const RotorTrajectory& traj, const AnalysisOptions& opts) {
    check_inputs(traj, opts);
    const auto windows = sliding_windows(traj, opts.windows);
    const SeriesMatrix angles = traj.reference_angles();
    std::vector<WindowResult> out;
    out.reserve(windows.size());
    for (const auto& w : windows) out.push_back(analyze_window(traj, angles, w, opts));
    return out;
}

std::vector<WindowResult> analyze_windows_parallel(const RotorTrajectory& traj, const AnalysisOptions& opts) {
    check_inputs(traj, opts);
    const auto windows = sliding_windows(traj, opts.windows);
    const SeriesMatrix angles = traj.reference_angles();
    std::vector<WindowResult> out(windows.size());

    // Exceptions may not cross the parallel region; keep the one from the earliest window.
    std::exception_ptr error;
    long long error_at = -1;
    const auto count = static_cast<long long>(windows.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (long long k = 0; k < count; ++k) {
        try {
            out[static_cast<std::size_t>(k)] = analyze_window(traj, angles, windows[static_cast<std::size_t>(k)], opts);
        } catch (...) {
#pragma omp critical(cohlab_window_error)
            {
                if (error_at < 0 || k < error_at) {
                    error_at = k;
                    error = std::current_exception();
                }
            }
        }
    }
    if (error) std::rethrow_exception(error);
    return out;
}

IndexSeries index_series(const std::vector<WindowResult>& results) {
    IndexSeries s;
    s.samples.reserve(results.size());
    for (const auto& r : results) s.samples.push_back(r.indices);
    return s;
}

}  // namespace cohlab
