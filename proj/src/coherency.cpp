#include "cohlab/coherency.hpp"

#include <algorithm>
#include <cmath>

namespace cohlab {

const char* to_string(Metric metric) { return metric == Metric::cc ? "cc" : "ks"; }

Metric parse_metric(const std::string& s) {
    if (s == "cc") return Metric::cc;
    if (s == "ks") return Metric::ks;
    throw InputError("unknown metric '" + s + "' (expected cc or ks)");
}

namespace {

double time_eps(double t) { return 1e-9 * std::max(1.0, std::abs(t)); }

}  // namespace

Correlation pearson_cc(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InputError("pearson_cc: series lengths differ");
    if (x.size() < 3) throw InputError("pearson_cc: at least 3 samples required");
    const auto n = static_cast<double>(x.size());

    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mean_x += x[k];
        mean_y += y[k];
    }
    mean_x /= n;
    mean_y /= n;

    // Correlation is shift invariant; evaluating it on mean-shifted samples avoids cancellation.
    double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double a = x[k] - mean_x;
        const double b = y[k] - mean_y;
        sx += a;
        sy += b;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
    }
    const double var_x = n * sxx - sx * sx;
    const double var_y = n * syy - sy * sy;
    const bool flat_x = std::sqrt(std::max(var_x, 0.0)) / n < kConstantSeriesStd;
    const bool flat_y = std::sqrt(std::max(var_y, 0.0)) / n < kConstantSeriesStd;
    if (flat_x || flat_y) return {flat_x && flat_y ? 1.0 : 0.0, true};

    const double r = (n * sxy - sx * sy) / (std::sqrt(var_x) * std::sqrt(var_y));
    return {std::clamp(r, -1.0, 1.0), false};
}

std::pair<std::size_t, std::size_t> window_samples(std::span<const double> times, const TimeWindow& w) {
    const auto lo = std::lower_bound(times.begin(), times.end(), w.begin - time_eps(w.begin));
    const auto hi = std::upper_bound(times.begin(), times.end(), w.end + time_eps(w.end));
    return {static_cast<std::size_t>(lo - times.begin()), static_cast<std::size_t>(hi - times.begin())};
}

std::vector<TimeWindow> sliding_windows(std::span<const double> times, const WindowSpec& spec) {
    if (!(spec.length_s > 0.0) || !(spec.step_s > 0.0)) throw InputError("window length and step must be positive");
    if (times.empty()) throw InputError("sliding_windows: empty trajectory");
    const double t0 = times.front();
    const double t_last = times.back();
    if (t0 + spec.length_s > t_last + time_eps(t_last)) {
        throw InputError("window longer than trajectory");
    }
    const auto [a, b] = window_samples(times, {t0, t0 + spec.length_s});
    if (b - a < 3) throw InputError("window holds fewer than 3 samples at this sampling rate");

    std::vector<TimeWindow> out;
    for (long long k = 0;; ++k) {
        const double end = t0 + spec.length_s + static_cast<double>(k) * spec.step_s;
        if (end > t_last + time_eps(t_last)) break;
        out.push_back({end - spec.length_s, end});
    }
    return out;
}

SimilarityMatrix cc_matrix(const SeriesMatrix& angles, std::span<const double> times,
                           const std::vector<std::string>& labels, const TimeWindow& window) {
    const auto [first, last] = window_samples(times, window);
    if (last - first < 3) throw InputError("cc_matrix: window holds fewer than 3 samples");
    const auto n = static_cast<Eigen::Index>(angles.rows());
    const auto len = last - first;

    SimilarityMatrix sim;
    sim.metric = Metric::cc;
    sim.t_ref = window.end;
    sim.machine_labels = labels;
    sim.values = Eigen::MatrixXd::Identity(n, n);
    sim.degenerate.assign(static_cast<std::size_t>(n), false);

    auto series = [&](Eigen::Index i) {
        return std::span<const double>(angles.data() + i * angles.cols() + static_cast<Eigen::Index>(first), len);
    };
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const Correlation c = pearson_cc(series(i), series(j));
            sim.values(i, j) = c.value;
            sim.values(j, i) = c.value;
        }
        // Self-correlation flags constant machines without depending on a partner.
        sim.degenerate[static_cast<std::size_t>(i)] = pearson_cc(series(i), series(i)).degenerate;
    }
    return sim;
}

SimilarityMatrix cc_matrix(const RotorTrajectory& traj, const TimeWindow& window) {
    return cc_matrix(traj.reference_angles(), traj.times, traj.machine_labels, window);
}

SimilarityMatrix ks_matrix(const ReducedNetwork& red, std::span<const double> delta) {
    const std::size_t n = red.order();
    if (delta.size() != n) throw InputError("ks_matrix: angle vector length differs from machine count");
    SimilarityMatrix sim;
    sim.metric = Metric::ks;
    sim.machine_labels = red.machine_labels;
    sim.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto a = static_cast<Eigen::Index>(i);
            const auto b = static_cast<Eigen::Index>(j);
            const double v = red.e_mag[i] * red.e_mag[j] * red.y_red(a, b).imag() * std::cos(delta[i] - delta[j]);
            sim.values(a, b) = v;
            sim.values(b, a) = v;
        }
    }
    return sim;
}

Eigen::VectorXd ks_row_sums(const SimilarityMatrix& ks) { return ks.values.rowwise().sum(); }

}  // namespace cohlab
