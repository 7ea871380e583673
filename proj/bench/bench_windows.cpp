// Serial vs OpenMP window analysis on the bundled 39-bus scenario.
#include "cohlab/window_analysis.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

using namespace cohlab;

namespace {

template <typename F>
double best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        best = std::min(best, dt.count());
    }
    return best;
}

bool same(const std::vector<WindowResult>& a, const std::vector<WindowResult>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].similarity.values != b[k].similarity.values) return false;
        if (a[k].grouping.members != b[k].grouping.members) return false;
        if (a[k].indices.cf_sf != b[k].indices.cf_sf) return false;
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    const std::filesystem::path data = argc > 1 ? argv[1] : COHLAB_DATA_DIR;
    const double t_stop = argc > 2 ? std::atof(argv[2]) : 100.0;
    const int reps = argc > 3 ? std::atoi(argv[3]) : 3;

    const NetworkCase net = load_case(data / "ieee39.case");
    const EventSchedule events = load_event_schedule(data / "scenario1.events");
    SimOptions so;
    so.t_stop = t_stop;
    so.sample_every = 10;
    so.warn = [](const std::string&) {};
    const RotorTrajectory traj = simulate(net, events, so);

    std::printf("threads: %d, samples: %zu\n", omp_get_max_threads(), traj.sample_count());
    std::printf("%-6s %10s %12s %12s %8s %s\n", "metric", "windows", "serial_s", "parallel_s", "speedup", "identical");
    for (Metric m : {Metric::cc, Metric::ks}) {
        AnalysisOptions opts;
        opts.metric = m;
        std::vector<WindowResult> rs, rp;
        const double ts = best_of(reps, [&] { rs = analyze_windows_serial(traj, opts); });
        const double tp = best_of(reps, [&] { rp = analyze_windows_parallel(traj, opts); });
        std::printf("%-6s %10zu %12.4f %12.4f %8.2f %s\n", to_string(m), rs.size(), ts, tp, ts / tp,
                    same(rs, rp) ? "yes" : "NO");
    }
    return 0;
}
