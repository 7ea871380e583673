#include "support.hpp"

#include "cohlab/trajectory_io.hpp"
#include "cohlab/window_analysis.hpp"

#include <doctest.h>
#include <omp.h>

using namespace cohlab;

namespace {

const RotorTrajectory& scenario1_20s() {
    static const RotorTrajectory traj = [] {
        const auto net = load_case(testsupport::data_dir() / "ieee39.case");
        SimOptions o;
        o.t_stop = 25.0;
        o.sample_every = 10;
        o.warn = [](const std::string&) {};
        return simulate(net, load_event_schedule(testsupport::data_dir() / "scenario1.events"), o);
    }();
    return traj;
}

RotorTrajectory periodic(std::size_t machines, double t_end) {
    RotorTrajectory t;
    const auto n = static_cast<std::size_t>(std::llround(t_end / 0.01)) + 1;
    t.delta.resize(static_cast<Eigen::Index>(machines), static_cast<Eigen::Index>(n));
    for (std::size_t s = 0; s < n; ++s) {
        const double time = 0.01 * static_cast<double>(s);
        t.times.push_back(time);
        for (std::size_t i = 0; i < machines; ++i) {
            // Two families with a 1 s period; every 2 s window sees the same shape.
            const double sign = i < machines / 2 ? 1.0 : -1.0;
            t.delta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) =
                sign * std::sin(2.0 * std::numbers::pi * time) + 0.05 * static_cast<double>(i) * std::cos(2.0 * std::numbers::pi * time);
        }
    }
    for (std::size_t i = 0; i < machines; ++i) t.machine_labels.push_back("M" + std::to_string(i + 1));
    return t;
}

void require_identical(const std::vector<WindowResult>& a, const std::vector<WindowResult>& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].window.end == b[k].window.end);
        CHECK(a[k].similarity.values == b[k].similarity.values);
        CHECK(a[k].grouping.members == b[k].grouping.members);
        CHECK(a[k].indices.group_matrix.values == b[k].indices.group_matrix.values);
        CHECK(a[k].indices.cf.aggregate == b[k].indices.cf.aggregate);
        const bool same_ratio = a[k].indices.cf_sf == b[k].indices.cf_sf ||
                                (a[k].indices.cf_sf && std::isnan(*a[k].indices.cf_sf) && std::isnan(*b[k].indices.cf_sf));
        CHECK(same_ratio);
    }
}

}  // namespace

TEST_SUITE("window_analysis") {

TEST_CASE("parallel analysis is bit-identical to the serial reference") {
    const auto& traj = scenario1_20s();
    const int saved = omp_get_max_threads();
    omp_set_num_threads(4);
    for (Metric m : {Metric::cc, Metric::ks}) {
        for (Linkage l : {Linkage::single, Linkage::average}) {
            AnalysisOptions o;
            o.metric = m;
            o.linkage = l;
            require_identical(analyze_windows_serial(traj, o), analyze_windows_parallel(traj, o));
        }
    }
    omp_set_num_threads(saved);
}

TEST_CASE("ks windows use the network in force at the window end") {
    const auto& traj = scenario1_20s();
    AnalysisOptions o;
    o.metric = Metric::ks;
    const auto res = analyze_windows_serial(traj, o);
    const SeriesMatrix ang = traj.reference_angles();
    for (const auto& r : res) {
        const auto [first, last] = window_samples(traj.times, r.window);
        std::vector<double> delta(traj.machine_count());
        for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = ang(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(last - 1));
        const auto expect = ks_matrix(traj.epoch_at(r.window.end).network, delta);
        CHECK((expect.values - r.similarity.values).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("ks without network epochs is refused") {
    auto traj = scenario1_20s();
    traj.epochs.clear();
    AnalysisOptions o;
    o.metric = Metric::ks;
    CHECK_THROWS_WITH_AS(analyze_windows_serial(traj, o), doctest::Contains("epochs"), InputError);
    CHECK_THROWS_AS(analyze_windows_parallel(traj, o), InputError);
}

TEST_CASE("errors inside parallel windows reach the caller") {
    auto traj = periodic(4, 6.0);
    AnalysisOptions o;
    o.frozen_groups = std::vector<std::vector<std::string>>{{"M1", "M2"}, {"nobody"}};
    CHECK_THROWS_AS(analyze_windows_parallel(traj, o), InputError);
}

TEST_CASE("a constant trajectory gives a constant index series") {
    RotorTrajectory t = periodic(3, 5.0);
    t.delta.setConstant(0.25);
    AnalysisOptions o;
    const auto series = index_series(analyze_windows(t, o));
    REQUIRE_FALSE(series.samples.empty());
    for (const auto& s : series.samples) {
        CHECK(s.cf.aggregate == series.samples.front().cf.aggregate);
        CHECK(s.group_matrix.order() == 1);
        CHECK_FALSE(s.sf.has_value());
    }
}

TEST_CASE("freezing the re-clustered grouping changes nothing on stationary signals") {
    const auto traj = periodic(6, 8.0);
    AnalysisOptions o;
    o.cut = FixedK{2};
    const auto free_run = analyze_windows_serial(traj, o);
    for (const auto& r : free_run) CHECK(r.grouping.groups == free_run.front().grouping.groups);

    o.frozen_groups = free_run.front().grouping.groups;
    const auto frozen = analyze_windows_serial(traj, o);
    REQUIRE(frozen.size() == free_run.size());
    for (std::size_t k = 0; k < frozen.size(); ++k) {
        CHECK(frozen[k].grouping.members == free_run[k].grouping.members);
        CHECK(*frozen[k].indices.cf_sf == *free_run[k].indices.cf_sf);
    }
}

TEST_CASE("a single machine forms one singleton group") {
    const auto traj = periodic(1, 3.0);
    const auto res = analyze_windows(traj, {});
    REQUIRE_FALSE(res.empty());
    CHECK(res.back().grouping.groups == std::vector<std::vector<std::string>>{{"M1"}});
    CHECK(res.back().indices.group_matrix.singleton == std::vector<bool>{true});
}

}
