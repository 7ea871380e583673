#pragma once

// Fixtures and independent reference implementations shared by the unit and
// acceptance tests. Nothing here calls into the library's algorithms.

#include "cohlab/clustering.hpp"
#include "cohlab/grid_model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace testsupport {

inline std::filesystem::path data_dir() { return COHLAB_DATA_DIR; }
inline std::filesystem::path fixture_dir() { return COHLAB_FIXTURE_DIR; }

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("cohlab_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Two machines joined by one lossless line; bus 2 is the slack.
inline cohlab::NetworkCase two_machine_case(double p1 = 0.5, double x_line = 0.2, double h1 = 5.0, double h2 = 5.0,
                                            double xd1 = 0.1, double xd2 = 0.1) {
    cohlab::NetworkCase net;
    net.buses = {{1, cohlab::BusKind::pv, 1.0, 0, 0, 0, 0}, {2, cohlab::BusKind::slack, 1.0, 0, 0, 0, 0}};
    net.branches = {{1, 2, 0.0, x_line, 0.0, 1.0, true}};
    net.generators = {{"G1", 1, p1, 1.0, h1, xd1, 0.0}, {"G2", 2, 0.0, 1.0, h2, xd2, 0.0}};
    return net;
}

// Lossless triangle of three machines, no loads or shunts, no damping.
inline cohlab::NetworkCase lossless_triangle() {
    cohlab::NetworkCase net;
    net.buses = {{1, cohlab::BusKind::slack, 1.0, 0, 0, 0, 0},
                 {2, cohlab::BusKind::pv, 1.0, 0, 0, 0, 0},
                 {3, cohlab::BusKind::pv, 1.0, 0, 0, 0, 0}};
    net.branches = {{1, 2, 0.0, 0.1, 0.0, 1.0, true}, {2, 3, 0.0, 0.15, 0.0, 1.0, true},
                    {1, 3, 0.0, 0.12, 0.0, 1.0, true}};
    net.generators = {{"A", 1, 0.0, 1.0, 6.0, 0.08, 0.0}, {"B", 2, 0.9, 1.0, 4.0, 0.1, 0.0},
                      {"C", 3, -0.4, 1.0, 3.0, 0.12, 0.0}};
    return net;
}

// ---- clustering oracle: recompute every inter-cluster distance from the leaves each step ----

struct NaiveMerge {
    std::size_t a, b;
    double height;
    std::size_t size;
};

inline std::vector<NaiveMerge> naive_agglomerate(const Eigen::MatrixXd& d, cohlab::Linkage linkage) {
    const std::size_t n = static_cast<std::size_t>(d.rows());
    struct Cluster {
        std::size_t label;
        std::vector<std::size_t> leaves;
    };
    std::vector<Cluster> live;
    for (std::size_t i = 0; i < n; ++i) live.push_back({i, {i}});

    auto between = [&](const Cluster& x, const Cluster& y) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
        for (auto i : x.leaves) {
            for (auto j : y.leaves) {
                const double v = d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                sum += v;
            }
        }
        switch (linkage) {
            case cohlab::Linkage::single: return lo;
            case cohlab::Linkage::complete: return hi;
            default: return sum / static_cast<double>(x.leaves.size() * y.leaves.size());
        }
    };

    std::vector<NaiveMerge> out;
    for (std::size_t step = 0; live.size() > 1; ++step) {
        std::size_t bx = 0, by = 1;
        double best = std::numeric_limits<double>::infinity();
        std::pair<std::size_t, std::size_t> key{std::numeric_limits<std::size_t>::max(), 0};
        for (std::size_t x = 0; x < live.size(); ++x) {
            for (std::size_t y = x + 1; y < live.size(); ++y) {
                const double v = between(live[x], live[y]);
                const std::pair<std::size_t, std::size_t> k{std::min(live[x].label, live[y].label),
                                                             std::max(live[x].label, live[y].label)};
                if (v < best || (v == best && k < key)) {
                    best = v;
                    key = k;
                    bx = x;
                    by = y;
                }
            }
        }
        Cluster merged{n + step, live[bx].leaves};
        merged.leaves.insert(merged.leaves.end(), live[by].leaves.begin(), live[by].leaves.end());
        out.push_back({key.first, key.second, best, merged.leaves.size()});
        live.erase(live.begin() + static_cast<long>(by));
        live.erase(live.begin() + static_cast<long>(bx));
        live.push_back(std::move(merged));
    }
    return out;
}

inline Eigen::MatrixXd random_distance(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 2.0);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < d.cols(); ++j) d(i, j) = d(j, i) = u(rng);
    }
    return d;
}

// Connected components of the graph {(i, j) : d_ij <= h}, as sorted member lists ordered by first member.
inline std::vector<std::vector<std::size_t>> threshold_components(const Eigen::MatrixXd& d, double h) {
    const std::size_t n = static_cast<std::size_t>(d.rows());
    std::vector<int> comp(n, -1);
    int next = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<std::size_t> stack{s};
        comp[s] = next;
        while (!stack.empty()) {
            const auto u = stack.back();
            stack.pop_back();
            for (std::size_t v = 0; v < n; ++v) {
                if (comp[v] < 0 && d(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) <= h) {
                    comp[v] = next;
                    stack.push_back(v);
                }
            }
        }
        ++next;
    }
    std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(next));
    for (std::size_t i = 0; i < n; ++i) groups[static_cast<std::size_t>(comp[i])].push_back(i);
    return groups;
}

// Textbook correlation in long double, straight from the sums.
inline long double literal_cc(const std::vector<double>& x, const std::vector<double>& y) {
    const long double n = static_cast<long double>(x.size());
    long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sx += x[k];
        sy += y[k];
        sxx += static_cast<long double>(x[k]) * x[k];
        syy += static_cast<long double>(y[k]) * y[k];
        sxy += static_cast<long double>(x[k]) * y[k];
    }
    return (n * sxy - sx * sy) / (std::sqrt(n * sxx - sx * sx) * std::sqrt(n * syy - sy * sy));
}

// Gauss-Seidel load flow for the two-bus PV/slack system above; returns the PV bus angle.
inline double gauss_seidel_two_bus_angle(double p1, double x_line) {
    const std::complex<double> y(0.0, -1.0 / x_line);  // series admittance
    std::complex<double> v1(1.0, 0.0);
    const std::complex<double> v2(1.0, 0.0);
    for (int it = 0; it < 10000; ++it) {
        const double q1 = -std::imag(std::conj(v1) * (y * v1 - y * v2));
        std::complex<double> next = ((p1 - std::complex<double>(0, 1) * q1) / std::conj(v1) + y * v2) / y;
        next = std::polar(1.0, std::arg(next));  // hold the PV magnitude
        if (std::abs(next - v1) < 1e-15) {
            v1 = next;
            break;
        }
        v1 = next;
    }
    return std::arg(v1);
}

inline std::string group_string(const std::vector<std::vector<std::string>>& groups) {
    std::string s;
    for (const auto& g : groups) {
        s += '{';
        for (std::size_t i = 0; i < g.size(); ++i) s += (i ? "," : "") + g[i];
        s += '}';
    }
    return s;
}

}  // namespace testsupport
