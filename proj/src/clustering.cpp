#include "cohlab/clustering.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>

namespace cohlab {

DistanceMatrix to_distance(const SimilarityMatrix& sim) {
    const auto n = static_cast<Eigen::Index>(sim.order());
    DistanceMatrix d;
    d.values = Eigen::MatrixXd::Zero(n, n);
    if (sim.metric == Metric::cc) {
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i != j) d.values(i, j) = 1.0 - sim.values(i, j);
            }
        }
        return d;
    }

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            lo = std::min(lo, sim.values(i, j));
            hi = std::max(hi, sim.values(i, j));
        }
    }
    const double range = hi - lo;
    if (n > 1 && !(range > 0.0)) d.zero_range = true;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            d.values(i, j) = d.zero_range ? 0.5 : 1.0 - (sim.values(i, j) - lo) / range;
        }
    }
    return d;
}

const char* to_string(Linkage linkage) {
    switch (linkage) {
        case Linkage::single: return "single";
        case Linkage::complete: return "complete";
        case Linkage::average: return "average";
    }
    return "average";
}

Linkage parse_linkage(const std::string& s) {
    if (s == "single") return Linkage::single;
    if (s == "complete") return Linkage::complete;
    if (s == "average") return Linkage::average;
    throw InputError("unknown linkage '" + s + "' (expected single, complete or average)");
}

Dendrogram agglomerate(const DistanceMatrix& d, Linkage linkage, std::vector<std::string> labels) {
    const std::size_t n = d.order();
    if (n == 0) throw InputError("agglomerate: empty distance matrix");
    if (labels.empty()) {
        for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
    }
    if (labels.size() != n) throw InputError("agglomerate: label count differs from matrix order");

    Dendrogram dend;
    dend.leaf_labels = std::move(labels);
    dend.merges.reserve(n - 1);

    // Slot s holds cluster label[s] while active; merged clusters reuse the lower slot.
    Eigen::MatrixXd dist = d.values;
    std::vector<std::size_t> label(n), size(n, 1);
    std::iota(label.begin(), label.end(), 0);
    std::vector<bool> active(n, true);

    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t bi = 0, bj = 0;
        double best = std::numeric_limits<double>::infinity();
        std::pair<std::size_t, std::size_t> best_key{std::numeric_limits<std::size_t>::max(), 0};
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!active[j]) continue;
                const double v = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                const std::pair key{std::min(label[i], label[j]), std::max(label[i], label[j])};
                if (v < best || (v == best && key < best_key)) {
                    best = v;
                    best_key = key;
                    bi = i;
                    bj = j;
                }
            }
        }

        const std::size_t merged_size = size[bi] + size[bj];
        dend.merges.push_back({best_key.first, best_key.second, best, merged_size});

        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == bi || k == bj) continue;
            const auto ki = static_cast<Eigen::Index>(k);
            const double dki = dist(ki, static_cast<Eigen::Index>(bi));
            const double dkj = dist(ki, static_cast<Eigen::Index>(bj));
            double updated = 0.0;
            switch (linkage) {
                case Linkage::single: updated = std::min(dki, dkj); break;
                case Linkage::complete: updated = std::max(dki, dkj); break;
                case Linkage::average:
                    updated = (static_cast<double>(size[bi]) * dki + static_cast<double>(size[bj]) * dkj) /
                              static_cast<double>(merged_size);
                    break;
            }
            dist(ki, static_cast<Eigen::Index>(bi)) = updated;
            dist(static_cast<Eigen::Index>(bi), ki) = updated;
        }
        label[bi] = n + step;
        size[bi] = merged_size;
        active[bj] = false;
    }
    return dend;
}

CutCriterion parse_cut(const std::string& s) {
    if (s == "largest_gap") return LargestGap{};
    const auto colon = s.find(':');
    const std::string head = s.substr(0, colon);
    if (colon != std::string::npos) {
        const std::string arg = s.substr(colon + 1);
        try {
            std::size_t used = 0;
            if (head == "fixed_k") {
                const long k = std::stol(arg, &used);
                if (used == arg.size() && k >= 1) return FixedK{static_cast<std::size_t>(k)};
            } else if (head == "height") {
                const double h = std::stod(arg, &used);
                if (used == arg.size()) return HeightCut{h};
            }
        } catch (const std::exception&) {
        }
    }
    throw InputError("unknown cut '" + s + "' (expected largest_gap, fixed_k:<k> or height:<h>)");
}

std::string to_string(const CutCriterion& c) {
    if (std::holds_alternative<FixedK>(c)) return "fixed_k:" + std::to_string(std::get<FixedK>(c).k);
    if (std::holds_alternative<HeightCut>(c)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "height:%.17g", std::get<HeightCut>(c).h);
        return buf;
    }
    return "largest_gap";
}

CoherencyGrouping grouping_after(const Dendrogram& dend, std::size_t merge_count, Metric metric, double cut_height) {
    const std::size_t n = dend.order();
    if (merge_count > dend.merges.size()) throw InputError("grouping_after: more merges requested than exist");

    std::vector<std::size_t> parent(n + dend.merges.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t k = 0; k < merge_count; ++k) {
        const auto& mg = dend.merges[k];
        parent[find(mg.a)] = n + k;
        parent[find(mg.b)] = n + k;
    }

    std::map<std::size_t, std::vector<std::size_t>> by_root;
    for (std::size_t i = 0; i < n; ++i) by_root[find(i)].push_back(i);

    CoherencyGrouping g;
    g.source_metric = metric;
    g.cut_height = cut_height;
    for (auto& [root, members] : by_root) g.members.push_back(std::move(members));
    std::sort(g.members.begin(), g.members.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    for (const auto& members : g.members) {
        std::vector<std::string> names;
        for (auto i : members) names.push_back(dend.leaf_labels[i]);
        g.groups.push_back(std::move(names));
    }
    return g;
}

CoherencyGrouping cut(const Dendrogram& dend, const CutCriterion& criterion, Metric metric) {
    const std::size_t n = dend.order();
    const std::size_t total = dend.merges.size();
    auto height = [&](std::size_t k) { return dend.merges[k].height; };
    auto midpoint_after = [&](std::size_t m) {
        if (total == 0 || m == 0) return 0.0;
        if (m == total) return height(total - 1);
        return 0.5 * (height(m - 1) + height(m));
    };

    if (const auto* fk = std::get_if<FixedK>(&criterion)) {
        if (fk->k < 1 || fk->k > n) throw InputError("fixed_k must lie in [1, machine count]");
        const std::size_t m = n - fk->k;
        return grouping_after(dend, m, metric, midpoint_after(m));
    }
    if (const auto* hc = std::get_if<HeightCut>(&criterion)) {
        std::size_t m = 0;
        while (m < total && height(m) <= hc->h) ++m;
        return grouping_after(dend, m, metric, hc->h);
    }

    if (total < 2) return grouping_after(dend, total, metric, midpoint_after(total));
    const double top = height(total - 1);
    // Distances are O(1); heights at rounding level mean the machines are indistinguishable.
    if (!(top > 1e-12)) return grouping_after(dend, total, metric, top);
    std::size_t best = 0;
    double best_jump = -1.0;
    for (std::size_t i = 0; i + 1 < total; ++i) {
        const double jump = (height(i + 1) - height(i)) / top;
        if (jump > best_jump) {
            best_jump = jump;
            best = i;
        }
    }
    if (!(best_jump > 0.0)) return grouping_after(dend, total, metric, top);  // no gap anywhere
    return grouping_after(dend, best + 1, metric, midpoint_after(best + 1));
}

CoherencyGrouping grouping_from_labels(const std::vector<std::vector<std::string>>& groups,
                                       const std::vector<std::string>& machine_labels, Metric metric,
                                       double cut_height) {
    std::vector<int> seen(machine_labels.size(), 0);
    CoherencyGrouping g;
    g.source_metric = metric;
    g.cut_height = cut_height;
    for (const auto& names : groups) {
        if (names.empty()) throw InputError("grouping contains an empty group");
        std::vector<std::size_t> members;
        for (const auto& name : names) {
            const auto it = std::find(machine_labels.begin(), machine_labels.end(), name);
            if (it == machine_labels.end()) throw InputError("grouping names unknown machine '" + name + "'");
            const auto idx = static_cast<std::size_t>(it - machine_labels.begin());
            if (seen[idx]++) throw InputError("grouping lists machine '" + name + "' twice");
            members.push_back(idx);
        }
        std::sort(members.begin(), members.end());
        g.members.push_back(std::move(members));
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (!seen[i]) throw InputError("grouping omits machine '" + machine_labels[i] + "'");
    }
    std::sort(g.members.begin(), g.members.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    for (const auto& members : g.members) {
        std::vector<std::string> names;
        for (auto i : members) names.push_back(machine_labels[i]);
        g.groups.push_back(std::move(names));
    }
    return g;
}

}  // namespace cohlab
