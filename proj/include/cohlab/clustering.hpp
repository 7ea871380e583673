#pragma once

#include "cohlab/coherency.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace cohlab {

/// Number of unordered generator pairs, n(n-1)/2.
constexpr std::size_t n_pairs(std::size_t n_g) { return n_g * (n_g - 1) / 2; }

struct DistanceMatrix {
    Eigen::MatrixXd values;
    bool zero_range = false;  // ks with identical off-diagonals; distances fell back to 0.5

    std::size_t order() const { return static_cast<std::size_t>(values.rows()); }
};

/// cc: d = 1 - CC. ks: off-diagonals min-max normalized to s in [0,1], d = 1 - s.
DistanceMatrix to_distance(const SimilarityMatrix& sim);

enum class Linkage { single, complete, average };
const char* to_string(Linkage linkage);
Linkage parse_linkage(const std::string& s);

/// Leaves are clusters 0..n-1; the k-th merge creates cluster n+k.
struct Merge {
    std::size_t a = 0;  // smaller label
    std::size_t b = 0;
    double height = 0.0;
    std::size_t size = 0;  // leaves under the new cluster
};

struct Dendrogram {
    std::vector<Merge> merges;
    std::vector<std::string> leaf_labels;

    std::size_t order() const { return leaf_labels.size(); }
};

/// Agglomerative clustering with Lance-Williams updates. Ties on the minimum
/// distance go to the lexicographically smallest (min label, max label) pair.
Dendrogram agglomerate(const DistanceMatrix& d, Linkage linkage, std::vector<std::string> labels = {});

struct FixedK {
    std::size_t k = 1;
};
struct HeightCut {
    double h = 0.0;
};
struct LargestGap {};
using CutCriterion = std::variant<FixedK, HeightCut, LargestGap>;

/// Parses `largest_gap`, `fixed_k:<k>` or `height:<h>`.
CutCriterion parse_cut(const std::string& s);
std::string to_string(const CutCriterion& c);

struct CoherencyGrouping {
    std::vector<std::vector<std::size_t>> members;  // machine indices, each sorted; groups ordered by first member
    std::vector<std::vector<std::string>> groups;   // same partition as labels
    Metric source_metric = Metric::cc;
    double cut_height = 0.0;

    std::size_t group_count() const { return members.size(); }
};

/// Partition from the first `merge_count` merges.
CoherencyGrouping grouping_after(const Dendrogram& dend, std::size_t merge_count, Metric metric, double cut_height);

/// fixed_k stops after n-k merges; height keeps merges at or below h; largest_gap
/// cuts after the largest jump between consecutive merge heights, or keeps one group when
/// the dendrogram is flat (top height <= 1e-12 or no positive jump).
CoherencyGrouping cut(const Dendrogram& dend, const CutCriterion& criterion, Metric metric = Metric::cc);

/// Builds a grouping from explicit label groups (frozen groupings).
CoherencyGrouping grouping_from_labels(const std::vector<std::vector<std::string>>& groups,
                                       const std::vector<std::string>& machine_labels, Metric metric,
                                       double cut_height = 0.0);

}  // namespace cohlab
