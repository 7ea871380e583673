#pragma once

#include "cohlab/clustering.hpp"
#include "cohlab/coherency.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace cohlab {

/// Group-level aggregate of a similarity matrix (KsGM when the source is Ks).
struct GroupMatrix {
    Eigen::MatrixXd values;
    CoherencyGrouping grouping;
    double t_ref = 0.0;
    std::vector<bool> singleton;  // diagonal has no intra-group pair and was set to 0

    std::size_t order() const { return static_cast<std::size_t>(values.rows()); }
};

/// Diagonal p: mean over unordered intra-group pairs; off-diagonal (p,q): mean over cross pairs.
GroupMatrix group_matrix(const SimilarityMatrix& sim, const CoherencyGrouping& grouping);

struct ConnectivityFactor {
    Eigen::VectorXd per_group;  // CF_i = a_ii
    double aggregate = 0.0;     // mean of the diagonal
};

ConnectivityFactor cf(const GroupMatrix& gm);

/// Mean of the strict upper-triangle entries; nullopt for a single group.
std::optional<double> sf(const GroupMatrix& gm);

/// Sum over i<j of (a_ii + a_ij) / (2 a_ij), the printed alternate form of SF.
/// nullopt for a single group; +inf when some a_ij is 0.
std::optional<double> sf_literal(const GroupMatrix& gm);

/// sum a_ii / sum_{i<j} a_ij; nullopt for a single group, +inf when the
/// off-diagonal sum is zero (total separation).
std::optional<double> cf_sf(const GroupMatrix& gm);

/// Ascending eigenvalues of L = D - W, W = gm with zeroed diagonal.
std::vector<double> laplacian_eigs(const GroupMatrix& gm);

struct IndexSample {
    double time = 0.0;
    GroupMatrix group_matrix;
    ConnectivityFactor cf;
    std::optional<double> sf;
    std::optional<double> sf_literal;
    std::optional<double> cf_sf;
};

struct IndexSeries {
    std::vector<IndexSample> samples;

    std::vector<double> times() const;
    std::vector<double> cf_aggregate() const;
    /// cf_sf per sample, NaN where undefined.
    std::vector<double> cf_sf_values() const;
};

IndexSample index_sample(const SimilarityMatrix& sim, const CoherencyGrouping& grouping);

/// One sample per (similarity, grouping) pair, in order.
IndexSeries index_series(const std::vector<SimilarityMatrix>& sims, const std::vector<CoherencyGrouping>& groupings);

}  // namespace cohlab
