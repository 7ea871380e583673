#include "cohlab/indices.hpp"

#include <cmath>
#include <limits>

namespace cohlab {

GroupMatrix group_matrix(const SimilarityMatrix& sim, const CoherencyGrouping& grouping) {
    std::size_t covered = 0;
    for (const auto& g : grouping.members) {
        for (auto i : g) {
            if (i >= sim.order()) throw InputError("group_matrix: grouping names a machine outside the matrix");
        }
        covered += g.size();
    }
    if (covered != sim.order()) throw InputError("group_matrix: grouping does not cover the similarity matrix");

    const auto n = static_cast<Eigen::Index>(grouping.group_count());
    GroupMatrix gm;
    gm.grouping = grouping;
    gm.t_ref = sim.t_ref;
    gm.values = Eigen::MatrixXd::Zero(n, n);
    gm.singleton.assign(static_cast<std::size_t>(n), false);

    auto at = [&](std::size_t i, std::size_t j) {
        return sim.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    };
    for (Eigen::Index p = 0; p < n; ++p) {
        const auto& gp = grouping.members[static_cast<std::size_t>(p)];
        if (gp.size() < 2) {
            gm.singleton[static_cast<std::size_t>(p)] = true;
        } else {
            double sum = 0.0;
            for (std::size_t a = 0; a < gp.size(); ++a) {
                for (std::size_t b = a + 1; b < gp.size(); ++b) sum += at(gp[a], gp[b]);
            }
            gm.values(p, p) = sum / static_cast<double>(n_pairs(gp.size()));
        }
        for (Eigen::Index q = p + 1; q < n; ++q) {
            const auto& gq = grouping.members[static_cast<std::size_t>(q)];
            double sum = 0.0;
            for (auto i : gp) {
                for (auto j : gq) sum += at(i, j);
            }
            const double mean = sum / static_cast<double>(gp.size() * gq.size());
            gm.values(p, q) = mean;
            gm.values(q, p) = mean;
        }
    }
    return gm;
}

ConnectivityFactor cf(const GroupMatrix& gm) {
    if (gm.order() == 0) throw InputError("cf: empty group matrix");
    return {gm.values.diagonal(), gm.values.diagonal().mean()};
}

namespace {

double upper_sum(const Eigen::MatrixXd& a) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < a.cols(); ++j) s += a(i, j);
    }
    return s;
}

}  // namespace

std::optional<double> sf(const GroupMatrix& gm) {
    const std::size_t n = gm.order();
    if (n < 2) return std::nullopt;
    return upper_sum(gm.values) / static_cast<double>(n_pairs(n));
}

std::optional<double> sf_literal(const GroupMatrix& gm) {
    const auto n = static_cast<Eigen::Index>(gm.order());
    if (n < 2) return std::nullopt;
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double aij = gm.values(i, j);
            if (aij == 0.0) return std::numeric_limits<double>::infinity();
            s += (gm.values(i, i) + aij) / (2.0 * aij);
        }
    }
    return s;
}

std::optional<double> cf_sf(const GroupMatrix& gm) {
    if (gm.order() < 2) return std::nullopt;
    const double off = upper_sum(gm.values);
    if (off == 0.0) return std::numeric_limits<double>::infinity();
    return gm.values.trace() / off;
}

std::vector<double> laplacian_eigs(const GroupMatrix& gm) {
    if (gm.order() == 0) throw InputError("laplacian_eigs: empty group matrix");
    Eigen::MatrixXd w = gm.values;
    w.diagonal().setZero();
    Eigen::MatrixXd lap = -w;
    lap.diagonal() = w.rowwise().sum();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

std::vector<double> IndexSeries::times() const {
    std::vector<double> out;
    for (const auto& s : samples) out.push_back(s.time);
    return out;
}

std::vector<double> IndexSeries::cf_aggregate() const {
    std::vector<double> out;
    for (const auto& s : samples) out.push_back(s.cf.aggregate);
    return out;
}

std::vector<double> IndexSeries::cf_sf_values() const {
    std::vector<double> out;
    for (const auto& s : samples) out.push_back(s.cf_sf.value_or(std::numeric_limits<double>::quiet_NaN()));
    return out;
}

IndexSample index_sample(const SimilarityMatrix& sim, const CoherencyGrouping& grouping) {
    IndexSample s;
    s.time = sim.t_ref;
    s.group_matrix = group_matrix(sim, grouping);
    s.cf = cf(s.group_matrix);
    s.sf = sf(s.group_matrix);
    s.sf_literal = sf_literal(s.group_matrix);
    s.cf_sf = cf_sf(s.group_matrix);
    return s;
}

IndexSeries index_series(const std::vector<SimilarityMatrix>& sims, const std::vector<CoherencyGrouping>& groupings) {
    if (sims.size() != groupings.size()) throw InputError("index_series: one grouping per similarity matrix required");
    IndexSeries out;
    out.samples.reserve(sims.size());
    for (std::size_t k = 0; k < sims.size(); ++k) out.samples.push_back(index_sample(sims[k], groupings[k]));
    return out;
}

}  // namespace cohlab
