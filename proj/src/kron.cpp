#include "cohlab/transient_sim.hpp"

#include <algorithm>

namespace cohlab {

AdmittanceMatrix kron_reduce(const AdmittanceMatrix& y_full, std::span<const std::size_t> keep) {
    const std::size_t n = y_full.order();
    std::vector<bool> kept(n, false);
    for (auto k : keep) {
        if (k >= n) throw InputError("kron_reduce: keep index out of range");
        if (kept[k]) throw InputError("kron_reduce: duplicate keep index");
        kept[k] = true;
    }
    std::vector<std::size_t> elim;
    for (std::size_t i = 0; i < n; ++i) {
        if (!kept[i]) elim.push_back(i);
    }

    const auto ne = static_cast<Eigen::Index>(elim.size());
    auto pick = [&](std::span<const std::size_t> rows, std::span<const std::size_t> cols) {
        Eigen::MatrixXcd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t c = 0; c < cols.size(); ++c) {
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    y_full.entries(static_cast<Eigen::Index>(rows[r]), static_cast<Eigen::Index>(cols[c]));
            }
        }
        return m;
    };

    AdmittanceMatrix out;
    out.entries = pick(keep, keep);
    for (auto k : keep) out.node_labels.push_back(y_full.node_labels.at(k));
    if (ne == 0) return out;

    const Eigen::MatrixXcd y_ee = pick(elim, elim);
    const Eigen::MatrixXcd y_ek = pick(elim, keep);
    const Eigen::MatrixXcd y_ke = pick(keep, elim);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(y_ee);
    if (!lu.isInvertible()) {
        throw NumericalError("kron_reduce: eliminated block is singular (isolated node?)");
    }
    out.entries.noalias() -= y_ke * lu.solve(y_ek);
    return out;
}

ReducedNetwork build_reduced(const NetworkCase& net, const PowerFlowSolution& sol, const std::vector<InternalEmf>& emfs,
                             const TopologyState& topology) {
    if (emfs.size() != net.generators.size()) throw InputError("build_reduced: one EMF per generator required");
    const AdmittanceMatrix ybus = build_ybus(net, topology);
    const auto nb = static_cast<Eigen::Index>(net.buses.size());
    const auto m = static_cast<Eigen::Index>(net.generators.size());

    AdmittanceMatrix aug;
    aug.entries = Eigen::MatrixXcd::Zero(nb + m, nb + m);
    aug.entries.topLeftCorner(nb, nb) = ybus.entries;
    aug.node_labels = ybus.node_labels;

    for (Eigen::Index i = 0; i < nb; ++i) {
        const auto& b = net.buses[static_cast<std::size_t>(i)];
        const double vm = sol.v_mag[static_cast<std::size_t>(i)];
        aug.entries(i, i) += Complex(b.p_load, -b.q_load) / (vm * vm);
    }

    std::vector<std::size_t> keep;
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto& g = net.generators[static_cast<std::size_t>(k)];
        const Eigen::Index node = nb + k;
        const Eigen::Index bus = static_cast<Eigen::Index>(*net.bus_position(g.bus));
        const Complex y = 1.0 / Complex(0.0, g.xdp);
        aug.entries(node, node) += y;
        aug.entries(bus, bus) += y;
        aug.entries(node, bus) -= y;
        aug.entries(bus, node) -= y;
        aug.node_labels.push_back(g.id);
        keep.push_back(static_cast<std::size_t>(node));
    }

    ReducedNetwork red;
    red.y_red = kron_reduce(aug, keep).entries;
    for (const auto& e : emfs) {
        red.e_mag.push_back(e.e_mag);
        red.machine_labels.push_back(e.machine);
    }
    return red;
}

std::vector<double> electrical_power(const ReducedNetwork& red, std::span<const double> delta) {
    const std::size_t n = red.order();
    if (delta.size() != n) throw InputError("electrical_power: angle vector length differs from machine count");
    std::vector<double> p(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const Complex y = red.y_red(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            const double dij = delta[i] - delta[j];
            p[i] += red.e_mag[i] * red.e_mag[j] * (y.real() * std::cos(dij) + y.imag() * std::sin(dij));
        }
    }
    return p;
}

}  // namespace cohlab
