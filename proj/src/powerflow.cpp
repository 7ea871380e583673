#include "cohlab/powerflow.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace cohlab {

namespace {

using Eigen::Index;

Eigen::VectorXcd injections(const Eigen::MatrixXcd& y, const Eigen::VectorXcd& v) {
    return v.cwiseProduct((y * v).conjugate());
}

}  // namespace

PowerFlowSolution solve_power_flow(const NetworkCase& net, const PowerFlowOptions& opts) {
    if (!(opts.tol > 0.0)) throw InputError("power flow tolerance must be positive");
    const auto report = validate_case(net);
    if (!report.ok()) throw InputError("power flow on invalid case: " + report.violations.front());

    const Index n = static_cast<Index>(net.buses.size());
    const Eigen::MatrixXcd y = build_ybus(net).entries;

    Eigen::VectorXd p_sched(n), q_sched(n);
    Eigen::VectorXd vm(n), va = Eigen::VectorXd::Zero(n);
    std::vector<Index> pvpq, pq;
    for (Index i = 0; i < n; ++i) {
        const auto& b = net.buses[static_cast<std::size_t>(i)];
        p_sched(i) = -b.p_load;
        q_sched(i) = -b.q_load;
        vm(i) = b.kind == BusKind::pq ? 1.0 : b.v_set;
        if (b.kind != BusKind::slack) pvpq.push_back(i);
        if (b.kind == BusKind::pq) pq.push_back(i);
    }
    for (const auto& g : net.generators) {
        p_sched(static_cast<Index>(*net.bus_position(g.bus))) += g.p_set;
    }

    const Index npvpq = static_cast<Index>(pvpq.size());
    const Index npq = static_cast<Index>(pq.size());
    const Index dim = npvpq + npq;

    Eigen::VectorXcd v(n);
    Eigen::VectorXd mismatch(dim);
    double max_mis = 0.0;

    for (int it = 1;; ++it) {
        for (Index i = 0; i < n; ++i) v(i) = std::polar(vm(i), va(i));
        const Eigen::VectorXcd s = injections(y, v);
        for (Index k = 0; k < npvpq; ++k) mismatch(k) = p_sched(pvpq[k]) - s(pvpq[k]).real();
        for (Index k = 0; k < npq; ++k) mismatch(npvpq + k) = q_sched(pq[k]) - s(pq[k]).imag();
        max_mis = dim > 0 ? mismatch.cwiseAbs().maxCoeff() : 0.0;
        if (!std::isfinite(max_mis)) throw NumericalError("power flow produced non-finite mismatch");

        if (max_mis < opts.tol) {
            PowerFlowSolution sol;
            sol.iterations = it;
            sol.max_mismatch = max_mis;
            sol.v_mag.assign(vm.data(), vm.data() + n);
            sol.v_ang.assign(va.data(), va.data() + n);
            sol.p_inj.resize(static_cast<std::size_t>(n));
            sol.q_inj.resize(static_cast<std::size_t>(n));
            for (Index i = 0; i < n; ++i) {
                sol.p_inj[static_cast<std::size_t>(i)] = s(i).real();
                sol.q_inj[static_cast<std::size_t>(i)] = s(i).imag();
            }
            return sol;
        }
        if (it > opts.max_iter) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "power flow did not converge in %d iterations (final mismatch %.3e pu)",
                          opts.max_iter, max_mis);
            throw PowerFlowDivergence(buf, max_mis);
        }

        // dS/dVa = j diag(V) conj(diag(I) - Y diag(V)); dS/dVm = diag(V) conj(Y diag(V/|V|)) + conj(diag(I)) diag(V/|V|)
        const Eigen::VectorXcd ibus = y * v;
        const Eigen::VectorXcd vnorm = v.cwiseQuotient(vm.cast<Complex>());
        Eigen::MatrixXcd ds_dva = -(y * v.asDiagonal());
        ds_dva.diagonal() += ibus;
        ds_dva = (Complex(0.0, 1.0) * (v.asDiagonal() * ds_dva.conjugate())).eval();
        Eigen::MatrixXcd ds_dvm = v.asDiagonal() * (y * vnorm.asDiagonal()).conjugate();
        ds_dvm.diagonal() += ibus.conjugate().cwiseProduct(vnorm);

        Eigen::MatrixXd jac(dim, dim);
        for (Index r = 0; r < npvpq; ++r) {
            for (Index c = 0; c < npvpq; ++c) jac(r, c) = ds_dva(pvpq[r], pvpq[c]).real();
            for (Index c = 0; c < npq; ++c) jac(r, npvpq + c) = ds_dvm(pvpq[r], pq[c]).real();
        }
        for (Index r = 0; r < npq; ++r) {
            for (Index c = 0; c < npvpq; ++c) jac(npvpq + r, c) = ds_dva(pq[r], pvpq[c]).imag();
            for (Index c = 0; c < npq; ++c) jac(npvpq + r, npvpq + c) = ds_dvm(pq[r], pq[c]).imag();
        }

        Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
        if (!lu.isInvertible()) throw NumericalError("singular Jacobian (islanded load without a source?)");
        const Eigen::VectorXd dx = lu.solve(mismatch);
        for (Index k = 0; k < npvpq; ++k) va(pvpq[k]) += dx(k);
        for (Index k = 0; k < npq; ++k) vm(pq[k]) += dx(npvpq + k);
    }
}

std::vector<InternalEmf> internal_emf(const NetworkCase& net, const PowerFlowSolution& sol) {
    std::vector<InternalEmf> out;
    out.reserve(net.generators.size());
    for (const auto& g : net.generators) {
        const std::size_t pos = *net.bus_position(g.bus);
        const auto& bus = net.buses[pos];

        double p_total = 0.0;
        int count = 0;
        for (const auto& other : net.generators) {
            if (other.bus != g.bus) continue;
            p_total += other.p_set;
            ++count;
        }
        const double p_share = p_total != 0.0 ? g.p_set / p_total : 1.0 / count;

        const Complex s_bus(sol.p_inj[pos] + bus.p_load, sol.q_inj[pos] + bus.q_load);
        const Complex s_gen(s_bus.real() * p_share, s_bus.imag() / count);
        const Complex vt = sol.voltage(pos);
        const Complex it = std::conj(s_gen / vt);
        const Complex e = vt + Complex(0.0, g.xdp) * it;
        out.push_back({g.id, std::abs(e), std::arg(e)});
    }
    return out;
}

void write_power_flow_csv(const NetworkCase& net, const PowerFlowSolution& sol, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << "bus,v_mag_pu,v_ang_deg,p_inj_pu,q_inj_pu\n";
    char line[256];
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
        std::snprintf(line, sizeof line, "%d,%.10f,%.8f,%.10f,%.10f\n", net.buses[i].id, sol.v_mag[i],
                      sol.v_ang[i] * 180.0 / std::numbers::pi, sol.p_inj[i], sol.q_inj[i]);
        out << line;
    }
}

}  // namespace cohlab
