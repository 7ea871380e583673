#include "support.hpp"

#include "cohlab/powerflow.hpp"

#include <doctest.h>

#include <map>

using namespace cohlab;

namespace {

struct RefBus {
    double vm, va_deg;
};

std::map<int, RefBus> reference_solution() {
    std::map<int, RefBus> ref;
    std::ifstream in(testsupport::fixture_dir() / "ieee39_reference_pf.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        int bus = 0;
        double vm = 0, va = 0;
        std::sscanf(line.c_str(), "%d,%lf,%lf", &bus, &vm, &va);
        ref[bus] = {vm, va};
    }
    return ref;
}

}  // namespace

TEST_SUITE("powerflow") {

TEST_CASE("two-bus case agrees with Gauss-Seidel and the closed form") {
    const auto net = testsupport::two_machine_case(0.5, 0.2);
    const auto sol = solve_power_flow(net, {1e-12, 30});
    const double gs = testsupport::gauss_seidel_two_bus_angle(0.5, 0.2);
    CHECK(sol.v_ang[0] == doctest::Approx(gs).epsilon(1e-10));
    CHECK(sol.v_ang[0] == doctest::Approx(std::asin(0.5 * 0.2)).epsilon(1e-10));
    CHECK(sol.v_mag[0] == doctest::Approx(1.0));
    CHECK(sol.p_inj[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sol.p_inj[1] == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(sol.max_mismatch < 1e-12);
}

TEST_CASE("a flat network converges on the first mismatch evaluation") {
    auto net = testsupport::two_machine_case(0.0, 0.2);
    const auto sol = solve_power_flow(net);
    CHECK(sol.iterations == 1);
    CHECK(sol.v_ang[0] == 0.0);
}

TEST_CASE("39-bus case matches the reference solver") {
    const auto net = load_case(testsupport::data_dir() / "ieee39.case");
    const auto sol = solve_power_flow(net, {1e-8, 30});
    CHECK(sol.iterations < 10);
    const auto ref = reference_solution();
    REQUIRE(ref.size() == 39);
    double worst = 0.0;
    for (std::size_t k = 0; k < net.buses.size(); ++k) {
        const auto& r = ref.at(net.buses[k].id);
        const Complex vref = std::polar(r.vm, r.va_deg * std::numbers::pi / 180.0);
        worst = std::max(worst, std::abs(sol.voltage(k) - vref));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("an infeasible load reports divergence with the last mismatch") {
    auto net = testsupport::two_machine_case(0.0, 0.2);
    net.buses.push_back({3, BusKind::pq, 1.0, 40.0, 10.0, 0.0, 0.0});
    net.branches.push_back({2, 3, 0.0, 0.5, 0.0, 1.0, true});
    try {
        solve_power_flow(net, {1e-8, 15});
        FAIL("expected divergence");
    } catch (const PowerFlowDivergence& e) {
        CHECK(e.final_mismatch() > 1e-8);
    }
}

TEST_CASE("internal EMF sits behind the transient reactance") {
    const auto net = testsupport::two_machine_case(0.5, 0.2, 5.0, 5.0, 0.1, 0.3);
    const auto sol = solve_power_flow(net);
    const auto emf = internal_emf(net, sol);
    REQUIRE(emf.size() == 2);

    const Complex v1 = sol.voltage(0), v2 = sol.voltage(1);
    const Complex i12 = (v1 - v2) / Complex(0.0, 0.2);  // current injected at bus 1
    const Complex e1 = v1 + Complex(0.0, 0.1) * i12;
    const Complex e2 = v2 + Complex(0.0, 0.3) * (-i12);
    CHECK(emf[0].e_mag == doctest::Approx(std::abs(e1)).epsilon(1e-12));
    CHECK(emf[0].delta0 == doctest::Approx(std::arg(e1)).epsilon(1e-12));
    CHECK(emf[1].e_mag == doctest::Approx(std::abs(e2)).epsilon(1e-12));
    CHECK(emf[1].delta0 == doctest::Approx(std::arg(e2)).epsilon(1e-12));
}

TEST_CASE("power-flow CSV export") {
    const auto net = testsupport::two_machine_case();
    const auto dir = testsupport::scratch_dir("pfcsv");
    write_power_flow_csv(net, solve_power_flow(net), dir / "pf.csv");
    const auto text = testsupport::slurp(dir / "pf.csv");
    CHECK(text.rfind("bus,v_mag_pu,v_ang_deg,p_inj_pu,q_inj_pu\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

}
