#include "support.hpp"

#include "cohlab/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <sstream>

using namespace cohlab;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> v;
    std::stringstream ss(text);
    for (std::string l; std::getline(ss, l);) v.push_back(l);
    return v;
}

std::string data(const char* name) { return (testsupport::data_dir() / name).string(); }

void write_identical_trajectory(const fs::path& path, std::size_t machines) {
    std::ofstream f(path);
    f << "time_s";
    for (std::size_t i = 0; i < machines; ++i) f << ",G" << i + 1;
    f << '\n';
    for (int s = 0; s <= 400; ++s) {
        const double t = 0.01 * s;
        f << t;
        for (std::size_t i = 0; i < machines; ++i) f << ',' << std::sin(3.0 * t);
        f << '\n';
    }
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and usage errors") {
    CHECK(cli({"--help"}).code == kExitOk);
    CHECK(cli({"simulate", "--help"}).code == kExitOk);
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"frobnicate"}).code == kExitUsage);
    CHECK(cli({"simulate", "--no-such-flag"}).code == kExitUsage);

    const auto dir = testsupport::scratch_dir("cli_usage");
    const auto zero = cli({"simulate", "--t-stop", "0", "--out", dir.string()});
    CHECK(zero.code == kExitUsage);
    CHECK(zero.err.find("--t-stop") != std::string::npos);
    CHECK(cli({"simulate", "--dt", "0.001", "--sample-dt", "0.0015", "--out", dir.string()}).code == kExitUsage);
    CHECK(cli({"analyze", "--metric", "fft", "--trajectory", "x.csv", "--out", dir.string()}).code == kExitUsage);
    CHECK(cli({"analyze", "--cut", "fixed_k:-1", "--trajectory", "x.csv", "--out", dir.string()}).code == kExitUsage);
    CHECK(cli({"analyze", "--out", dir.string()}).code == kExitUsage);  // no trajectory
}

TEST_CASE("input errors") {
    const auto dir = testsupport::scratch_dir("cli_input");
    const auto missing = cli({"simulate", "--events", (dir / "nope.events").string(), "--out", dir.string()});
    CHECK(missing.code == kExitInput);
    CHECK(missing.err.find("nope.events") != std::string::npos);
    CHECK(cli({"simulate", "--case", (dir / "nope.case").string(), "--out", dir.string()}).code == kExitInput);

    write_identical_trajectory(dir / "t.csv", 3);
    const auto ks = cli({"analyze", "--trajectory", (dir / "t.csv").string(), "--metric", "ks", "--out", (dir / "o").string()});
    CHECK(ks.code == kExitInput);
    CHECK(ks.err.find("epochs") != std::string::npos);
}

TEST_CASE("numerical failures exit with code 3") {
    const auto dir = testsupport::scratch_dir("cli_numeric");
    auto net = testsupport::two_machine_case(0.0, 0.2);
    net.buses.push_back({3, BusKind::pq, 1.0, 40.0, 10.0, 0.0, 0.0});
    net.branches.push_back({2, 3, 0.0, 0.5, 0.0, 1.0, true});
    save_case(net, dir / "heavy.case");
    const auto r = cli({"simulate", "--case", (dir / "heavy.case").string(), "--t-stop", "1", "--out", (dir / "o").string()});
    CHECK(r.code == kExitNumerical);
}

TEST_CASE("simulate writes its artifacts and never overwrites without --force") {
    const auto dir = testsupport::scratch_dir("cli_sim");
    const std::vector<std::string> args{"simulate", "--case", data("ieee39.case"), "--events", data("scenario1.events"),
                                        "--t-stop", "3", "--dump-pf", "--out", dir.string()};
    const auto first = cli(args);
    REQUIRE(first.code == kExitOk);
    for (const char* f : {"trajectory.csv", "epochs.json", "loss_of_sync.csv", "powerflow.csv"}) CHECK(fs::exists(dir / f));
    CHECK(lines(testsupport::slurp(dir / "trajectory.csv")).size() == 302);
    CHECK(lines(testsupport::slurp(dir / "loss_of_sync.csv")) == std::vector<std::string>{"time_s,machine_a,machine_b"});

    const auto before = testsupport::slurp(dir / "trajectory.csv");
    std::ofstream(dir / "trajectory.csv") << "sentinel";
    const auto again = cli(args);
    CHECK(again.code == kExitUsage);
    CHECK(again.err.find("--force") != std::string::npos);
    CHECK(testsupport::slurp(dir / "trajectory.csv") == "sentinel");

    auto forced = args;
    forced.push_back("--force");
    CHECK(cli(forced).code == kExitOk);
    CHECK(testsupport::slurp(dir / "trajectory.csv") == before);
}

TEST_CASE("analyze and indices on hand-made trajectories") {
    const auto dir = testsupport::scratch_dir("cli_small");
    write_identical_trajectory(dir / "one.csv", 1);
    REQUIRE(cli({"analyze", "--trajectory", (dir / "one.csv").string(), "--out", (dir / "a").string()}).code == kExitOk);
    const auto g = nlohmann::json::parse(testsupport::slurp(dir / "a" / "groupings_cc.json"));
    CHECK(g.back()["groups"] == nlohmann::json::parse(R"([["G1"]])"));
    CHECK(g.back().contains("t_ref"));
    CHECK(g.back()["metric"] == "cc");
    CHECK(g.back().contains("cut_height"));

    write_identical_trajectory(dir / "same.csv", 4);
    REQUIRE(cli({"indices", "--trajectory", (dir / "same.csv").string(), "--out", (dir / "i").string(), "--sf-literal"}).code ==
            kExitOk);
    const auto rows = lines(testsupport::slurp(dir / "i" / "indices_cc.csv"));
    CHECK(rows.front() == "time_s,CF,SF,CF_SF,n_groups,CF_g1,singletons,SF_literal");
    for (std::size_t k = 1; k < rows.size(); ++k) {
        CHECK(rows[k].find(",1,nan,nan,1,") != std::string::npos);
    }
    for (const char* f : {"fig_cf_cc.csv", "fig_sf_cc.csv", "fig_cf_sf_cc.csv", "laplacian_cc.csv"}) CHECK(fs::exists(dir / "i" / f));
}

TEST_CASE("frozen and recorded groupings feed the indices") {
    const auto dir = testsupport::scratch_dir("cli_groupings");
    REQUIRE(cli({"simulate", "--events", data("scenario1.events"), "--t-stop", "6", "--out", dir.string()}).code == kExitOk);
    const std::string traj = (dir / "trajectory.csv").string(), epochs = (dir / "epochs.json").string();

    REQUIRE(cli({"analyze", "--trajectory", traj, "--epochs", epochs, "--metric", "both", "--out", (dir / "a").string()}).code ==
            kExitOk);
    REQUIRE(cli({"indices", "--trajectory", traj, "--metric", "cc", "--out", (dir / "free").string()}).code == kExitOk);
    REQUIRE(cli({"indices", "--trajectory", traj, "--metric", "cc", "--groupings", (dir / "a" / "groupings_cc.json").string(),
                 "--out", (dir / "rec").string()})
                .code == kExitOk);
    CHECK(testsupport::slurp(dir / "free" / "indices_cc.csv") == testsupport::slurp(dir / "rec" / "indices_cc.csv"));

    std::ofstream(dir / "freeze.json") << R"({"groups": [["G1","G2","G3"],["G4","G5","G6","G7"],["G8","G9","G10"]]})";
    REQUIRE(cli({"indices", "--trajectory", traj, "--epochs", epochs, "--metric", "ks", "--freeze-grouping",
                 (dir / "freeze.json").string(), "--out", (dir / "frozen").string()})
                .code == kExitOk);
    const auto rows = lines(testsupport::slurp(dir / "frozen" / "indices_ks.csv"));
    for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].find(",3,") != std::string::npos);

    std::ofstream(dir / "bad_freeze.json") << R"([["G1"],["G2"]])";
    CHECK(cli({"indices", "--trajectory", traj, "--freeze-grouping", (dir / "bad_freeze.json").string(), "--out",
               (dir / "bad").string()})
              .code == kExitInput);
}

TEST_CASE("pipeline is deterministic and reproducible from its manifest") {
    const auto dir = testsupport::scratch_dir("cli_pipeline");
    std::ofstream(dir / "run.json") << R"({"case": ")" << data("ieee39.case") << R"(", "events": ")"
                                    << data("scenario1.events") << R"(", "t_stop": 8, "metric": ["cc", "ks"]})";
    const auto a = cli({"pipeline", "--config", (dir / "run.json").string(), "--out", (dir / "a").string()});
    REQUIRE(a.code == kExitOk);
    REQUIRE(cli({"pipeline", "--config", (dir / "run.json").string(), "--out", (dir / "b").string()}).code == kExitOk);
    REQUIRE(cli({"pipeline", "--config", (dir / "a" / "manifest.json").string(), "--out", (dir / "c").string()}).code ==
            kExitOk);

    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(dir / "a")) {
        const auto name = entry.path().filename();
        if (name == "manifest.json") continue;
        CHECK_MESSAGE(testsupport::slurp(entry.path()) == testsupport::slurp(dir / "b" / name), name.string());
        CHECK_MESSAGE(testsupport::slurp(entry.path()) == testsupport::slurp(dir / "c" / name), name.string());
        ++compared;
    }
    CHECK(compared == 17);

    auto ma = nlohmann::json::parse(testsupport::slurp(dir / "a" / "manifest.json"));
    auto mb = nlohmann::json::parse(testsupport::slurp(dir / "b" / "manifest.json"));
    ma.erase("created_utc");
    mb.erase("created_utc");
    CHECK(ma == mb);
    CHECK(ma["config"]["window_length"] == 2.0);
    CHECK(ma["config"]["linkage"] == "average");
    CHECK(ma["config"]["cut"] == "largest_gap");
    CHECK(ma["config"]["case"].is_object());
    CHECK(ma["version"] == kVersion);

    // Command-line flags win over the config file.
    REQUIRE(cli({"pipeline", "--config", (dir / "run.json").string(), "--metric", "cc", "--t-stop", "4", "--out",
                 (dir / "d").string()})
                .code == kExitOk);
    CHECK_FALSE(fs::exists(dir / "d" / "indices_ks.csv"));
    CHECK(lines(testsupport::slurp(dir / "d" / "trajectory.csv")).size() == 402);
}

TEST_CASE("the data directory comes from COHERENCY_LAB_DATA") {
    const auto dir = testsupport::scratch_dir("cli_env");
    fs::create_directories(dir / "data");
    save_case(testsupport::two_machine_case(), dir / "data" / "toy.case");
    ::setenv("COHERENCY_LAB_DATA", (dir / "data").string().c_str(), 1);
    const auto r = cli({"simulate", "--case", "toy.case", "--t-stop", "1", "--out", (dir / "o").string()});
    ::unsetenv("COHERENCY_LAB_DATA");
    CHECK(r.code == kExitOk);
    CHECK(testsupport::slurp(dir / "o" / "trajectory.csv").rfind("time_s,G1,G2\n", 0) == 0);
}

}
