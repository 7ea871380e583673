#include "cohlab/grid_model.hpp"

#include "cohlab/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace cohlab {

using nlohmann::json;

std::string Branch::label() const { return std::to_string(from) + "-" + std::to_string(to); }

std::optional<std::size_t> NetworkCase::bus_position(int id) const {
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (buses[i].id == id) return i;
    }
    return std::nullopt;
}

std::size_t NetworkCase::slack_position() const {
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (buses[i].kind == BusKind::slack) return i;
    }
    throw InputError("case has no slack bus");
}

bool ValidationReport::mentions(const std::string& needle) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const std::string& v) { return v.find(needle) != std::string::npos; });
}

const char* to_string(BusKind kind) {
    switch (kind) {
        case BusKind::slack: return "slack";
        case BusKind::pv: return "pv";
        case BusKind::pq: return "pq";
    }
    return "pq";
}

namespace {

BusKind parse_kind(const std::string& s) {
    if (s == "slack") return BusKind::slack;
    if (s == "pv") return BusKind::pv;
    if (s == "pq") return BusKind::pq;
    throw InputError("parse error: unknown bus kind '" + s + "'");
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    return it == j.end() ? fallback : it->get<T>();
}

template <typename T>
T get_required(const json& j, const char* key, const char* what) {
    auto it = j.find(key);
    if (it == j.end()) throw InputError(std::string("parse error: ") + what + " missing field '" + key + "'");
    return it->get<T>();
}

}  // namespace

ValidationReport validate_case(const NetworkCase& net) {
    ValidationReport report;
    auto add = [&](std::string msg) { report.violations.push_back(std::move(msg)); };

    if (!(net.base_mva > 0.0)) add("nonpositive base_mva");
    if (!(net.freq_hz > 0.0)) add("nonpositive freq_hz");
    if (net.buses.empty()) add("empty bus list");

    std::unordered_set<int> ids;
    int n_slack = 0;
    for (const auto& b : net.buses) {
        if (!ids.insert(b.id).second) add("duplicate bus id " + std::to_string(b.id));
        if (b.kind == BusKind::slack) ++n_slack;
        if (b.kind != BusKind::pq && !(b.v_set > 0.0)) add("nonpositive voltage setpoint at bus " + std::to_string(b.id));
    }
    if (n_slack == 0) add("no slack bus");
    if (n_slack > 1) add("multiple slack buses (" + std::to_string(n_slack) + ")");

    for (const auto& br : net.branches) {
        const std::string tag = "branch " + br.label();
        if (!ids.count(br.from) || !ids.count(br.to)) add("dangling reference: " + tag + " names a missing bus");
        if (br.from == br.to) add("self loop: " + tag);
        if (br.r == 0.0 && br.x == 0.0) add("zero impedance: " + tag);
        if (!(br.tap > 0.0)) add("nonpositive tap: " + tag);
    }

    std::unordered_set<std::string> gen_ids;
    for (const auto& g : net.generators) {
        const std::string tag = "generator " + g.id;
        if (!gen_ids.insert(g.id).second) add("duplicate generator id " + g.id);
        if (!ids.count(g.bus)) add("dangling reference: " + tag + " at missing bus " + std::to_string(g.bus));
        if (!(g.h_sec > 0.0)) add("nonpositive inertia: " + tag);
        if (!(g.xdp > 0.0)) add("nonpositive transient reactance: " + tag);
        if (!(g.d_damp >= 0.0)) add("negative damping: " + tag);
        if (!(g.v_set > 0.0)) add("nonpositive voltage setpoint: " + tag);
    }
    return report;
}

NetworkCase parse_case(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("parse error: ") + e.what());
    }
    NetworkCase net;
    try {
        net.base_mva = get_required<double>(doc, "base_mva", "case");
        net.freq_hz = get_or<double>(doc, "freq_hz", 60.0);
        for (const auto& jb : doc.at("buses")) {
            Bus b;
            b.id = get_required<int>(jb, "id", "bus");
            b.kind = parse_kind(get_required<std::string>(jb, "kind", "bus"));
            b.v_set = get_or<double>(jb, "v_set", 1.0);
            b.p_load = get_or<double>(jb, "p_load", 0.0);
            b.q_load = get_or<double>(jb, "q_load", 0.0);
            b.g_shunt = get_or<double>(jb, "g_shunt", 0.0);
            b.b_shunt = get_or<double>(jb, "b_shunt", 0.0);
            net.buses.push_back(b);
        }
        for (const auto& jl : doc.at("branches")) {
            Branch br;
            br.from = get_required<int>(jl, "from", "branch");
            br.to = get_required<int>(jl, "to", "branch");
            br.r = get_or<double>(jl, "r", 0.0);
            br.x = get_required<double>(jl, "x", "branch");
            br.b_charging_half = get_or<double>(jl, "b_charging_half", 0.0);
            br.tap = get_or<double>(jl, "tap", 1.0);
            br.in_service = get_or<bool>(jl, "in_service", true);
            net.branches.push_back(br);
        }
        for (const auto& jg : doc.at("generators")) {
            Generator g;
            g.id = get_required<std::string>(jg, "id", "generator");
            g.bus = get_required<int>(jg, "bus", "generator");
            g.p_set = get_or<double>(jg, "p_set", 0.0);
            g.v_set = get_or<double>(jg, "v_set", 1.0);
            g.h_sec = get_required<double>(jg, "h_sec", "generator");
            g.xdp = get_required<double>(jg, "xdp", "generator");
            g.d_damp = get_or<double>(jg, "d_damp", 2.0);
            net.generators.push_back(g);
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("parse error: ") + e.what());
    }
    return net;
}

NetworkCase load_case(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open case file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    NetworkCase net = parse_case(buf.str());
    const auto report = validate_case(net);
    if (!report.ok()) {
        std::string msg = "validation error in " + path.string() + ":";
        for (const auto& v : report.violations) msg += "\n  " + v;
        throw InputError(msg);
    }
    return net;
}

std::string serialize_case(const NetworkCase& net) {
    json doc;
    doc["base_mva"] = net.base_mva;
    doc["freq_hz"] = net.freq_hz;
    doc["buses"] = json::array();
    for (const auto& b : net.buses) {
        doc["buses"].push_back({{"id", b.id},
                                {"kind", to_string(b.kind)},
                                {"v_set", b.v_set},
                                {"p_load", b.p_load},
                                {"q_load", b.q_load},
                                {"g_shunt", b.g_shunt},
                                {"b_shunt", b.b_shunt}});
    }
    doc["branches"] = json::array();
    for (const auto& br : net.branches) {
        doc["branches"].push_back({{"from", br.from},
                                   {"to", br.to},
                                   {"r", br.r},
                                   {"x", br.x},
                                   {"b_charging_half", br.b_charging_half},
                                   {"tap", br.tap},
                                   {"in_service", br.in_service}});
    }
    doc["generators"] = json::array();
    for (const auto& g : net.generators) {
        doc["generators"].push_back({{"id", g.id},
                                     {"bus", g.bus},
                                     {"p_set", g.p_set},
                                     {"v_set", g.v_set},
                                     {"h_sec", g.h_sec},
                                     {"xdp", g.xdp},
                                     {"d_damp", g.d_damp}});
    }
    return doc.dump(2) + "\n";
}

void save_case(const NetworkCase& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write case file " + path.string());
    out << serialize_case(net);
}

std::vector<std::size_t> find_branches(const NetworkCase& net, const std::string& label) {
    const auto dash = label.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 == label.size()) {
        throw InputError("branch target '" + label + "' is not of the form a-b");
    }
    int a = 0, b = 0;
    try {
        a = std::stoi(label.substr(0, dash));
        b = std::stoi(label.substr(dash + 1));
    } catch (const std::exception&) {
        throw InputError("branch target '" + label + "' is not of the form a-b");
    }
    std::vector<std::size_t> found;
    for (std::size_t k = 0; k < net.branches.size(); ++k) {
        if (net.branches[k].connects(a, b)) found.push_back(k);
    }
    return found;
}

AdmittanceMatrix build_ybus(const NetworkCase& net, const TopologyState& topology) {
    const auto n = static_cast<Eigen::Index>(net.buses.size());
    AdmittanceMatrix y;
    y.entries = Eigen::MatrixXcd::Zero(n, n);
    y.node_labels.reserve(net.buses.size());
    for (const auto& b : net.buses) y.node_labels.push_back(std::to_string(b.id));

    for (std::size_t k = 0; k < net.branches.size(); ++k) {
        const auto& br = net.branches[k];
        if (!br.in_service || topology.out_of_service.count(k)) continue;
        const auto f = static_cast<Eigen::Index>(*net.bus_position(br.from));
        const auto t = static_cast<Eigen::Index>(*net.bus_position(br.to));
        const Complex ys = 1.0 / Complex(br.r, br.x);
        const Complex ysh(0.0, br.b_charging_half);
        y.entries(f, f) += (ys + ysh) / (br.tap * br.tap);
        y.entries(t, t) += ys + ysh;
        y.entries(f, t) -= ys / br.tap;
        y.entries(t, f) -= ys / br.tap;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& b = net.buses[static_cast<std::size_t>(i)];
        y.entries(i, i) += Complex(b.g_shunt, b.b_shunt);
    }
    for (const auto& [bus, g_fault] : topology.bus_faults) {
        const auto pos = net.bus_position(bus);
        if (!pos) throw InputError("fault at missing bus " + std::to_string(bus));
        const auto i = static_cast<Eigen::Index>(*pos);
        y.entries(i, i) += Complex(g_fault, 0.0);
    }
    return y;
}

}  // namespace cohlab
