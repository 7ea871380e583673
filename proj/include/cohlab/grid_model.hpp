#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cohlab {

using Complex = std::complex<double>;

enum class BusKind { slack, pv, pq };

struct Bus {
    int id = 0;
    BusKind kind = BusKind::pq;
    double v_set = 1.0;  // pu, meaningful for slack/pv only
    double p_load = 0.0;
    double q_load = 0.0;
    double g_shunt = 0.0;
    double b_shunt = 0.0;

    bool operator==(const Bus&) const = default;
};

struct Branch {
    int from = 0;
    int to = 0;
    double r = 0.0;
    double x = 0.0;
    double b_charging_half = 0.0;
    double tap = 1.0;  // off-nominal ratio on the from side
    bool in_service = true;

    /// "from-to"; events address branches by this label in either orientation.
    std::string label() const;
    bool connects(int a, int b) const { return (from == a && to == b) || (from == b && to == a); }

    bool operator==(const Branch&) const = default;
};

struct Generator {
    std::string id;
    int bus = 0;
    double p_set = 0.0;
    double v_set = 1.0;
    double h_sec = 0.0;
    double xdp = 0.0;
    double d_damp = 2.0;

    bool operator==(const Generator&) const = default;
};

/// Static grid description. Every electrical quantity is per-unit on base_mva.
struct NetworkCase {
    double base_mva = 100.0;
    double freq_hz = 60.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;

    /// Position of bus `id` in `buses`; nullopt when absent.
    std::optional<std::size_t> bus_position(int id) const;
    std::size_t slack_position() const;

    bool operator==(const NetworkCase&) const = default;
};

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
    bool mentions(const std::string& needle) const;
};

/// Switching state layered over a case: extra outages and bus fault shunts.
struct TopologyState {
    std::set<std::size_t> out_of_service;  // branch positions
    std::map<int, double> bus_faults;      // bus id -> shunt conductance (pu)

    bool operator==(const TopologyState&) const = default;
};

/// Dense complex nodal admittance matrix with a label per row.
struct AdmittanceMatrix {
    Eigen::MatrixXcd entries;
    std::vector<std::string> node_labels;

    std::size_t order() const { return static_cast<std::size_t>(entries.rows()); }
};

ValidationReport validate_case(const NetworkCase& net);

/// Parses and validates; throws InputError on malformed files or violations.
NetworkCase load_case(const std::filesystem::path& path);
NetworkCase parse_case(const std::string& text);
std::string serialize_case(const NetworkCase& net);
void save_case(const NetworkCase& net, const std::filesystem::path& path);

/// Branch positions matching "a-b" (either orientation).
std::vector<std::size_t> find_branches(const NetworkCase& net, const std::string& label);

AdmittanceMatrix build_ybus(const NetworkCase& net, const TopologyState& topology = {});

const char* to_string(BusKind kind);

}  // namespace cohlab
