#pragma once

#include "cohlab/error.hpp"
#include "cohlab/grid_model.hpp"
#include "cohlab/powerflow.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cohlab {

/// Row-major so each machine's series is contiguous.
using SeriesMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kBoltedFaultAdmittance = 1e6;  // pu

/// Schur complement of `y_full` onto `keep`: Y_kk - Y_ke Y_ee^-1 Y_ek.
/// Throws NumericalError when the eliminated block is singular.
AdmittanceMatrix kron_reduce(const AdmittanceMatrix& y_full, std::span<const std::size_t> keep);

/// Machine-to-machine network seen from the internal EMF nodes.
struct ReducedNetwork {
    Eigen::MatrixXcd y_red;
    std::vector<double> e_mag;
    std::vector<std::string> machine_labels;

    std::size_t order() const { return e_mag.size(); }
};

/// Loads become constant admittances (P - jQ)/|V|^2 at the solved voltages,
/// internal nodes attach through 1/(j x'd), every network bus is eliminated.
ReducedNetwork build_reduced(const NetworkCase& net, const PowerFlowSolution& sol, const std::vector<InternalEmf>& emfs,
                             const TopologyState& topology = {});

/// P_ei = sum_j |E'_i||E'_j| (G_ij cos d_ij + B_ij sin d_ij).
std::vector<double> electrical_power(const ReducedNetwork& red, std::span<const double> delta);

enum class EventKind { apply_bus_fault, clear_bus_fault, trip_line, close_line };

struct SimEvent {
    double time_s = 0.0;
    EventKind kind = EventKind::apply_bus_fault;
    std::string target;  // bus id, or branch "a-b"
    double y_fault = kBoltedFaultAdmittance;  // shunt conductance for apply_bus_fault, pu
};

struct EventSchedule {
    std::vector<SimEvent> events;
};

EventSchedule parse_event_schedule(const std::string& text);
EventSchedule load_event_schedule(const std::filesystem::path& path);
/// Checks ordering and that every target exists and every clear names an active fault.
void validate_schedule(const NetworkCase& net, const EventSchedule& schedule);
const char* to_string(EventKind kind);

struct Epoch {
    double start_time = 0.0;
    ReducedNetwork network;
};

struct RotorTrajectory {
    std::vector<std::string> machine_labels;
    std::vector<double> times;
    SeriesMatrix delta;  // machines x samples, rad
    SeriesMatrix omega;  // machines x samples, rad/s deviation from synchronous
    std::vector<double> inertia;  // H per machine; empty when delta is already referenced
    std::vector<Epoch> epochs;

    std::size_t machine_count() const { return static_cast<std::size_t>(delta.rows()); }
    std::size_t sample_count() const { return times.size(); }

    /// Angles relative to the center of inertia (or as stored when no inertia is attached).
    SeriesMatrix reference_angles() const;
    /// Epoch in force at time t (latest start_time <= t).
    const Epoch& epoch_at(double t) const;
};

struct SimOptions {
    double dt = 1e-3;
    double t_stop = 10.0;
    int sample_every = 1;  // record every n-th step
    PowerFlowOptions power_flow{};
    std::optional<double> damping;  // overrides every generator's d_damp
    std::function<void(const std::string&)> warn;  // event snapping notices; stderr when unset
};

/// Fixed-step RK4 on the classical swing equations under a timed event schedule.
/// Mechanical power is held at the pre-event electrical power so t=0 is an equilibrium.
RotorTrajectory simulate(const NetworkCase& net, const EventSchedule& schedule, const SimOptions& opts);

struct SyncLoss {
    double time = 0.0;
    std::size_t first = 0;
    std::size_t second = 0;
};

/// First instant at which each machine pair's angle separation exceeds `threshold`.
std::vector<SyncLoss> detect_loss_of_sync(const RotorTrajectory& traj, double threshold = std::numbers::pi);

}  // namespace cohlab
