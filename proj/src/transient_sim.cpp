#include "cohlab/transient_sim.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace cohlab {

using nlohmann::json;

const char* to_string(EventKind kind) {
    switch (kind) {
        case EventKind::apply_bus_fault: return "apply_bus_fault";
        case EventKind::clear_bus_fault: return "clear_bus_fault";
        case EventKind::trip_line: return "trip_line";
        case EventKind::close_line: return "close_line";
    }
    return "apply_bus_fault";
}

namespace {

EventKind parse_event_kind(const std::string& s) {
    if (s == "apply_bus_fault") return EventKind::apply_bus_fault;
    if (s == "clear_bus_fault") return EventKind::clear_bus_fault;
    if (s == "trip_line") return EventKind::trip_line;
    if (s == "close_line") return EventKind::close_line;
    throw InputError("parse error: unknown event kind '" + s + "'");
}

bool is_bus_event(EventKind k) { return k == EventKind::apply_bus_fault || k == EventKind::clear_bus_fault; }

int parse_bus_target(const std::string& target) {
    std::size_t used = 0;
    int id = 0;
    try {
        id = std::stoi(target, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != target.size()) throw InputError("event target '" + target + "' is not a bus id");
    return id;
}

// Applies one event to a topology. Assumes the schedule was validated.
void apply_event(const NetworkCase& net, const SimEvent& ev, TopologyState& topo) {
    switch (ev.kind) {
        case EventKind::apply_bus_fault:
            topo.bus_faults[parse_bus_target(ev.target)] = ev.y_fault;
            break;
        case EventKind::clear_bus_fault:
            topo.bus_faults.erase(parse_bus_target(ev.target));
            break;
        case EventKind::trip_line:
            for (auto k : find_branches(net, ev.target)) topo.out_of_service.insert(k);
            break;
        case EventKind::close_line:
            for (auto k : find_branches(net, ev.target)) topo.out_of_service.erase(k);
            break;
    }
}

// Electrical power through the complex form P = Re(e . conj(Y e)); N trig calls instead of N^2.
class PowerKernel {
  public:
    void reset(const ReducedNetwork& red) {
        y_ = red.y_red;
        e_ = Eigen::Map<const Eigen::VectorXd>(red.e_mag.data(), static_cast<Eigen::Index>(red.e_mag.size()));
        phasor_.resize(e_.size());
        current_.resize(e_.size());
    }

    void evaluate(const double* delta, double* p_out) {
        const Eigen::Index n = e_.size();
        for (Eigen::Index i = 0; i < n; ++i) phasor_(i) = std::polar(e_(i), delta[i]);
        current_.noalias() = y_ * phasor_;
        for (Eigen::Index i = 0; i < n; ++i) p_out[i] = (phasor_(i) * std::conj(current_(i))).real();
    }

  private:
    Eigen::MatrixXcd y_;
    Eigen::VectorXd e_;
    Eigen::VectorXcd phasor_;
    Eigen::VectorXcd current_;
};

}  // namespace

EventSchedule parse_event_schedule(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("parse error: ") + e.what());
    }
    if (!doc.is_array()) throw InputError("parse error: event schedule must be a JSON list");
    EventSchedule sched;
    try {
        for (const auto& je : doc) {
            SimEvent ev;
            ev.time_s = je.at("time_s").get<double>();
            ev.kind = parse_event_kind(je.at("kind").get<std::string>());
            const auto& tgt = je.at("target");
            ev.target = tgt.is_string() ? tgt.get<std::string>() : std::to_string(tgt.get<int>());
            if (auto it = je.find("y_fault_pu"); it != je.end()) ev.y_fault = it->get<double>();
            sched.events.push_back(ev);
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("parse error: ") + e.what());
    }
    return sched;
}

EventSchedule load_event_schedule(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open events file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_event_schedule(buf.str());
}

void validate_schedule(const NetworkCase& net, const EventSchedule& schedule) {
    TopologyState topo;
    double last = 0.0;
    for (const auto& ev : schedule.events) {
        if (!(ev.time_s >= 0.0) || !std::isfinite(ev.time_s)) throw InputError("event time must be nonnegative");
        if (ev.time_s < last) throw InputError("event times must be nondecreasing");
        last = ev.time_s;
        if (is_bus_event(ev.kind)) {
            const int bus = parse_bus_target(ev.target);
            if (!net.bus_position(bus)) throw InputError("event references unknown bus " + ev.target);
            if (ev.kind == EventKind::apply_bus_fault && !(ev.y_fault > 0.0)) {
                throw InputError("fault admittance must be positive at bus " + ev.target);
            }
            if (ev.kind == EventKind::clear_bus_fault && !topo.bus_faults.count(bus)) {
                throw InputError("clear_bus_fault at bus " + ev.target + " has no active fault");
            }
        } else {
            const auto found = find_branches(net, ev.target);
            if (found.empty()) throw InputError("event references unknown line " + ev.target);
            if (ev.kind == EventKind::close_line) {
                for (auto k : found) {
                    if (!net.branches[k].in_service) {
                        throw InputError("close_line " + ev.target + " names a branch out of service in the case");
                    }
                }
            }
        }
        apply_event(net, ev, topo);
    }
}

SeriesMatrix RotorTrajectory::reference_angles() const {
    if (inertia.empty()) return delta;
    const Eigen::Map<const Eigen::VectorXd> h(inertia.data(), static_cast<Eigen::Index>(inertia.size()));
    const Eigen::RowVectorXd coi = (h.transpose() * delta) / h.sum();
    SeriesMatrix out = delta;
    out.rowwise() -= coi;
    return out;
}

const Epoch& RotorTrajectory::epoch_at(double t) const {
    if (epochs.empty()) throw InputError("trajectory carries no topology epochs");
    auto it = std::upper_bound(epochs.begin(), epochs.end(), t,
                               [](double value, const Epoch& e) { return value < e.start_time; });
    if (it == epochs.begin()) return epochs.front();
    return *std::prev(it);
}

RotorTrajectory simulate(const NetworkCase& net, const EventSchedule& schedule, const SimOptions& opts) {
    if (!(opts.dt > 0.0)) throw InputError("dt must be positive");
    if (!(opts.t_stop > 0.0)) throw InputError("t_stop must be positive");
    if (opts.sample_every < 1) throw InputError("sample_every must be >= 1");
    const auto report = validate_case(net);
    if (!report.ok()) throw InputError("simulate on invalid case: " + report.violations.front());
    validate_schedule(net, schedule);

    auto warn = [&](const std::string& msg) {
        if (opts.warn) {
            opts.warn(msg);
        } else {
            std::cerr << "warning: " << msg << "\n";
        }
    };

    const double dt = opts.dt;
    const auto n_steps = static_cast<long long>(std::llround(opts.t_stop / dt));
    if (std::abs(static_cast<double>(n_steps) * dt - opts.t_stop) > 1e-9 * std::max(1.0, opts.t_stop)) {
        warn("t_stop snapped to " + std::to_string(static_cast<double>(n_steps) * dt) + " s");
    }

    // Event step indices, snapped to the dt grid.
    std::vector<long long> event_step(schedule.events.size());
    for (std::size_t k = 0; k < schedule.events.size(); ++k) {
        const double t = schedule.events[k].time_s;
        event_step[k] = std::llround(t / dt);
        const double snapped = static_cast<double>(event_step[k]) * dt;
        if (std::abs(snapped - t) > 1e-9 * std::max(1.0, t)) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "event at %.9g s snapped to %.9g s", t, snapped);
            warn(buf);
        }
    }

    const PowerFlowSolution pf = solve_power_flow(net, opts.power_flow);
    const std::vector<InternalEmf> emfs = internal_emf(net, pf);
    const std::size_t m = net.generators.size();
    const auto mi = static_cast<Eigen::Index>(m);

    RotorTrajectory traj;
    TopologyState topo;
    traj.epochs.push_back({0.0, build_reduced(net, pf, emfs, topo)});
    for (const auto& g : net.generators) {
        traj.machine_labels.push_back(g.id);
        traj.inertia.push_back(g.h_sec);
    }

    const double omega_s = 2.0 * std::numbers::pi * net.freq_hz;
    Eigen::VectorXd accel_gain(mi), damping(mi), p_mech(mi);
    for (Eigen::Index i = 0; i < mi; ++i) {
        const auto& g = net.generators[static_cast<std::size_t>(i)];
        accel_gain(i) = omega_s / (2.0 * g.h_sec);
        damping(i) = (opts.damping ? *opts.damping : g.d_damp) / omega_s;
    }

    Eigen::VectorXd state(2 * mi);
    for (Eigen::Index i = 0; i < mi; ++i) {
        state(i) = emfs[static_cast<std::size_t>(i)].delta0;
        state(mi + i) = 0.0;
    }

    PowerKernel kernel;
    kernel.reset(traj.epochs.back().network);
    kernel.evaluate(state.data(), p_mech.data());

    const auto n_samples = static_cast<Eigen::Index>(n_steps / opts.sample_every + 1);
    traj.delta.resize(mi, n_samples);
    traj.omega.resize(mi, n_samples);
    traj.times.reserve(static_cast<std::size_t>(n_samples));
    Eigen::Index sample = 0;
    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.delta.col(sample) = state.head(mi);
        traj.omega.col(sample) = state.tail(mi);
        ++sample;
    };
    record(0.0);

    Eigen::VectorXd pe(mi), k1(2 * mi), k2(2 * mi), k3(2 * mi), k4(2 * mi), tmp(2 * mi);
    auto deriv = [&](const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
        kernel.evaluate(x.data(), pe.data());
        dx.head(mi) = x.tail(mi);
        dx.tail(mi) = accel_gain.cwiseProduct(p_mech - pe - damping.cwiseProduct(x.tail(mi)));
    };

    std::size_t next_event = 0;
    for (long long step = 0; step < n_steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        bool changed = false;
        while (next_event < schedule.events.size() && event_step[next_event] <= step) {
            apply_event(net, schedule.events[next_event], topo);
            ++next_event;
            changed = true;
        }
        if (changed) {
            ReducedNetwork red = build_reduced(net, pf, emfs, topo);
            if (traj.epochs.back().start_time == t) {
                traj.epochs.back().network = std::move(red);
            } else {
                traj.epochs.push_back({t, std::move(red)});
            }
            kernel.reset(traj.epochs.back().network);
        }

        deriv(state, k1);
        tmp = state + 0.5 * dt * k1;
        deriv(tmp, k2);
        tmp = state + 0.5 * dt * k2;
        deriv(tmp, k3);
        tmp = state + dt * k3;
        deriv(tmp, k4);
        state += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        if (!state.allFinite()) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "non-finite rotor state at t = %.6f s", t + dt);
            throw NumericalError(buf);
        }
        if ((step + 1) % opts.sample_every == 0) record(static_cast<double>(step + 1) * dt);
    }
    return traj;
}

std::vector<SyncLoss> detect_loss_of_sync(const RotorTrajectory& traj, double threshold) {
    if (!(threshold > 0.0)) throw InputError("loss-of-sync threshold must be positive");
    const std::size_t n = traj.machine_count();
    std::vector<SyncLoss> out;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto di = traj.delta.row(static_cast<Eigen::Index>(i));
            const auto dj = traj.delta.row(static_cast<Eigen::Index>(j));
            for (Eigen::Index s = 0; s < di.size(); ++s) {
                if (std::abs(di(s) - dj(s)) > threshold) {
                    out.push_back({traj.times[static_cast<std::size_t>(s)], i, j});
                    break;
                }
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const SyncLoss& a, const SyncLoss& b) { return a.time < b.time; });
    return out;
}

}  // namespace cohlab
