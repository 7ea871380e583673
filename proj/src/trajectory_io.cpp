#include "cohlab/trajectory_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace cohlab {

using nlohmann::json;

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        cells.push_back(cell);
    }
    return cells;
}

double parse_number(const std::string& s, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw InputError("parse error: trajectory line " + std::to_string(line_no) + " has non-numeric cell '" + s + "'");
}

}  // namespace

void write_trajectory_csv(const RotorTrajectory& traj, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << "time_s";
    for (const auto& l : traj.machine_labels) out << ',' << l;
    out << '\n';
    const SeriesMatrix ang = traj.reference_angles();
    char buf[40];
    for (std::size_t s = 0; s < traj.sample_count(); ++s) {
        std::snprintf(buf, sizeof buf, "%.6f", traj.times[s]);
        out << buf;
        for (Eigen::Index i = 0; i < ang.rows(); ++i) {
            std::snprintf(buf, sizeof buf, ",%.17g", ang(i, static_cast<Eigen::Index>(s)) * kRadToDeg);
            out << buf;
        }
        out << '\n';
    }
}

RotorTrajectory ingest_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open trajectory file " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw InputError("parse error: empty trajectory file " + path.string());
    const auto header = split_csv(line);
    if (header.size() < 2 || header.front() != "time_s") {
        throw InputError("parse error: trajectory header must start with time_s and name at least one machine");
    }

    RotorTrajectory traj;
    traj.machine_labels.assign(header.begin() + 1, header.end());
    const std::size_t m = traj.machine_labels.size();
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv(line);
        if (cells.size() != m + 1) {
            throw InputError("parse error: trajectory line " + std::to_string(line_no) + " has " +
                             std::to_string(cells.size()) + " cells, expected " + std::to_string(m + 1));
        }
        const double t = parse_number(cells[0], line_no);
        if (!traj.times.empty() && !(t > traj.times.back())) {
            throw InputError("parse error: trajectory times must be strictly increasing (line " +
                             std::to_string(line_no) + ")");
        }
        traj.times.push_back(t);
        std::vector<double> row(m);
        for (std::size_t i = 0; i < m; ++i) row[i] = parse_number(cells[i + 1], line_no) / kRadToDeg;
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError("parse error: trajectory has no samples");

    traj.delta.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t s = 0; s < rows.size(); ++s) {
        for (std::size_t i = 0; i < m; ++i) {
            traj.delta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) = rows[s][i];
        }
    }
    return traj;
}

void write_epochs_json(const RotorTrajectory& traj, const std::filesystem::path& path) {
    json doc;
    doc["machine_labels"] = traj.machine_labels;
    doc["epochs"] = json::array();
    for (const auto& ep : traj.epochs) {
        json rows = json::array();
        const auto& y = ep.network.y_red;
        for (Eigen::Index r = 0; r < y.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < y.cols(); ++c) row.push_back({y(r, c).real(), y(r, c).imag()});
            rows.push_back(std::move(row));
        }
        doc["epochs"].push_back({{"start_time_s", ep.start_time}, {"e_mag", ep.network.e_mag}, {"y_red", rows}});
    }
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << doc.dump(1) << '\n';
}

std::vector<Epoch> read_epochs_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open epochs file " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw InputError(std::string("parse error in epochs file: ") + e.what());
    }
    std::vector<Epoch> epochs;
    try {
        const auto labels = doc.at("machine_labels").get<std::vector<std::string>>();
        const auto m = static_cast<Eigen::Index>(labels.size());
        for (const auto& je : doc.at("epochs")) {
            Epoch ep;
            ep.start_time = je.at("start_time_s").get<double>();
            ep.network.machine_labels = labels;
            ep.network.e_mag = je.at("e_mag").get<std::vector<double>>();
            const auto& rows = je.at("y_red");
            if (static_cast<Eigen::Index>(ep.network.e_mag.size()) != m || static_cast<Eigen::Index>(rows.size()) != m) {
                throw InputError("epochs file: dimensions disagree with machine_labels");
            }
            ep.network.y_red.resize(m, m);
            for (Eigen::Index r = 0; r < m; ++r) {
                const auto& row = rows.at(static_cast<std::size_t>(r));
                if (static_cast<Eigen::Index>(row.size()) != m) throw InputError("epochs file: ragged y_red row");
                for (Eigen::Index c = 0; c < m; ++c) {
                    const auto& z = row.at(static_cast<std::size_t>(c));
                    ep.network.y_red(r, c) = Complex(z.at(0).get<double>(), z.at(1).get<double>());
                }
            }
            if (!epochs.empty() && ep.start_time < epochs.back().start_time) {
                throw InputError("epochs file: start times must be nondecreasing");
            }
            epochs.push_back(std::move(ep));
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("parse error in epochs file: ") + e.what());
    }
    if (epochs.empty()) throw InputError("epochs file holds no epochs");
    return epochs;
}

void attach_epochs(RotorTrajectory& traj, std::vector<Epoch> epochs) {
    for (const auto& ep : epochs) {
        if (ep.network.machine_labels != traj.machine_labels) {
            throw InputError("epochs sidecar machine labels do not match the trajectory header");
        }
    }
    traj.epochs = std::move(epochs);
}

}  // namespace cohlab
