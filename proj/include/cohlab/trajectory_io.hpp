#pragma once

#include "cohlab/transient_sim.hpp"

#include <filesystem>
#include <vector>

namespace cohlab {

/// `time_s,G1,...,GN`, angles in degrees relative to the center of inertia.
void write_trajectory_csv(const RotorTrajectory& traj, const std::filesystem::path& path);

/// Reads the trajectory CSV (also hand-exported tool data in the same layout).
/// Angles are taken as already referenced; omega and epochs are left empty.
RotorTrajectory ingest_trajectory_csv(const std::filesystem::path& path);

/// Sidecar with per-epoch `start_time_s`, `e_mag[]` and complex `y_red` rows of [re, im] pairs.
void write_epochs_json(const RotorTrajectory& traj, const std::filesystem::path& path);
std::vector<Epoch> read_epochs_json(const std::filesystem::path& path);

/// Attaches a sidecar to an ingested trajectory, checking that machine labels agree.
void attach_epochs(RotorTrajectory& traj, std::vector<Epoch> epochs);

}  // namespace cohlab
