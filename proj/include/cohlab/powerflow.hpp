#pragma once

#include "cohlab/error.hpp"
#include "cohlab/grid_model.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cohlab {

struct PowerFlowOptions {
    double tol = 1e-8;  // pu mismatch
    int max_iter = 30;
};

struct PowerFlowSolution {
    std::vector<double> v_mag;  // pu, per bus in case order
    std::vector<double> v_ang;  // rad
    std::vector<double> p_inj;  // net injection, pu
    std::vector<double> q_inj;
    int iterations = 0;         // mismatch evaluations, including the converged one
    double max_mismatch = 0.0;

    Complex voltage(std::size_t bus_pos) const { return std::polar(v_mag[bus_pos], v_ang[bus_pos]); }
};

/// Thrown when Newton-Raphson exhausts max_iter; carries the last residual.
class PowerFlowDivergence : public NumericalError {
  public:
    PowerFlowDivergence(const std::string& what, double final_mismatch)
        : NumericalError(what), final_mismatch_(final_mismatch) {}
    double final_mismatch() const { return final_mismatch_; }

  private:
    double final_mismatch_;
};

/// Full Newton-Raphson in polar form from a flat start (setpoint magnitudes at
/// slack/pv buses). Slack angle is 0. No reactive limits.
PowerFlowSolution solve_power_flow(const NetworkCase& net, const PowerFlowOptions& opts = {});

struct InternalEmf {
    std::string machine;
    double e_mag = 0.0;   // |E'|, pu
    double delta0 = 0.0;  // rad
};

/// Classical-model EMF behind x'd from the solved terminal conditions. Where
/// several machines share a bus the active output is split by p_set (evenly
/// when all are zero) and reactive output evenly.
std::vector<InternalEmf> internal_emf(const NetworkCase& net, const PowerFlowSolution& sol);

/// Writes `bus,v_mag_pu,v_ang_deg,p_inj_pu,q_inj_pu`.
void write_power_flow_csv(const NetworkCase& net, const PowerFlowSolution& sol, const std::filesystem::path& path);

}  // namespace cohlab
