#pragma once

#include <variant>

#include "feederlab/foundation.hpp"

namespace feederlab::network {

/// Radial lossless feeder: slack (50 kV) - T1 - PCC (21 kV) - T2 - PBC (0.3 kV).
/// Load, PV and the converter all attach at the PBC. Reactances are per unit
/// on base.s_base.
struct FeederModel {
	PerUnitBase base;
	double x_t1 = 0.05 * 720e3 / 20e6; // 0.05 pu on the 20 MVA transformer rating
	double x_t2 = 0.0754;
	double x_coupling = 0.1; // grid-forming filter reactance
	double load_p = 140e3;   // W, consumption positive
	double pv_p = 0.0;       // W, injection positive

	void validate() const;
};

/// Grid-forming boundary: internal EMF behind x_coupling.
struct VoltageSource {
	double e_mag = 1.0; // pu
	double angle = 0.0; // rad
};

/// Grid-following boundary: injected power at the PBC.
struct PowerSource {
	double p = 0.0; // W
	double q = 0.0; // var
};

using ConverterBoundary = std::variant<VoltageSource, PowerSource>;

struct BusState {
	Phasor v_slack;
	Phasor v_pcc;  // PMU 1
	Phasor v_pbc;  // PMU 2
	double p_g = 0.0;     // W, T2 flow toward the PCC (L = P - G)
	double p_bess = 0.0;  // W, converter injection toward the PBC
	double p_load = 0.0;  // W
	double p_slack = 0.0; // W, injected by the bulk grid
	double mismatch_pu = 0.0;
	int iterations = 0;
};

inline constexpr int kMaxNewtonIterations = 50;
inline constexpr double kNewtonTolerance = 1e-12; // pu

/// Solves the feeder for one instant. `guess` (optional) seeds Newton with a
/// previous solution; the flat start otherwise selects the high-voltage root.
/// Throws SolverError after kMaxNewtonIterations.
BusState solve_step(const FeederModel& feeder, const Phasor& v_slack, const ConverterBoundary& boundary,
                    const BusState* guess = nullptr);

/// |d(theta_pcc - theta_pbc)/dP| at zero power flow, deg/kW.
double angle_sensitivity(const FeederModel& feeder);

/// Returns the T2 reactance (pu) giving `deg_per_kw` sensitivity between the
/// PCC and PBC buses at zero power flow. Throws InputError when the rated
/// injection would push that angle beyond pi/4.
double calibrate_sensitivity(const FeederModel& feeder, double deg_per_kw);

} // namespace feederlab::network
