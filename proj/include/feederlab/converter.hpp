#pragma once

#include "feederlab/foundation.hpp"

namespace feederlab::converter {

struct ConverterParams {
	double f0 = 50.0;                            // Hz
	double s_rated = 720e3;                      // VA
	double e_cap = 500e3;                        // Wh
	double droop = 1.44e6;                       // W/Hz
	double p0 = 0.0;                             // W
	double gfr_filter_cutoff = kTwoPi * 5.0;     // rad/s
	double gfr_e_mag = 1.0;                      // pu
	double pll_kp = 157.0;                       // 1/s
	double pll_ki = 4935.0;                      // 1/s^2
	double current_lag = 0.02;                   // s
	double deadband = 0.0;                       // Hz
	double soc_min = 0.1;
	double soc_max = 0.9;

	void validate() const;
};

/// Largest step accepted by the explicit controller updates.
inline constexpr double kMaxStep = 2e-3;

struct GfrState {
	double theta_c = 0.0; // rad, internal EMF angle in the nominal frame
	double p_filt = 0.0;  // W
};

struct GflState {
	double theta_pll = 0.0;
	double omega_pll = 0.0;      // rad/s deviation from nominal
	double pll_integrator = 0.0; // rad/s
	double p_cmd = 0.0;          // W
	double p_out = 0.0;          // W, after lag and limits
	bool pll_frozen = false;     // set while the PBC voltage is collapsed
};

struct BessState {
	double soc = 0.5;
	double carry = 0.0; // Kahan compensation for the SOC integral
};

/// Angle droop: filtered power sets the internal frequency f0 - (P - P0)/D,
/// which is integrated into theta_c.
GfrState gfr_step(const GfrState& state, double p_meas, double dt, const ConverterParams& params);

double gfr_frequency(const GfrState& state, const ConverterParams& params);

/// Below this PBC magnitude the PLL holds its state.
inline constexpr double kPllMinVoltage = 0.1;

/// Synchronous-reference-frame PLL with PI loop filter.
GflState gfl_pll_step(const GflState& state, const Phasor& v_pbc, double dt, const ConverterParams& params);

double gfl_frequency(const GflState& state, const ConverterParams& params);

/// Symmetric deadband that subtracts its width.
double apply_deadband(double df, double width);

/// Droop set-point from the PLL frequency followed by a first-order current lag.
GflState gfl_droop_step(const GflState& state, double dt, const ConverterParams& params);

struct LimitResult {
	double p_actual = 0.0;
	BessState bess;
};

/// Clamps to the apparent-power rating and to the energy left between
/// soc_min and soc_max within this step, then books the energy. Positive
/// power discharges the battery.
LimitResult apply_limits(double p_requested, const BessState& bess, double dt, const ConverterParams& params);

} // namespace feederlab::converter
