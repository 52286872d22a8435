#include "feederlab/converter.hpp"

#include <algorithm>

namespace feederlab::converter {

void ConverterParams::validate() const {
	for (double v : {f0, s_rated, e_cap, droop, gfr_filter_cutoff, gfr_e_mag, current_lag})
		if (!(v > 0.0) || !std::isfinite(v))
			throw InputError("converter ratings, droop, lags and cutoffs must be strictly positive");
	if (!(pll_kp >= 0.0) || !(pll_ki >= 0.0))
		throw InputError("PLL gains must be non-negative");
	if (!(deadband >= 0.0))
		throw InputError("deadband must be non-negative");
	if (!(soc_min >= 0.0 && soc_min < soc_max && soc_max <= 1.0))
		throw InputError("need 0 <= soc_min < soc_max <= 1");
}

GfrState gfr_step(const GfrState& state, double p_meas, double dt, const ConverterParams& params) {
	if (!(dt > 0.0) || dt > kMaxStep)
		throw InputError("gfr_step: dt must be in (0, 2 ms]");
	GfrState next = state;
	next.p_filt += dt * params.gfr_filter_cutoff * (p_meas - state.p_filt);
	next.p_filt = std::clamp(next.p_filt, -params.s_rated, params.s_rated);
	next.theta_c += dt * kTwoPi * (-(next.p_filt - params.p0) / params.droop);
	return next;
}

double gfr_frequency(const GfrState& state, const ConverterParams& params) {
	return params.f0 - (state.p_filt - params.p0) / params.droop;
}

GflState gfl_pll_step(const GflState& state, const Phasor& v_pbc, double dt, const ConverterParams& params) {
	if (!(dt > 0.0) || dt > kMaxStep)
		throw InputError("gfl_pll_step: dt must be in (0, 2 ms]");
	GflState next = state;
	if (v_pbc.magnitude <= kPllMinVoltage) {
		next.pll_frozen = true;
		return next;
	}
	next.pll_frozen = false;
	const double err = wrap_angle(v_pbc.angle - state.theta_pll);
	next.pll_integrator += params.pll_ki * err * dt;
	next.omega_pll = params.pll_kp * err + next.pll_integrator;
	next.theta_pll += next.omega_pll * dt;
	return next;
}

double gfl_frequency(const GflState& state, const ConverterParams& params) {
	return params.f0 + state.omega_pll / kTwoPi;
}

double apply_deadband(double df, double width) {
	if (std::abs(df) <= width)
		return 0.0;
	return df > 0.0 ? df - width : df + width;
}

GflState gfl_droop_step(const GflState& state, double dt, const ConverterParams& params) {
	GflState next = state;
	const double df = gfl_frequency(state, params) - params.f0;
	next.p_cmd = params.p0 - params.droop * apply_deadband(df, params.deadband);
	const double alpha = std::min(1.0, dt / params.current_lag);
	next.p_out = state.p_out + alpha * (next.p_cmd - state.p_out);
	return next;
}

LimitResult apply_limits(double p_requested, const BessState& bess, double dt, const ConverterParams& params) {
	const double joules = 3600.0 * params.e_cap;
	const double max_discharge = std::max(0.0, (bess.soc - params.soc_min) * joules / dt);
	const double max_charge = std::max(0.0, (params.soc_max - bess.soc) * joules / dt);

	double p = std::clamp(p_requested, -params.s_rated, params.s_rated);
	p = std::clamp(p, -max_charge, max_discharge);

	LimitResult out{p, bess};
	const double delta = -p * dt / joules - bess.carry;
	const double soc = bess.soc + delta;
	out.bess.carry = (soc - bess.soc) - delta;
	out.bess.soc = std::clamp(soc, params.soc_min, params.soc_max);
	return out;
}

} // namespace feederlab::converter
