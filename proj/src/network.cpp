#include "feederlab/network.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <string>

namespace feederlab::network {

void FeederModel::validate() const {
	base.validate();
	if (!(x_t1 > 0.0) || !(x_t2 > 0.0) || !(x_coupling > 0.0))
		throw InputError("feeder reactances must be strictly positive");
	if (!std::isfinite(load_p) || !std::isfinite(pv_p))
		throw InputError("feeder load and PV must be finite");
}

namespace {

// Bus order: slack, PCC, PBC, converter internal node.
constexpr int kBuses = 4;
constexpr int kPcc = 1;
constexpr int kPbc = 2;
constexpr int kInternal = 3;

struct Grid {
	std::array<std::array<double, kBuses>, kBuses> b{}; // susceptance matrix
	std::array<double, kBuses> v{};
	std::array<double, kBuses> th{};
	std::array<double, kBuses> p_spec{};
	std::array<double, kBuses> q_spec{};
	bool has_internal = false;

	void branch(int i, int j, double x) {
		const double y = 1.0 / x;
		b[i][j] += y;
		b[j][i] += y;
		b[i][i] -= y;
		b[j][j] -= y;
	}

	double p_calc(int i) const {
		double s = 0.0;
		for (int j = 0; j < kBuses; ++j)
			if (j != i && b[i][j] != 0.0)
				s += v[i] * v[j] * b[i][j] * std::sin(th[i] - th[j]);
		return s;
	}

	double q_calc(int i) const {
		double s = -v[i] * v[i] * b[i][i];
		for (int j = 0; j < kBuses; ++j)
			if (j != i && b[i][j] != 0.0)
				s -= v[i] * v[j] * b[i][j] * std::cos(th[i] - th[j]);
		return s;
	}

	double flow(int from, int to) const {
		return v[from] * v[to] * b[from][to] * std::sin(th[from] - th[to]);
	}
};

// Unknown layout: [th_pcc, v_pcc, th_pbc, v_pbc].
constexpr std::array<int, 2> kUnknownBuses{kPcc, kPbc};

Eigen::Vector4d mismatch(const Grid& g) {
	Eigen::Vector4d f;
	for (int u = 0; u < 2; ++u) {
		const int i = kUnknownBuses[u];
		f[2 * u] = g.p_spec[i] - g.p_calc(i);
		f[2 * u + 1] = g.q_spec[i] - g.q_calc(i);
	}
	return f;
}

Eigen::Matrix4d jacobian(const Grid& g) {
	Eigen::Matrix4d jac = Eigen::Matrix4d::Zero();
	for (int u = 0; u < 2; ++u) {
		const int i = kUnknownBuses[u];
		double dp_dth = 0.0, dp_dv = 0.0, dq_dth = 0.0, dq_dv = -2.0 * g.v[i] * g.b[i][i];
		for (int j = 0; j < kBuses; ++j) {
			if (j == i || g.b[i][j] == 0.0)
				continue;
			const double a = g.th[i] - g.th[j];
			dp_dth += g.v[i] * g.v[j] * g.b[i][j] * std::cos(a);
			dp_dv += g.v[j] * g.b[i][j] * std::sin(a);
			dq_dth += g.v[i] * g.v[j] * g.b[i][j] * std::sin(a);
			dq_dv -= g.v[j] * g.b[i][j] * std::cos(a);
		}
		jac(2 * u, 2 * u) = dp_dth;
		jac(2 * u, 2 * u + 1) = dp_dv;
		jac(2 * u + 1, 2 * u) = dq_dth;
		jac(2 * u + 1, 2 * u + 1) = dq_dv;
		for (int w = 0; w < 2; ++w) {
			const int k = kUnknownBuses[w];
			if (k == i || g.b[i][k] == 0.0)
				continue;
			const double a = g.th[i] - g.th[k];
			jac(2 * u, 2 * w) = -g.v[i] * g.v[k] * g.b[i][k] * std::cos(a);
			jac(2 * u, 2 * w + 1) = g.v[i] * g.b[i][k] * std::sin(a);
			jac(2 * u + 1, 2 * w) = -g.v[i] * g.v[k] * g.b[i][k] * std::sin(a);
			jac(2 * u + 1, 2 * w + 1) = -g.v[i] * g.b[i][k] * std::cos(a);
		}
	}
	return jac;
}

} // namespace

BusState solve_step(const FeederModel& feeder, const Phasor& v_slack, const ConverterBoundary& boundary,
                    const BusState* guess) {
	const double s = feeder.base.s_base;
	Grid g;
	g.branch(0, kPcc, feeder.x_t1);
	g.branch(kPcc, kPbc, feeder.x_t2);
	g.v[0] = v_slack.magnitude;
	// Angles are solved relative to the slack.
	const double ref = v_slack.angle;
	g.th[0] = 0.0;
	g.p_spec[kPbc] = (feeder.pv_p - feeder.load_p) / s;

	if (const auto* vs = std::get_if<VoltageSource>(&boundary)) {
		g.has_internal = true;
		g.branch(kPbc, kInternal, feeder.x_coupling);
		g.v[kInternal] = vs->e_mag;
		g.th[kInternal] = vs->angle - ref;
	} else {
		const auto& ps = std::get<PowerSource>(boundary);
		g.p_spec[kPbc] += ps.p / s;
		g.q_spec[kPbc] += ps.q / s;
	}

	if (guess) {
		const double prev_ref = guess->v_slack.angle;
		g.v[kPcc] = guess->v_pcc.magnitude;
		g.th[kPcc] = guess->v_pcc.angle - prev_ref;
		g.v[kPbc] = guess->v_pbc.magnitude;
		g.th[kPbc] = guess->v_pbc.angle - prev_ref;
	} else {
		g.v[kPcc] = g.v[kPbc] = v_slack.magnitude;
	}

	double residual = mismatch(g).cwiseAbs().maxCoeff();
	int it = 0;
	while (!(residual < kNewtonTolerance)) {
		if (it == kMaxNewtonIterations || !std::isfinite(residual))
			throw SolverError("power flow did not converge after " + std::to_string(it) +
			                      " iterations, residual " + std::to_string(residual) + " pu",
			                  residual);
		const Eigen::Vector4d dx = jacobian(g).partialPivLu().solve(mismatch(g));
		for (int u = 0; u < 2; ++u) {
			g.th[kUnknownBuses[u]] += dx[2 * u];
			g.v[kUnknownBuses[u]] += dx[2 * u + 1];
		}
		residual = mismatch(g).cwiseAbs().maxCoeff();
		++it;
	}
	if (g.v[kPcc] <= 0.0 || g.v[kPbc] <= 0.0)
		throw SolverError("power flow converged to a non-physical voltage", residual);

	BusState out;
	out.v_slack = v_slack;
	out.v_pcc = Phasor(g.v[kPcc], g.th[kPcc] + ref);
	out.v_pbc = Phasor(g.v[kPbc], g.th[kPbc] + ref);
	out.p_g = g.flow(kPbc, kPcc) * s;
	out.p_bess = g.has_internal ? g.flow(kInternal, kPbc) * s : std::get<PowerSource>(boundary).p;
	out.p_load = feeder.load_p;
	out.p_slack = g.flow(0, kPcc) * s;
	out.mismatch_pu = std::abs(out.p_g - (out.p_bess + feeder.pv_p - feeder.load_p)) / s;
	out.iterations = it;
	return out;
}

double angle_sensitivity(const FeederModel& feeder) {
	FeederModel idle = feeder;
	idle.load_p = 0.0;
	idle.pv_p = 0.0;
	const double h = 1e-4 * feeder.base.s_base;
	const Phasor slack(1.0, 0.0);
	auto spread = [&](double p) {
		const BusState st = solve_step(idle, slack, PowerSource{p, 0.0});
		return st.v_pcc.angle - st.v_pbc.angle;
	};
	const double rad_per_w = (spread(h) - spread(-h)) / (2.0 * h);
	return std::abs(rad2deg(rad_per_w) * 1e3);
}

double calibrate_sensitivity(const FeederModel& feeder, double deg_per_kw) {
	if (!(deg_per_kw > 0.0) || !std::isfinite(deg_per_kw))
		throw InputError("calibration target must be positive");
	const double s = feeder.base.s_base;
	// Linearised start: delta ~ P * x at unit voltages.
	const double rad_per_pu = deg2rad(deg_per_kw) * s / 1e3;
	if (rad_per_pu >= kPi / 4.0)
		throw InputError("sensitivity target unachievable: rated injection would exceed pi/4");

	FeederModel trial = feeder;
	trial.x_t2 = rad_per_pu;
	auto sens = [&](double x) {
		trial.x_t2 = x;
		return angle_sensitivity(trial);
	};
	double x = rad_per_pu;
	for (int it = 0; it < kMaxNewtonIterations; ++it) {
		const double err = sens(x) - deg_per_kw;
		if (std::abs(err) < 1e-9 * deg_per_kw)
			break;
		const double eps = 1e-6 * x;
		const double slope = (sens(x + eps) - sens(x)) / eps;
		x -= err / slope;
		if (!(x > 0.0))
			throw InputError("sensitivity calibration diverged");
	}

	trial.x_t2 = x;
	trial.load_p = 0.0;
	trial.pv_p = 0.0;
	try {
		const BusState rated = solve_step(trial, Phasor(1.0, 0.0), PowerSource{s, 0.0});
		if (std::abs(rated.v_pbc.angle - rated.v_pcc.angle) >= kPi / 4.0)
			throw InputError("sensitivity target unachievable: rated injection exceeds pi/4");
	} catch (const SolverError&) {
		throw InputError("sensitivity target unachievable: no power-flow solution at rated injection");
	}
	return x;
}

} // namespace feederlab::network
