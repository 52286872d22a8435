#include "doctest.h"

#include <random>

#include "feederlab/converter.hpp"
#include "feederlab/network.hpp"

using namespace feederlab;
using namespace feederlab::converter;

namespace {

// Grid-forming converter on a stiff bus behind reactance x (pu on 720 kVA):
// P = s * sin(theta_c - theta_g) / x.
struct StiffBus {
	double x = 0.1 + 0.0754;
	double s = 720e3;
	double power(double theta_c, double theta_g) const { return s * std::sin(theta_c - theta_g) / x; }
};

double gfr_settle(double grid_offset_hz, double seconds, const ConverterParams& p) {
	const StiffBus bus;
	const double dt = 1e-3;
	GfrState st;
	double theta_g = 0.0, power = 0.0;
	for (int k = 0; k < static_cast<int>(seconds / dt); ++k) {
		theta_g += kTwoPi * grid_offset_hz * dt;
		st = gfr_step(st, power, dt, p);
		power = bus.power(st.theta_c, theta_g);
	}
	return power;
}

// Time at which each controller's injection first reaches 63% of its final
// value after a grid frequency step, on the full feeder model.
std::pair<double, double> rise_times(double step_hz) {
	const network::FeederModel feeder;
	const ConverterParams p;
	const double dt = 1e-3;
	const double target = 0.63 * (-p.droop * step_hz);

	auto run = [&](bool forming) {
		GfrState gfr;
		GflState gfl;
		double theta_s = 0.0;
		network::BusState prev = network::solve_step(feeder, Phasor(1.0, 0.0), network::PowerSource{});
		gfr.theta_c = prev.v_pbc.angle;
		gfl.theta_pll = prev.v_pbc.angle;
		for (int k = 1; k < 2000; ++k) {
			theta_s += kTwoPi * step_hz * dt;
			network::ConverterBoundary b;
			if (forming) {
				gfr = gfr_step(gfr, prev.p_bess, dt, p);
				b = network::VoltageSource{1.0, gfr.theta_c};
			} else {
				gfl = gfl_droop_step(gfl_pll_step(gfl, prev.v_pbc, dt, p), dt, p);
				b = network::PowerSource{gfl.p_out, 0.0};
			}
			prev = network::solve_step(feeder, Phasor(1.0, theta_s), b, &prev);
			if (prev.p_bess >= target)
				return k * dt;
		}
		return 1e9;
	};
	return {run(true), run(false)};
}

} // namespace

TEST_CASE("grid-forming droop settles at P0 - D * df") {
	const ConverterParams p;
	CHECK(gfr_settle(-0.05, 10.0, p) == doctest::Approx(72e3).epsilon(0.005));
	CHECK(gfr_settle(0.02, 10.0, p) == doctest::Approx(-28.8e3).epsilon(0.005));
}

TEST_CASE("grid-forming converter at nominal frequency stays idle") {
	const ConverterParams p;
	GfrState st;
	for (int k = 0; k < 1000; ++k)
		st = gfr_step(st, 0.0, 1e-3, p);
	CHECK(st.theta_c == 0.0);
	CHECK(st.p_filt == 0.0);
	CHECK(gfr_frequency(st, p) == 50.0);
}

TEST_CASE("grid angle step: grid-forming power returns to the set-point") {
	for (double droop : {1.44e5, 1.44e6}) {
		ConverterParams p;
		p.droop = droop;
		p.p0 = 50e3;
		const StiffBus bus;
		GfrState st;
		st.theta_c = std::asin(p.p0 * bus.x / bus.s);
		st.p_filt = p.p0;
		const double theta_g = 0.02; // step at t = 0
		double power = bus.power(st.theta_c, theta_g);
		CHECK(power < 0.0);
		for (int k = 0; k < 5000; ++k) {
			st = gfr_step(st, power, 1e-3, p);
			power = bus.power(st.theta_c, theta_g);
		}
		CHECK(power == doctest::Approx(p.p0).epsilon(1e-6));
	}
}

TEST_CASE("grid-forming filter output is clamped to the rating") {
	const ConverterParams p;
	GfrState st;
	for (int k = 0; k < 1000; ++k)
		st = gfr_step(st, 5e6, 1e-3, p);
	CHECK(st.p_filt == p.s_rated);
	CHECK_THROWS_AS(gfr_step(st, 0.0, 3e-3, p), InputError);
	CHECK_THROWS_AS(gfr_step(st, 0.0, 0.0, p), InputError);
}

TEST_CASE("PLL locks to a static phasor") {
	const ConverterParams p;
	GflState st;
	const Phasor v(1.0, 0.7);
	for (int k = 0; k < 2000; ++k)
		st = gfl_pll_step(st, v, 1e-3, p);
	CHECK(std::abs(wrap_angle(v.angle - st.theta_pll)) < 1e-6);
	CHECK(gfl_frequency(st, p) == doctest::Approx(50.0).epsilon(1e-9));
}

TEST_CASE("PLL tracks a frequency offset with zero angle error") {
	const ConverterParams p;
	GflState st;
	double theta = 0.0;
	const double dt = 1e-3;
	for (int k = 0; k < 5000; ++k) {
		theta += kTwoPi * 0.1 * dt;
		st = gfl_pll_step(st, Phasor(1.0, theta), dt, p);
	}
	CHECK(gfl_frequency(st, p) == doctest::Approx(50.1).epsilon(1e-9));
	// theta_pll is already advanced by one step; the loop error is taken
	// against the next sample.
	const double next = theta + kTwoPi * 0.1 * dt;
	CHECK(std::abs(wrap_angle(next - st.theta_pll)) < 1e-9);
}

TEST_CASE("PLL with zero gains holds its state") {
	ConverterParams p;
	p.pll_kp = 0.0;
	p.pll_ki = 0.0;
	GflState st;
	st.theta_pll = 0.3;
	const auto next = gfl_pll_step(st, Phasor(1.0, 1.2), 1e-3, p);
	CHECK(next.theta_pll == st.theta_pll);
	CHECK(next.omega_pll == 0.0);
	CHECK(next.pll_integrator == 0.0);
}

TEST_CASE("PLL freezes on undervoltage") {
	const ConverterParams p;
	GflState st;
	st.theta_pll = 0.1;
	st.omega_pll = 2.0;
	const auto next = gfl_pll_step(st, Phasor(0.05, 1.0), 1e-3, p);
	CHECK(next.pll_frozen);
	CHECK(next.theta_pll == st.theta_pll);
	CHECK(next.omega_pll == st.omega_pll);
	CHECK_FALSE(gfl_pll_step(next, Phasor(1.0, 0.1), 1e-3, p).pll_frozen);
}

TEST_CASE("grid-following droop set-point") {
	ConverterParams p;
	GflState st;
	st.omega_pll = kTwoPi * 0.01;
	CHECK(gfl_droop_step(st, 1e-3, p).p_cmd == doctest::Approx(-14.4e3).epsilon(1e-12));

	p.deadband = 0.01;
	st.omega_pll = kTwoPi * 0.005;
	CHECK(gfl_droop_step(st, 1e-3, p).p_cmd == 0.0);

	CHECK(apply_deadband(0.015, 0.01) == doctest::Approx(0.005));
	CHECK(apply_deadband(-0.015, 0.01) == doctest::Approx(-0.005));
	CHECK(apply_deadband(0.01, 0.01) == 0.0);
}

TEST_CASE("current lag: first-order approach, identity in the fast limit") {
	ConverterParams p;
	GflState st;
	st.omega_pll = -kTwoPi * 0.05;
	const double target = 72e3;
	double elapsed = 0.0;
	while (st.p_out < 0.63212 * target) {
		st = gfl_droop_step(st, 1e-3, p);
		elapsed += 1e-3;
	}
	CHECK(elapsed == doctest::Approx(p.current_lag).epsilon(0.1));

	p.current_lag = 1e-4;
	GflState fast;
	fast.omega_pll = -kTwoPi * 0.05;
	fast = gfl_droop_step(fast, 1e-3, p);
	CHECK(fast.p_out == fast.p_cmd);
}

TEST_CASE("both controllers reach the same droop power") {
	const network::FeederModel feeder;
	const ConverterParams p;
	const double dt = 1e-3;
	GfrState gfr;
	GflState gfl;
	network::BusState a = network::solve_step(feeder, Phasor(1.0, 0.0), network::PowerSource{});
	network::BusState b = a;
	gfr.theta_c = a.v_pbc.angle;
	gfl.theta_pll = b.v_pbc.angle;
	double theta_s = 0.0;
	for (int k = 1; k <= 10000; ++k) {
		theta_s += kTwoPi * -0.05 * dt;
		gfr = gfr_step(gfr, a.p_bess, dt, p);
		a = network::solve_step(feeder, Phasor(1.0, theta_s), network::VoltageSource{1.0, gfr.theta_c}, &a);
		gfl = gfl_droop_step(gfl_pll_step(gfl, b.v_pbc, dt, p), dt, p);
		b = network::solve_step(feeder, Phasor(1.0, theta_s), network::PowerSource{gfl.p_out, 0.0}, &b);
	}
	CHECK(a.p_bess == doctest::Approx(72e3).epsilon(0.005));
	CHECK(b.p_bess == doctest::Approx(72e3).epsilon(0.005));
}

TEST_CASE("grid-forming response rises faster than grid-following") {
	const auto [t_gfr, t_gfl] = rise_times(-0.05);
	CHECK(t_gfr < 1.0);
	CHECK(t_gfr < t_gfl);
}

TEST_CASE("apply_limits: rating") {
	const ConverterParams p;
	const auto r = apply_limits(800e3, BessState{}, 1e-3, p);
	CHECK(r.p_actual == 720e3);
	CHECK(apply_limits(-800e3, BessState{}, 1e-3, p).p_actual == -720e3);
}

TEST_CASE("apply_limits: state of charge bounds") {
	const ConverterParams p;
	BessState empty{p.soc_min, 0.0};
	CHECK(apply_limits(10e3, empty, 1e-3, p).p_actual == 0.0);
	CHECK(apply_limits(-10e3, empty, 1e-3, p).p_actual == -10e3);
	BessState full{p.soc_max, 0.0};
	CHECK(apply_limits(-10e3, full, 1e-3, p).p_actual == 0.0);
	CHECK(apply_limits(10e3, full, 1e-3, p).p_actual == 10e3);
}

TEST_CASE("apply_limits: a full hour at 500 kW drains the full 500 kWh") {
	ConverterParams p;
	p.soc_min = 0.0;
	p.soc_max = 1.0;
	BessState bess{1.0, 0.0};
	const double dt = 1.0;
	for (int k = 0; k < 3600; ++k) {
		const auto r = apply_limits(500e3, bess, dt, p);
		bess = r.bess;
	}
	CHECK(bess.soc == doctest::Approx(0.0).epsilon(1e-9));
	CHECK(bess.soc >= 0.0);
	const auto after = apply_limits(500e3, bess, dt, p);
	CHECK(after.p_actual <= 1e-3);
	CHECK(after.bess.soc >= 0.0);
}

TEST_CASE("apply_limits is idempotent") {
	const ConverterParams p;
	std::mt19937_64 rng(23);
	std::uniform_real_distribution<double> power(-1.5e6, 1.5e6), soc(0.1, 0.9);
	for (int i = 0; i < 1000; ++i) {
		const BessState b{soc(rng), 0.0};
		const double dt = (i % 2) ? 1e-3 : 60.0;
		const auto once = apply_limits(power(rng), b, dt, p);
		const auto twice = apply_limits(once.p_actual, b, dt, p);
		CHECK(twice.p_actual == once.p_actual);
		CHECK(twice.bess.soc == once.bess.soc);
	}
}

TEST_CASE("state of charge follows the delivered-energy integral") {
	const ConverterParams p;
	std::mt19937_64 rng(29);
	std::normal_distribution<double> power(0.0, 300e3);
	BessState bess{0.5, 0.0};
	long double energy = 0.0L;
	const double dt = 1e-3;
	for (int k = 0; k < 600000; ++k) {
		const auto r = apply_limits(power(rng), bess, dt, p);
		energy += static_cast<long double>(r.p_actual) * dt;
		bess = r.bess;
	}
	const double expected = -static_cast<double>(energy / (3600.0L * p.e_cap));
	CHECK(std::abs((bess.soc - 0.5) - expected) <= 1e-9 * std::abs(expected));
}

TEST_CASE("parameter validation") {
	ConverterParams p;
	p.droop = 0.0;
	CHECK_THROWS_AS(p.validate(), InputError);
	p = ConverterParams{};
	p.soc_min = 0.95;
	CHECK_THROWS_AS(p.validate(), InputError);
	p = ConverterParams{};
	p.pll_kp = -1.0;
	CHECK_THROWS_AS(p.validate(), InputError);
}
