#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "feederlab/engine.hpp"
#include "feederlab/kernels.hpp"

using namespace feederlab;
using namespace feederlab::engine;

namespace {

// Short run on a trace that sits at f0 + offset from the first step on.
Scenario held_frequency(Mode mode, double offset_hz) {
	Scenario s;
	s.mode = mode;
	s.duration = 30.0;
	s.baseline_begin = 1.0;
	s.baseline_end = 4.0;
	s.activation_time = 5.0;
	s.trace.synth.ramp_start = 0.0;
	s.trace.synth.ramp_duration = 0.0;
	s.trace.synth.ramp_magnitude = offset_hz;
	s.trace.synth.ou_sigma = 0.0;
	return s;
}

Scenario short_benchmark() {
	Scenario s;
	s.duration = 120.0;
	s.baseline_begin = 10.0;
	s.baseline_end = 40.0;
	s.activation_time = 45.0;
	s.trace.synth.ramp_start = 60.0;
	s.trace.synth.ramp_duration = 30.0;
	return s;
}

std::string slurp(const std::filesystem::path& p) {
	std::ifstream in(p, std::ios::binary);
	std::ostringstream os;
	os << in.rdbuf();
	return os.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
	const auto dir = std::filesystem::temp_directory_path() / ("feederlab_engine_" + name);
	std::filesystem::remove_all(dir);
	return dir;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
	return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

} // namespace

TEST_CASE("idle converter on a nominal grid has nothing to measure") {
	Scenario s = held_frequency(Mode::Off, 0.0);
	s.pmu.angle_noise_deg = 0.0;
	const auto art = run_scenario(s);
	CHECK(art.metrics.ifd == 0.0);
	CHECK(art.metrics.baseline.std < 1e-12);
	CHECK_FALSE(art.metrics.rrocof.has_value());
	CHECK_FALSE(art.metrics.rpadd.has_value());
	CHECK(art.metrics.rrocof_error == "no active samples");
	CHECK(art.metrics.rpadd_error == "no active samples");
	const auto& f = art.inputs.frames;
	const double d0 = f[1].front().theta - f[2].front().theta;
	for (std::size_t k = 0; k < f[1].size(); ++k)
		CHECK(f[1][k].theta - f[2][k].theta == doctest::Approx(d0).epsilon(1e-12));
	for (double p : art.telemetry.p_bess)
		CHECK(p == 0.0);
}

TEST_CASE("grid-forming droop at 49.95 Hz: 72 kW and the matching angle shift") {
	const auto art = run_scenario(held_frequency(Mode::Gfr, -0.05));
	const auto& tel = art.telemetry;
	const std::size_t last = tel.size() - 1;
	CHECK(tel.p_bess[last] == doctest::Approx(72e3).epsilon(0.005));
	// Angle difference relative to the zero-power baseline.
	const double spread = rad2deg(tel.theta_pcc[last] - tel.theta_pbc[last]);
	const double shift = spread - rad2deg(art.metrics.baseline.delta_theta0);
	CHECK(std::abs(shift) == doctest::Approx(72.0 * 0.006).epsilon(0.02));
	CHECK(shift < 0.0);
}

TEST_CASE("control starts at the activation step without a bump") {
	const auto art = run_scenario(held_frequency(Mode::Gfr, -0.05));
	const auto& tel = art.telemetry;
	const auto k_act = static_cast<std::size_t>(5.0 / tel.dt);
	CHECK_FALSE(tel.active[k_act - 1]);
	CHECK(tel.active[k_act]);
	for (std::size_t k = 0; k < k_act; ++k)
		CHECK(tel.p_bess[k] == 0.0);
	CHECK(std::abs(tel.p_bess[k_act]) < 10.0);
}

TEST_CASE("conservation over a benchmark-style run") {
	for (Mode m : {Mode::Gfr, Mode::Gfl}) {
		Scenario s = short_benchmark();
		s.mode = m;
		const auto art = run_scenario(s);
		CHECK(art.max_mismatch_pu < 1e-8);
		CHECK(art.max_balance_pu < 1e-8);
		const double moved = art.soc_initial - art.soc_from_energy;
		REQUIRE(moved != 0.0);
		CHECK(std::abs((art.soc_initial - art.soc_final) - moved) <= 1e-9 * std::abs(moved));
	}
}

TEST_CASE("identical scenarios give bit-identical artifacts") {
	const Scenario s = short_benchmark();
	const auto d1 = fresh_dir("det1");
	const auto d2 = fresh_dir("det2");
	kernels::set_threads(1);
	const auto a = run_scenario(s, d1);
	kernels::set_threads(4);
	const auto b = run_scenario(s, d2);
	REQUIRE(a.hash == b.hash);
	CHECK(same_bits(a.telemetry.p_bess, b.telemetry.p_bess));
	for (const auto& entry : std::filesystem::directory_iterator(d1 / a.hash)) {
		const auto name = entry.path().filename();
		CHECK_MESSAGE(slurp(entry.path()) == slurp(d2 / a.hash / name), name.string());
	}
}

TEST_CASE("artifacts carry the scenario hash") {
	const auto dir = fresh_dir("artifacts");
	const auto art = run_scenario(short_benchmark(), dir);
	const auto run = dir / art.hash;
	for (const char* name : {"pmu0.csv", "pmu1.csv", "pmu2.csv", "power.csv", "telemetry.csv", "rrocof.csv",
	                         "rrocof_cdf.csv", "rpadd.csv", "rpadd_cdf.csv"}) {
		std::ifstream in(run / name);
		REQUIRE_MESSAGE(in.good(), name);
		std::string first;
		std::getline(in, first);
		CHECK(first == "# scenario " + art.hash);
	}
	const auto config = nlohmann::json::parse(slurp(run / "config.json"));
	CHECK(config["scenario_hash"] == art.hash);
	CHECK(Scenario::from_json(config["scenario"]).hash() == art.hash);
	const auto summary = nlohmann::json::parse(slurp(run / "summary.json"));
	CHECK(summary["scenario_hash"] == art.hash);
}

TEST_CASE("metrics recomputed from the written files match the run") {
	const auto dir = fresh_dir("replay");
	const auto art = run_scenario(short_benchmark(), dir);
	const auto run = dir / art.hash;
	MetricInputs in = art.inputs;
	for (std::size_t i = 0; i < 3; ++i)
		in.frames[i] = pmu::read_frames(run / ("pmu" + std::to_string(i) + ".csv"));
	in.power = read_power(run / "power.csv", in.frames[1]);
	const auto m = evaluate_metrics(in);
	REQUIRE(m.rrocof.has_value());
	REQUIRE(m.rpadd.has_value());
	CHECK(same_bits(m.rrocof->value, art.metrics.rrocof->value));
	CHECK(same_bits(m.rpadd->value, art.metrics.rpadd->value));
	CHECK(m.ifd == art.metrics.ifd);
	CHECK(m.baseline.delta_theta0 == art.metrics.baseline.delta_theta0);
}

TEST_CASE("solver failure reports the time and state") {
	Scenario s = held_frequency(Mode::Gfl, 0.0);
	s.feeder.load_w = 50e6;
	try {
		run_scenario(s);
		FAIL("expected a solver error");
	} catch (const SolverError& e) {
		CHECK(std::string(e.what()).find("t=") != std::string::npos);
	}
}

TEST_CASE("comparison runs both modes on the same trace and seeds") {
	const auto dir = fresh_dir("compare");
	const Scenario base = short_benchmark();
	const auto c = run_comparison(base, dir);
	CHECK(c.gfr.scenario.mode == Mode::Gfr);
	CHECK(c.gfl.scenario.mode == Mode::Gfl);
	CHECK(c.gfr.telemetry.theta_slack == c.gfl.telemetry.theta_slack);
	CHECK(c.rrocof.grid_points == 99);
	CHECK(std::filesystem::exists(dir / ("compare-" + base.hash()) / "comparison.json"));
	CHECK(std::filesystem::exists(dir / c.gfr.hash / "summary.json"));
	CHECK(std::filesystem::exists(dir / c.gfl.hash / "summary.json"));
}

TEST_CASE("default benchmark reproduces the committed golden summary") {
	std::ifstream in(FEEDERLAB_GOLDEN);
	REQUIRE(in.good());
	const auto golden = nlohmann::json::parse(in);
	const auto c = run_comparison(Scenario{});
	auto check = [](double got, double want) { CHECK(std::abs(got - want) <= 1e-9 * std::abs(want)); };
	for (const auto& [name, run] : {std::pair{"gfr", &c.gfr}, std::pair{"gfl", &c.gfl}}) {
		const auto& g = golden[name];
		CHECK(run->hash == g["scenario_hash"].get<std::string>());
		check(run->metrics.rrocof_cdf->median(), g["rrocof_median"].get<double>());
		check(run->metrics.rpadd_cdf->median(), g["rpadd_median"].get<double>());
		check(run->metrics.baseline.delta_theta0, g["delta_theta0_rad"].get<double>());
		check(run->metrics.ifd, g["ifd_hz"].get<double>());
	}
	check(c.rrocof.fraction, golden["rrocof_dominance"].get<double>());
}
