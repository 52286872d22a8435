#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "feederlab/scenario.hpp"

using namespace feederlab;
using namespace feederlab::engine;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name, const std::string& body) {
	const auto path = std::filesystem::temp_directory_path() / ("feederlab_scenario_" + name);
	std::ofstream(path) << body;
	return path;
}

} // namespace

TEST_CASE("defaults describe the hour-transition benchmark") {
	const Scenario s;
	CHECK_NOTHROW(s.validate());
	CHECK(s.duration == 600.0);
	CHECK(s.activation_time == 250.0);
	CHECK(s.baseline_begin == 60.0);
	CHECK(s.baseline_end == 240.0);
	CHECK(s.trace.synth.ramp_start == 300.0);
	CHECK(s.trace.synth.ramp_magnitude == -0.05);
	CHECK(s.trace.synth.ramp_duration == 120.0);
	CHECK(s.steps() == 600000);
	const auto f = s.feeder_model();
	CHECK(f.x_t1 == doctest::Approx(0.0018));
	CHECK(f.load_p == 140e3);
}

TEST_CASE("resolved JSON round-trips and the hash follows the content") {
	Scenario s;
	s.mode = Mode::Gfl;
	s.converter.pll_kp = 1570.0;
	s.feeder.calibrate_deg_per_kw.reset();
	s.metrics.rpadd_denominator = metrics::PaddDenominator::Differenced;
	const Scenario back = Scenario::from_json(s.to_json());
	CHECK(back.to_json() == s.to_json());
	CHECK(back.hash() == s.hash());
	CHECK(s.hash().size() == 16);
	CHECK(s.hash() != Scenario().hash());
	CHECK(Scenario().hash() == Scenario().hash());
}

TEST_CASE("missing keys keep defaults") {
	const Scenario s = Scenario::from_json(json::parse(R"({"mode": "off", "converter": {"pll_ki": 1.0}})"));
	CHECK(s.mode == Mode::Off);
	CHECK(s.converter.pll_ki == 1.0);
	CHECK(s.converter.pll_kp == 157.0);
	CHECK(Scenario::from_json(json::object()).hash() == Scenario().hash());
}

TEST_CASE("unknown keys and bad values are rejected") {
	CHECK_THROWS_AS(Scenario::from_json(json::parse(R"({"durration_s": 10})")), InputError);
	CHECK_THROWS_AS(Scenario::from_json(json::parse(R"({"pmu": {"rate": 50}})")), InputError);
	CHECK_THROWS_AS(Scenario::from_json(json::parse(R"({"mode": "vsm"})")), InputError);
	CHECK_THROWS_AS(Scenario::from_json(json::parse(R"({"duration_s": "long"})")), InputError);
	CHECK_THROWS_AS(Scenario::from_json(json::parse(R"({"pmu": {"seeds": [1, 2]}})")), InputError);
	CHECK_THROWS_AS(Scenario::from_json(json::parse(R"({"trace": {"source": "file"}})")), InputError);
	CHECK_THROWS_AS(Scenario::from_json(json::parse(R"({"metrics": {"rpadd_denominator": "mean"}})")), InputError);
	CHECK_THROWS_AS(Scenario::from_json(json::parse("[1, 2]")), InputError);
}

TEST_CASE("scenario invariants") {
	Scenario s;
	s.baseline_end = 260.0;
	CHECK_THROWS_AS(s.validate(), InputError);
	s = Scenario{};
	s.dt_sim = 3e-3;
	CHECK_THROWS_AS(s.validate(), InputError);
	s = Scenario{};
	s.dt_sim = 0.0015;
	CHECK_THROWS_AS(s.validate(), InputError);
	s = Scenario{};
	s.soc_init = 0.95;
	CHECK_THROWS_AS(s.validate(), InputError);
	s = Scenario{};
	s.dt_sim = 5e-4;
	CHECK_NOTHROW(s.validate());
}

TEST_CASE("seed override") {
	Scenario s;
	s.override_seed(40);
	CHECK(s.trace.synth.seed == 40);
	CHECK(s.pmu.seeds == std::array<std::uint64_t, 3>{41, 42, 43});
}

TEST_CASE("load reads a file and reports parse errors") {
	const auto ok = scratch("ok.json", R"({"duration_s": 300, "activation_time_s": 250, "trace": {"ramp_start_s": 100}})");
	const Scenario s = Scenario::load(ok);
	CHECK(s.duration == 300.0);
	CHECK(s.trace.synth.ramp_start == 100.0);
	CHECK_THROWS_AS(Scenario::load(scratch("bad.json", "{not json")), InputError);
	CHECK_THROWS_AS(Scenario::load("/nonexistent/scenario.json"), InputError);
}

TEST_CASE("file trace source") {
	const Scenario s = Scenario::from_json(json::parse(
		R"({"trace": {"source": "file", "path": "rec.csv", "time_column": "t", "frequency_column": "f", "dt_s": 0.001}})"));
	CHECK(s.trace.kind == TraceSource::Kind::File);
	CHECK(s.trace.path == "rec.csv");
	CHECK(s.trace.columns.time == "t");
	CHECK(Scenario::from_json(s.to_json()).hash() == s.hash());
}
