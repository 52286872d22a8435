#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "feederlab/bulk_frequency.hpp"
#include "feederlab/converter.hpp"
#include "feederlab/metrics.hpp"
#include "feederlab/network.hpp"

namespace feederlab::engine {

enum class Mode { Gfr, Gfl, Off };

const char* to_string(Mode m);
Mode mode_from_string(const std::string& name);

struct TraceSource {
	enum class Kind { Synth, File };
	Kind kind = Kind::Synth;
	bulk::SynthParams synth;      // synth.duration follows the scenario
	std::filesystem::path path;   // Kind::File
	bulk::ColumnMap columns;      // Kind::File
	double file_dt = 1e-3;        // resampling step for Kind::File
};

struct FeederConfig {
	double s_base = 720e3;
	double x_t1_pu = 0.05;      // on x_t1_rating
	double x_t1_rating = 20e6;  // VA
	double x_t2_pu = 0.0754;    // used when calibrate_deg_per_kw is unset
	std::optional<double> calibrate_deg_per_kw = 0.006;
	double x_coupling_pu = 0.1;
	double load_w = 140e3;
	double pv_w = 0.0;
};

struct PmuSetup {
	double reporting_rate = 50.0;
	double angle_noise_deg = 0.001;
	std::array<std::uint64_t, 3> seeds{101, 102, 103}; // PMU 0 (slack), 1 (PCC), 2 (PBC)
};

struct MetricConfig {
	double rrocof_window = 0.06;
	double rrocof_threshold = 1e3;
	double rpadd_threshold = 5e3;
	metrics::PaddDenominator rpadd_denominator = metrics::PaddDenominator::Instantaneous;
	std::size_t quantile_points = 99;
};

/// One fully specified, seeded simulation run.
struct Scenario {
	double f0 = 50.0;
	double duration = 600.0;
	double dt_sim = 1e-3;
	double activation_time = 250.0;
	double baseline_begin = 60.0;
	double baseline_end = 240.0;
	Mode mode = Mode::Gfr;
	TraceSource trace;
	FeederConfig feeder;
	converter::ConverterParams converter;
	double soc_init = 0.5;
	PmuSetup pmu;
	MetricConfig metrics;
	std::size_t telemetry_decimation = 20;

	void validate() const;

	/// Resolved configuration, every default made explicit.
	nlohmann::json to_json() const;

	/// Missing keys keep their defaults; unknown keys are rejected.
	static Scenario from_json(const nlohmann::json& doc);
	static Scenario load(const std::filesystem::path& path);

	/// 64-bit FNV-1a of the resolved configuration, as 16 hex digits.
	std::string hash() const;

	/// Sets the trace seed to `seed` and the PMU noise seeds to seed+1..seed+3.
	void override_seed(std::uint64_t seed);

	network::FeederModel feeder_model() const;
	std::size_t steps() const;
};

} // namespace feederlab::engine
