#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "feederlab/metrics.hpp"
#include "feederlab/pmu.hpp"
#include "feederlab/scenario.hpp"

namespace feederlab::engine {

/// Per-step record of the simulation loop.
struct Telemetry {
	double dt = 1e-3;
	std::vector<double> theta_slack;
	std::vector<double> v_pcc, theta_pcc;
	std::vector<double> v_pbc, theta_pbc;
	std::vector<double> p_bess, p_g, p_slack;
	std::vector<double> freq_conv;  // f_c (GFR), f_pll (GFL), f0 when off
	std::vector<double> theta_conv; // theta_c (GFR), theta_pll (GFL)
	std::vector<double> soc;
	std::vector<double> mismatch_pu; // T2 flow vs injections
	std::vector<double> balance_pu;  // slack injection vs net load
	std::vector<std::uint8_t> active;

	std::size_t size() const { return p_bess.size(); }
	double time(std::size_t k) const { return static_cast<double>(k) * dt; }
};

/// Everything the metric layer needs; filled by a simulation run or by
/// reading PMU/power CSV files back.
struct MetricInputs {
	std::array<pmu::FrameStream, 3> frames; // PMU 0, 1, 2
	std::vector<double> power;              // W at frame instants
	double f0 = 50.0;
	double activation_time = 0.0;
	double baseline_begin = 0.0;
	double baseline_end = 0.0;
	MetricConfig config;
};

struct MetricOutcome {
	metrics::Baseline baseline;
	std::optional<metrics::MetricSeries> rrocof;
	std::optional<metrics::MetricSeries> rpadd;
	std::optional<metrics::Cdf> rrocof_cdf;
	std::optional<metrics::Cdf> rpadd_cdf;
	std::string rrocof_error;
	std::string rpadd_error;
	double ifd = 0.0;
	std::array<double, 3> freq_std{};
};

/// Metrics over the post-activation frames, with the baseline angle taken
/// from the pre-activation window.
MetricOutcome evaluate_metrics(const MetricInputs& in);

nlohmann::json metrics_summary(const MetricOutcome& m);

struct RunArtifacts {
	std::string hash;
	Scenario scenario;
	double x_t2 = 0.0; // pu, after calibration
	Telemetry telemetry;
	MetricInputs inputs;
	MetricOutcome metrics;
	double soc_initial = 0.0;
	double soc_final = 0.0;
	double soc_from_energy = 0.0; // soc_initial minus integrated delivered energy
	double max_mismatch_pu = 0.0;
	double max_balance_pu = 0.0;
	nlohmann::json summary;
};

/// Runs one scenario. When `out_dir` is set, artifacts go to out_dir/<hash>/.
RunArtifacts run_scenario(const Scenario& scenario, const std::optional<std::filesystem::path>& out_dir = std::nullopt);

struct Comparison {
	RunArtifacts gfr;
	RunArtifacts gfl;
	metrics::Dominance rrocof;
	std::optional<metrics::Dominance> rpadd;
	nlohmann::json report;
};

/// Runs the base scenario in GFR and GFL mode with identical trace and PMU
/// seeds, and compares the metric distributions (a = GFR, b = GFL).
Comparison run_comparison(const Scenario& base, const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// Writes the metric series/CDF files and summary.json into `dir`.
void write_metric_artifacts(const std::filesystem::path& dir, const MetricOutcome& m, const nlohmann::json& summary,
                            const std::string& hash);

/// Power samples at frame instants, as written to power.csv.
void write_power(const std::filesystem::path& path, const pmu::FrameStream& frames, const std::vector<double>& power,
                 const std::string& hash);
std::vector<double> read_power(const std::filesystem::path& path, const pmu::FrameStream& frames);

} // namespace feederlab::engine
