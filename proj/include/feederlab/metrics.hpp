#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "feederlab/foundation.hpp"
#include "feederlab/pmu.hpp"

namespace feederlab::metrics {

using pmu::FrameStream;

/// Retained samples of a ratio metric (rRoCoF in Hz/s/W, rPADD in deg/kW).
struct MetricSeries {
	std::vector<double> t;
	std::vector<double> value;
	std::size_t candidates = 0;
	double retained_fraction = 0.0;

	std::size_t size() const { return value.size(); }
};

struct Cdf {
	std::vector<double> values;        // nondecreasing
	std::vector<double> probabilities; // k/N, strictly increasing to 1

	/// Smallest sample whose cumulative probability reaches p.
	double quantile(double p) const;
	double median() const { return quantile(0.5); }
	/// Fraction of samples <= x.
	double operator()(double x) const;
};

/// Integral frequency deviation: sum over units and samples of |f - f0|.
double ifd(std::span<const FrameStream> streams, double f0 = 50.0);

/// Population standard deviation of the valid frequency samples.
double freq_std(const FrameStream& frames);

/// Zero-order hold of a uniformly sampled power series onto frame instants.
std::vector<double> align_power(const FrameStream& frames, const ScalarSeries& power);

/// Windowed relative RoCoF. `power` holds one value per frame (W).
MetricSeries rrocof(const FrameStream& freq_frames, std::span<const double> power, double window, double p_threshold);

/// Aligns a simulation-rate power series first.
MetricSeries rrocof(const FrameStream& freq_frames, const ScalarSeries& power, double window, double p_threshold);

struct Baseline {
	double delta_theta0 = 0.0; // rad
	double std = 0.0;          // rad, spread inside the window
	std::size_t count = 0;
};

/// Mean PMU1 - PMU2 angle difference over [t_begin, t_end]; the window must
/// close before the control activation.
Baseline baseline_angle(const FrameStream& pmu1, const FrameStream& pmu2, double t_begin, double t_end,
                        double activation_time);

enum class PaddDenominator {
	Instantaneous, // delivered power at sample k
	Differenced,   // P_k - P_{k-1}
};

PaddDenominator padd_denominator_from_string(const std::string& name);
const char* to_string(PaddDenominator d);

/// Relative phase angle difference deviation in deg/kW.
MetricSeries rpadd(const FrameStream& pmu1, const FrameStream& pmu2, std::span<const double> power,
                   double delta_theta0, double p_threshold,
                   PaddDenominator denominator = PaddDenominator::Instantaneous);

Cdf empirical_cdf(std::span<const double> samples);
inline Cdf empirical_cdf(const MetricSeries& s) { return empirical_cdf(s.value); }

std::vector<double> quantile_grid(std::size_t points = 99);

struct Dominance {
	double fraction = 0.0; // share of grid quantiles where a < b
	double median_a = 0.0;
	double median_b = 0.0;
	double median_ratio = 0.0; // median_a / median_b
	std::size_t grid_points = 0;
};

Dominance dominance_report(const Cdf& a, const Cdf& b, std::span<const double> grid);

void write_series(const std::filesystem::path& path, const MetricSeries& s, const std::string& scenario_hash = {});
void write_cdf(const std::filesystem::path& path, const Cdf& cdf, const std::string& scenario_hash = {});

} // namespace feederlab::metrics
