#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "feederlab/foundation.hpp"

namespace feederlab::bulk {

/// Sanity band for any bulk-grid frequency sample, Hz.
inline constexpr double kMinFrequency = 45.0;
inline constexpr double kMaxFrequency = 55.0;

/// Uniformly sampled bulk-grid frequency (Hz).
struct FrequencyTrace {
	ScalarSeries hz;

	FrequencyTrace() = default;
	explicit FrequencyTrace(ScalarSeries series);

	std::size_t size() const { return hz.size(); }
	double dt() const { return hz.dt; }
};

/// Hour-transition ramp plus Ornstein-Uhlenbeck noise.
struct SynthParams {
	double duration = 600.0;       // s
	double dt = 1e-3;              // s, trace resolution
	double f0 = 50.0;              // Hz
	double ramp_start = 300.0;     // s
	double ramp_magnitude = -0.05; // Hz, signed
	double ramp_duration = 120.0;  // s
	double ou_sigma = 0.005;       // Hz, stationary std
	double ou_tau = 10.0;          // s
	std::uint64_t seed = 1;

	void validate() const;
};

struct ColumnMap {
	std::string time = "time_s";
	std::string frequency = "frequency_hz";
};

/// Loads a CSV trace and resamples it onto a uniform grid of step dt by
/// linear interpolation. Gaps of 10*dt or more are rejected.
FrequencyTrace load_trace(const std::filesystem::path& path, double dt, const ColumnMap& columns = {});

/// Deterministic for a given params value.
FrequencyTrace synthesize(const SynthParams& params);

/// Piecewise-linear ramp component of the synthetic trace at time t.
double ramp_offset(const SynthParams& params, double t);

/// Slack-bus angle drift relative to the nominal rotating frame, integrated
/// with the trapezoidal rule; zero at the first sample.
ScalarSeries slack_angle(const FrequencyTrace& trace, double f0 = 50.0);

/// Linear interpolation of the trace onto a new uniform grid [t0, t0 + n*dt).
FrequencyTrace resample(const FrequencyTrace& trace, double dt, std::size_t count);

void write_trace(const std::filesystem::path& path, const FrequencyTrace& trace, const std::string& scenario_hash = {});

} // namespace feederlab::bulk
