#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "feederlab/error.hpp"

namespace feederlab {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi].
double wrap_angle(double rad);

/// Positive-sequence phasor. The angle is kept unwrapped (radians relative to
/// the nominal rotating frame) so differences stay continuous.
struct Phasor {
	double magnitude = 1.0;
	double angle = 0.0;

	Phasor() = default;
	Phasor(double mag, double ang);
};

/// Per-unit bases for the three voltage zones of the feeder.
struct PerUnitBase {
	double s_base = 720e3;   // VA
	double v_slack = 50e3;   // V
	double v_pcc = 21e3;     // V
	double v_pbc = 0.3e3;    // V
	double f0 = 50.0;        // Hz

	void validate() const;

	double to_pu(double watts) const { return watts / s_base; }
	double to_watts(double pu) const { return pu * s_base; }
	/// Converts a reactance given on another power base to this system base.
	double rebase_impedance(double z_pu, double s_other) const { return z_pu * s_base / s_other; }
};

/// Uniformly sampled series; sample k sits at t0 + k*dt.
template <typename T>
struct TimeSeries {
	double t0 = 0.0;
	double dt = 1.0;
	std::vector<T> values;

	TimeSeries() = default;
	TimeSeries(double start, double step, std::vector<T> samples)
		: t0(start), dt(step), values(std::move(samples)) {
		if (!(dt > 0.0) || !std::isfinite(dt))
			throw InputError("time series step must be positive");
		if (values.empty())
			throw InputError("time series needs at least one sample");
	}

	std::size_t size() const { return values.size(); }
	double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
	double t_end() const { return time(values.size() - 1); }
	const T& operator[](std::size_t k) const { return values[k]; }
	T& operator[](std::size_t k) { return values[k]; }
};

using ScalarSeries = TimeSeries<double>;

/// Removes 2*pi jumps so that consecutive outputs differ by a value in (-pi, pi].
std::vector<double> unwrap_angles(std::span<const double> raw);

/// Forward difference: out[k] = in[k+1] - in[k]; t0 and dt are kept.
ScalarSeries diff(const ScalarSeries& series);

} // namespace feederlab
