#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "feederlab/foundation.hpp"

namespace feederlab::pmu {

enum class Location { Slack, Pcc, Pbc };

const char* to_string(Location loc);
Location location_from_string(const std::string& name);

struct PmuConfig {
	double reporting_rate = 50.0;   // frames/s
	double angle_noise_deg = 0.001; // 1-sigma
	std::uint64_t noise_seed = 0;
	Location location = Location::Pcc;

	void validate() const;
	double interval() const { return 1.0 / reporting_rate; }
};

struct PmuFrame {
	double t = 0.0;
	double v_mag = 0.0;
	double theta = 0.0; // rad, wrapped to (-pi, pi]
	double f = 50.0;    // Hz
	bool valid = false;
};

using FrameStream = std::vector<PmuFrame>;

/// Samples a simulated bus timeline at the reporting rate and adds Gaussian
/// angle noise. Frequencies are left unset (invalid) until estimate_frequency.
FrameStream sample(const TimeSeries<Phasor>& timeline, const PmuConfig& config);

/// First-difference frequency estimate; the first frame is marked invalid.
FrameStream estimate_frequency(FrameStream frames, double f0 = 50.0);

/// Rounds timestamps, magnitudes, angles (in degrees) and frequencies to the
/// CSV precision, i.e. the values a reader of the emitted file will see.
void quantize_measurements(FrameStream& frames);
void quantize_frequencies(FrameStream& frames);

void write_frames(const std::filesystem::path& path, const FrameStream& frames, const std::string& scenario_hash = {});
FrameStream read_frames(const std::filesystem::path& path);

/// Convenience views.
std::vector<double> thetas(const FrameStream& frames);
std::vector<double> frequencies(const FrameStream& frames);

} // namespace feederlab::pmu
