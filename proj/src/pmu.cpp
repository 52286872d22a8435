#include "feederlab/pmu.hpp"

#include <fstream>
#include <random>

#include "feederlab/csv.hpp"
#include "feederlab/kernels.hpp"

namespace feederlab::pmu {

const char* to_string(Location loc) {
	switch (loc) {
	case Location::Slack:
		return "slack";
	case Location::Pcc:
		return "pcc";
	case Location::Pbc:
		return "pbc";
	}
	return "?";
}

Location location_from_string(const std::string& name) {
	if (name == "slack")
		return Location::Slack;
	if (name == "pcc")
		return Location::Pcc;
	if (name == "pbc")
		return Location::Pbc;
	throw InputError("unknown PMU location '" + name + "'");
}

void PmuConfig::validate() const {
	if (!(reporting_rate > 0.0))
		throw InputError("PMU reporting rate must be positive");
	if (!(angle_noise_deg >= 0.0))
		throw InputError("PMU angle noise must be non-negative");
}

FrameStream sample(const TimeSeries<Phasor>& timeline, const PmuConfig& config) {
	config.validate();
	const double ratio = config.interval() / timeline.dt;
	const double stride_f = std::round(ratio);
	if (stride_f < 1.0 || std::abs(ratio - stride_f) > 1e-6 * ratio)
		throw InputError("simulation step must divide the PMU reporting interval");
	const auto stride = static_cast<std::size_t>(stride_f);

	std::mt19937_64 rng(config.noise_seed);
	std::normal_distribution<double> noise(0.0, deg2rad(config.angle_noise_deg));
	const bool noisy = config.angle_noise_deg > 0.0;

	FrameStream out;
	out.reserve(timeline.size() / stride + 1);
	for (std::size_t k = 0; k < timeline.size(); k += stride) {
		const Phasor& v = timeline[k];
		PmuFrame fr;
		fr.t = timeline.t0 + static_cast<double>(out.size()) * config.interval();
		fr.v_mag = v.magnitude;
		fr.theta = wrap_angle(v.angle + (noisy ? noise(rng) : 0.0));
		fr.f = 0.0;
		fr.valid = false;
		out.push_back(fr);
	}
	return out;
}

std::vector<double> thetas(const FrameStream& frames) {
	std::vector<double> v(frames.size());
	for (std::size_t k = 0; k < frames.size(); ++k)
		v[k] = frames[k].theta;
	return v;
}

std::vector<double> frequencies(const FrameStream& frames) {
	std::vector<double> v(frames.size());
	for (std::size_t k = 0; k < frames.size(); ++k)
		v[k] = frames[k].f;
	return v;
}

FrameStream estimate_frequency(FrameStream frames, double f0) {
	if (frames.size() < 2)
		throw InputError("estimate_frequency: need at least two frames");
	const std::vector<double> th = thetas(frames);
	std::vector<double> t(frames.size());
	for (std::size_t k = 0; k < frames.size(); ++k)
		t[k] = frames[k].t;
	std::vector<double> f(frames.size());
	kernels::parallel::frequency_from_angles(th, t, f0, f);
	for (std::size_t k = 0; k < frames.size(); ++k) {
		frames[k].f = f[k];
		frames[k].valid = k > 0;
	}
	return frames;
}

void quantize_measurements(FrameStream& frames) {
	for (auto& fr : frames) {
		fr.t = csv::quantize(fr.t);
		fr.v_mag = csv::quantize(fr.v_mag);
		fr.theta = deg2rad(csv::quantize(rad2deg(fr.theta)));
	}
}

void quantize_frequencies(FrameStream& frames) {
	for (auto& fr : frames)
		fr.f = csv::quantize(fr.f);
}

void write_frames(const std::filesystem::path& path, const FrameStream& frames, const std::string& scenario_hash) {
	std::ofstream os(path);
	if (!os)
		throw InputError("cannot write '" + path.string() + "'");
	csv::write_provenance(os, scenario_hash);
	os << "time_s,v_mag_pu,theta_deg,freq_hz,valid\n";
	for (const auto& fr : frames)
		os << csv::format(fr.t) << ',' << csv::format(fr.v_mag) << ',' << csv::format(rad2deg(fr.theta)) << ','
		   << csv::format(fr.f) << ',' << (fr.valid ? 1 : 0) << '\n';
}

FrameStream read_frames(const std::filesystem::path& path) {
	const csv::Table table = csv::read(path);
	const std::size_t ct = table.column("time_s");
	const std::size_t cv = table.column("v_mag_pu");
	const std::size_t ca = table.column("theta_deg");
	const std::size_t cf = table.column("freq_hz");
	const std::size_t cok = table.column("valid");
	FrameStream out;
	out.reserve(table.rows.size());
	for (std::size_t r = 0; r < table.rows.size(); ++r) {
		const auto& row = table.rows[r];
		const std::size_t line = table.line_numbers[r];
		PmuFrame fr;
		fr.t = csv::parse_double(row[ct], line);
		fr.v_mag = csv::parse_double(row[cv], line);
		fr.theta = deg2rad(csv::parse_double(row[ca], line));
		fr.f = csv::parse_double(row[cf], line);
		const std::string& ok = row[cok];
		if (ok == "1" || ok == "true")
			fr.valid = true;
		else if (ok == "0" || ok == "false")
			fr.valid = false;
		else
			throw InputError("line " + std::to_string(line) + ": valid must be 0 or 1");
		if (fr.valid && !(fr.f >= 45.0 && fr.f <= 55.0))
			throw InputError("line " + std::to_string(line) + ": frequency out of sanity bound");
		if (!out.empty() && !(fr.t > out.back().t))
			throw InputError("line " + std::to_string(line) + ": time column not strictly increasing");
		out.push_back(fr);
	}
	if (out.empty())
		throw InputError("'" + path.string() + "' has no frames");
	return out;
}

} // namespace feederlab::pmu
