#include "feederlab/bulk_frequency.hpp"

#include <algorithm>
#include <fstream>
#include <random>

#include "feederlab/csv.hpp"

namespace feederlab::bulk {

namespace {

void check_band(double hz, const std::string& where) {
	if (!(hz >= kMinFrequency && hz <= kMaxFrequency))
		throw InputError(where + ": frequency " + csv::format(hz) + " Hz out of sanity bound [45, 55]");
}

} // namespace

FrequencyTrace::FrequencyTrace(ScalarSeries series) : hz(std::move(series)) {
	for (std::size_t k = 0; k < hz.size(); ++k)
		check_band(hz[k], "sample " + std::to_string(k));
}

void SynthParams::validate() const {
	if (!(duration > 0.0))
		throw InputError("synth: duration must be positive");
	if (!(dt > 0.0) || dt > duration)
		throw InputError("synth: dt must be in (0, duration]");
	if (!(ramp_start >= 0.0) || !(ramp_duration >= 0.0) || ramp_start + ramp_duration > duration)
		throw InputError("synth: ramp must lie within [0, duration]");
	if (!(ou_sigma >= 0.0))
		throw InputError("synth: ou_sigma must be non-negative");
	if (!(ou_tau > 0.0))
		throw InputError("synth: ou_tau must be positive");
	if (!(f0 > 0.0))
		throw InputError("synth: f0 must be positive");
}

double ramp_offset(const SynthParams& p, double t) {
	if (t <= p.ramp_start)
		return 0.0;
	if (p.ramp_duration <= 0.0 || t >= p.ramp_start + p.ramp_duration)
		return p.ramp_magnitude;
	return p.ramp_magnitude * (t - p.ramp_start) / p.ramp_duration;
}

FrequencyTrace synthesize(const SynthParams& p) {
	p.validate();
	const auto n = static_cast<std::size_t>(std::llround(p.duration / p.dt)) + 1;
	std::mt19937_64 rng(p.seed);
	std::normal_distribution<double> normal(0.0, 1.0);

	const double decay = std::exp(-p.dt / p.ou_tau);
	const double kick = p.ou_sigma * std::sqrt(1.0 - decay * decay);

	std::vector<double> f(n);
	double x = 0.0;
	for (std::size_t k = 0; k < n; ++k) {
		if (k > 0)
			x = x * decay + kick * normal(rng);
		const double t = static_cast<double>(k) * p.dt;
		f[k] = p.f0 + ramp_offset(p, t) + x;
	}
	return FrequencyTrace(ScalarSeries(0.0, p.dt, std::move(f)));
}

FrequencyTrace load_trace(const std::filesystem::path& path, double dt, const ColumnMap& columns) {
	if (!(dt > 0.0))
		throw InputError("load_trace: dt must be positive");
	const csv::Table table = csv::read(path);
	const std::size_t tc = table.column(columns.time);
	const std::size_t fc = table.column(columns.frequency);
	if (table.rows.empty())
		throw InputError("'" + path.string() + "' has no data rows");

	std::vector<double> ts, fs;
	ts.reserve(table.rows.size());
	fs.reserve(table.rows.size());
	for (std::size_t r = 0; r < table.rows.size(); ++r) {
		const std::size_t line = table.line_numbers[r];
		const double t = csv::parse_double(table.rows[r][tc], line);
		const double f = csv::parse_double(table.rows[r][fc], line);
		check_band(f, "line " + std::to_string(line));
		if (!std::isfinite(t))
			throw InputError("line " + std::to_string(line) + ": non-finite time");
		if (!ts.empty()) {
			if (!(t > ts.back()))
				throw InputError("line " + std::to_string(line) + ": time column not strictly increasing");
			if (t - ts.back() >= 10.0 * dt)
				throw InputError("line " + std::to_string(line) + ": gap of " + csv::format(t - ts.back()) +
				                 " s exceeds 10 resampling steps");
		}
		ts.push_back(t);
		fs.push_back(f);
	}

	const double span = ts.back() - ts.front();
	const auto n = static_cast<std::size_t>(std::floor(span / dt + 1e-9)) + 1;
	std::vector<double> out(n);
	std::size_t j = 0;
	for (std::size_t k = 0; k < n; ++k) {
		const double t = ts.front() + static_cast<double>(k) * dt;
		while (j + 2 < ts.size() && ts[j + 1] <= t)
			++j;
		if (ts.size() == 1) {
			out[k] = fs[0];
			continue;
		}
		const double w = std::clamp((t - ts[j]) / (ts[j + 1] - ts[j]), 0.0, 1.0);
		out[k] = fs[j] + w * (fs[j + 1] - fs[j]);
	}
	return FrequencyTrace(ScalarSeries(ts.front(), dt, std::move(out)));
}

ScalarSeries slack_angle(const FrequencyTrace& trace, double f0) {
	const auto& f = trace.hz;
	std::vector<double> theta(f.size());
	theta[0] = 0.0;
	for (std::size_t k = 1; k < f.size(); ++k)
		theta[k] = theta[k - 1] + kPi * ((f[k - 1] - f0) + (f[k] - f0)) * f.dt;
	return {f.t0, f.dt, std::move(theta)};
}

FrequencyTrace resample(const FrequencyTrace& trace, double dt, std::size_t count) {
	if (!(dt > 0.0) || count == 0)
		throw InputError("resample: invalid grid");
	const auto& src = trace.hz;
	if (dt == src.dt && count <= src.size()) {
		std::vector<double> head(src.values.begin(), src.values.begin() + static_cast<std::ptrdiff_t>(count));
		return FrequencyTrace(ScalarSeries(src.t0, dt, std::move(head)));
	}
	std::vector<double> out(count);
	const double last = static_cast<double>(src.size() - 1);
	for (std::size_t k = 0; k < count; ++k) {
		const double pos = std::min(static_cast<double>(k) * dt / src.dt, last);
		const auto i = static_cast<std::size_t>(pos);
		const double w = pos - static_cast<double>(i);
		out[k] = (i + 1 < src.size()) ? src[i] + w * (src[i + 1] - src[i]) : src[i];
	}
	return FrequencyTrace(ScalarSeries(src.t0, dt, std::move(out)));
}

void write_trace(const std::filesystem::path& path, const FrequencyTrace& trace, const std::string& scenario_hash) {
	std::ofstream os(path);
	if (!os)
		throw InputError("cannot write '" + path.string() + "'");
	csv::write_provenance(os, scenario_hash);
	os << "time_s,frequency_hz\n";
	for (std::size_t k = 0; k < trace.size(); ++k)
		os << csv::format(trace.hz.time(k)) << ',' << csv::format(trace.hz[k]) << '\n';
}

} // namespace feederlab::bulk
