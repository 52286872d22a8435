#include "feederlab/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>

#include "feederlab/csv.hpp"
#include "feederlab/kernels.hpp"

namespace feederlab::metrics {

namespace {

/// Slack when comparing frame timestamps against window edges, s.
constexpr double kTimeTolerance = 1e-9;

MetricSeries compact(const FrameStream& frames, std::size_t offset, std::span<const double> value,
                     std::span<const std::uint8_t> keep, std::size_t candidates) {
	MetricSeries s;
	s.candidates = candidates;
	for (std::size_t k = 0; k < value.size(); ++k) {
		if (!keep[k])
			continue;
		s.t.push_back(frames[k + offset].t);
		s.value.push_back(value[k]);
	}
	if (s.value.empty())
		throw NoActiveSamples();
	s.retained_fraction = static_cast<double>(s.value.size()) / static_cast<double>(candidates);
	return s;
}

double reporting_interval(const FrameStream& frames) {
	if (frames.size() < 2)
		throw InputError("need at least two frames");
	return frames[1].t - frames[0].t;
}

} // namespace

double Cdf::quantile(double p) const {
	if (values.empty())
		throw InputError("quantile of an empty CDF");
	auto it = std::lower_bound(probabilities.begin(), probabilities.end(), p);
	if (it == probabilities.end())
		return values.back();
	return values[static_cast<std::size_t>(it - probabilities.begin())];
}

double Cdf::operator()(double x) const {
	auto it = std::upper_bound(values.begin(), values.end(), x);
	if (it == values.begin())
		return 0.0;
	return probabilities[static_cast<std::size_t>(it - values.begin()) - 1];
}

double ifd(std::span<const FrameStream> streams, double f0) {
	if (streams.empty())
		throw InputError("ifd: no measurement units");
	const std::size_t n = streams.front().size();
	double total = 0.0;
	for (const auto& s : streams) {
		if (s.size() != n)
			throw InputError("ifd: streams have different lengths");
		for (const auto& fr : s)
			if (!fr.valid)
				throw InputError("ifd: stream contains invalid frames");
		const std::vector<double> f = pmu::frequencies(s);
		total += kernels::parallel::abs_deviation_sum(f, f0);
	}
	return total;
}

double freq_std(const FrameStream& frames) {
	std::vector<double> f;
	f.reserve(frames.size());
	for (const auto& fr : frames)
		if (fr.valid)
			f.push_back(fr.f);
	if (f.size() < 2)
		throw InputError("freq_std: need at least two valid frames");
	return std::sqrt(kernels::parallel::moments(f).variance);
}

std::vector<double> align_power(const FrameStream& frames, const ScalarSeries& power) {
	std::vector<double> out(frames.size());
	for (std::size_t k = 0; k < frames.size(); ++k) {
		const double pos = (frames[k].t - power.t0) / power.dt;
		if (pos < -1e-6)
			throw InputError("align_power: frame precedes the power series");
		auto i = static_cast<std::size_t>(std::floor(pos + 1e-6));
		out[k] = power[std::min(i, power.size() - 1)];
	}
	return out;
}

MetricSeries rrocof(const FrameStream& frames, std::span<const double> power, double window, double p_threshold) {
	if (power.size() != frames.size())
		throw InputError("rrocof: power and frequency streams are not aligned");
	const double interval = reporting_interval(frames);
	const double lag_f = std::round(window / interval);
	if (lag_f < 1.0 || std::abs(window - lag_f * interval) > 1e-6 * window)
		throw InputError("rrocof: window must be an integer multiple of the reporting interval");
	const auto lag = static_cast<std::size_t>(lag_f);
	if (frames.size() <= lag)
		throw NoActiveSamples();

	std::vector<double> f = pmu::frequencies(frames);
	std::vector<std::uint8_t> valid(frames.size());
	for (std::size_t k = 0; k < frames.size(); ++k)
		valid[k] = frames[k].valid ? 1 : 0;

	const std::size_t n = frames.size() - lag;
	std::vector<double> value(n);
	std::vector<std::uint8_t> keep(n);
	kernels::RocofIn in{f, power, valid, lag, window, p_threshold};
	kernels::parallel::rocof_ratios(in, {value, keep});

	std::size_t candidates = 0;
	for (std::size_t k = 0; k < n; ++k)
		candidates += (valid[k] && valid[k + lag]) ? 1 : 0;
	if (candidates == 0)
		throw NoActiveSamples();
	return compact(frames, lag, value, keep, candidates);
}

MetricSeries rrocof(const FrameStream& frames, const ScalarSeries& power, double window, double p_threshold) {
	const std::vector<double> aligned = align_power(frames, power);
	return rrocof(frames, aligned, window, p_threshold);
}

Baseline baseline_angle(const FrameStream& pmu1, const FrameStream& pmu2, double t_begin, double t_end,
                        double activation_time) {
	if (t_end >= activation_time)
		throw InputError("baseline window overlaps the control activation");
	if (!(t_begin <= t_end))
		throw InputError("baseline window is empty");
	if (pmu1.size() != pmu2.size())
		throw InputError("baseline: PMU streams are not aligned");
	std::vector<double> raw;
	for (std::size_t k = 0; k < pmu1.size(); ++k) {
		const double t = pmu1[k].t;
		if (t < t_begin - kTimeTolerance || t > t_end + kTimeTolerance)
			continue;
		raw.push_back(wrap_angle(pmu1[k].theta - pmu2[k].theta));
	}
	if (raw.size() < 10)
		throw InputError("baseline window needs at least 10 frame pairs");
	const std::vector<double> spread = unwrap_angles(raw);
	const kernels::Moments m = kernels::parallel::moments(spread);
	return {wrap_angle(m.mean), std::sqrt(m.variance), spread.size()};
}

PaddDenominator padd_denominator_from_string(const std::string& name) {
	if (name == "instantaneous")
		return PaddDenominator::Instantaneous;
	if (name == "differenced")
		return PaddDenominator::Differenced;
	throw InputError("unknown rPADD denominator '" + name + "'");
}

const char* to_string(PaddDenominator d) {
	return d == PaddDenominator::Instantaneous ? "instantaneous" : "differenced";
}

MetricSeries rpadd(const FrameStream& pmu1, const FrameStream& pmu2, std::span<const double> power,
                   double delta_theta0, double p_threshold, PaddDenominator denominator) {
	if (pmu1.size() != pmu2.size() || power.size() != pmu1.size())
		throw InputError("rpadd: streams are not aligned");
	if (pmu1.empty())
		throw NoActiveSamples();

	const std::size_t offset = denominator == PaddDenominator::Differenced ? 1 : 0;
	if (pmu1.size() <= offset)
		throw NoActiveSamples();
	const std::size_t n = pmu1.size() - offset;
	std::vector<double> th1(n), th2(n), den(n);
	for (std::size_t k = 0; k < n; ++k) {
		th1[k] = pmu1[k + offset].theta;
		th2[k] = pmu2[k + offset].theta;
		den[k] = offset ? power[k + 1] - power[k] : power[k];
	}
	std::vector<double> value(n);
	std::vector<std::uint8_t> keep(n);
	kernels::PaddIn in{th1, th2, den, delta_theta0, p_threshold};
	kernels::parallel::padd_ratios(in, {value, keep});
	return compact(pmu1, offset, value, keep, n);
}

Cdf empirical_cdf(std::span<const double> samples) {
	if (samples.empty())
		throw InputError("empirical_cdf: no samples");
	Cdf c;
	c.values.assign(samples.begin(), samples.end());
	std::sort(c.values.begin(), c.values.end());
	const double n = static_cast<double>(c.values.size());
	c.probabilities.resize(c.values.size());
	for (std::size_t k = 0; k < c.values.size(); ++k)
		c.probabilities[k] = static_cast<double>(k + 1) / n;
	return c;
}

std::vector<double> quantile_grid(std::size_t points) {
	std::vector<double> g(points);
	for (std::size_t i = 0; i < points; ++i)
		g[i] = static_cast<double>(i + 1) / static_cast<double>(points + 1);
	return g;
}

Dominance dominance_report(const Cdf& a, const Cdf& b, std::span<const double> grid) {
	if (a.values.empty() || b.values.empty())
		throw InputError("dominance_report: empty CDF");
	Dominance d;
	std::size_t wins = 0;
	for (double p : grid)
		wins += a.quantile(p) < b.quantile(p) ? 1 : 0;
	d.grid_points = grid.size();
	d.fraction = grid.empty() ? 0.0 : static_cast<double>(wins) / static_cast<double>(grid.size());
	d.median_a = a.median();
	d.median_b = b.median();
	d.median_ratio = d.median_a / d.median_b;
	return d;
}

void write_series(const std::filesystem::path& path, const MetricSeries& s, const std::string& scenario_hash) {
	std::ofstream os(path);
	if (!os)
		throw InputError("cannot write '" + path.string() + "'");
	csv::write_provenance(os, scenario_hash);
	os << "time_s,value\n";
	for (std::size_t k = 0; k < s.size(); ++k)
		os << csv::format(s.t[k]) << ',' << csv::format(s.value[k]) << '\n';
}

void write_cdf(const std::filesystem::path& path, const Cdf& cdf, const std::string& scenario_hash) {
	std::ofstream os(path);
	if (!os)
		throw InputError("cannot write '" + path.string() + "'");
	csv::write_provenance(os, scenario_hash);
	os << "value,probability\n";
	for (std::size_t k = 0; k < cdf.values.size(); ++k)
		os << csv::format(cdf.values[k]) << ',' << csv::format(cdf.probabilities[k]) << '\n';
}

} // namespace feederlab::metrics
