#include "feederlab/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace feederlab::engine {

using nlohmann::json;

const char* to_string(Mode m) {
	switch (m) {
	case Mode::Gfr:
		return "gfr";
	case Mode::Gfl:
		return "gfl";
	case Mode::Off:
		return "off";
	}
	return "?";
}

Mode mode_from_string(const std::string& name) {
	if (name == "gfr")
		return Mode::Gfr;
	if (name == "gfl")
		return Mode::Gfl;
	if (name == "off")
		return Mode::Off;
	throw InputError("unknown converter mode '" + name + "' (expected gfr, gfl or off)");
}

namespace {

// Reads the keys of one JSON object, rejecting anything not consumed.
class Reader {
public:
	Reader(const json& obj, std::string where) : mObj(obj), mWhere(std::move(where)) {
		if (!mObj.is_object())
			throw InputError(mWhere + ": expected a JSON object");
	}

	void finish() const {
		for (auto it = mObj.begin(); it != mObj.end(); ++it)
			if (!mSeen.count(it.key()))
				throw InputError(mWhere + ": unknown key '" + it.key() + "'");
	}

	const json* get(const std::string& key) {
		mSeen.insert(key);
		auto it = mObj.find(key);
		return it == mObj.end() ? nullptr : &*it;
	}

	void number(const std::string& key, double& out) {
		if (const json* v = get(key)) {
			if (!v->is_number())
				throw InputError(mWhere + "." + key + ": expected a number");
			out = v->get<double>();
		}
	}

	void unsigned_int(const std::string& key, std::uint64_t& out) {
		if (const json* v = get(key)) {
			if (!v->is_number_unsigned())
				throw InputError(mWhere + "." + key + ": expected a non-negative integer");
			out = v->get<std::uint64_t>();
		}
	}

	void size(const std::string& key, std::size_t& out) {
		std::uint64_t v = out;
		unsigned_int(key, v);
		out = static_cast<std::size_t>(v);
	}

	void string(const std::string& key, std::string& out) {
		if (const json* v = get(key)) {
			if (!v->is_string())
				throw InputError(mWhere + "." + key + ": expected a string");
			out = v->get<std::string>();
		}
	}

private:
	const json& mObj;
	std::string mWhere;
	std::set<std::string> mSeen;
};

void read_trace(const json& doc, TraceSource& tr) {
	Reader r(doc, "trace");
	std::string source = tr.kind == TraceSource::Kind::Synth ? "synth" : "file";
	r.string("source", source);
	if (source == "synth") {
		tr.kind = TraceSource::Kind::Synth;
		r.number("dt_s", tr.synth.dt);
		r.number("ramp_start_s", tr.synth.ramp_start);
		r.number("ramp_magnitude_hz", tr.synth.ramp_magnitude);
		r.number("ramp_duration_s", tr.synth.ramp_duration);
		r.number("ou_sigma_hz", tr.synth.ou_sigma);
		r.number("ou_tau_s", tr.synth.ou_tau);
		r.unsigned_int("seed", tr.synth.seed);
	} else if (source == "file") {
		tr.kind = TraceSource::Kind::File;
		std::string path;
		r.string("path", path);
		if (path.empty())
			throw InputError("trace.path is required for file traces");
		tr.path = path;
		r.string("time_column", tr.columns.time);
		r.string("frequency_column", tr.columns.frequency);
		r.number("dt_s", tr.file_dt);
	} else {
		throw InputError("trace.source must be 'synth' or 'file'");
	}
	r.finish();
}

void read_feeder(const json& doc, FeederConfig& fc) {
	Reader r(doc, "feeder");
	r.number("s_base_va", fc.s_base);
	r.number("x_t1_pu", fc.x_t1_pu);
	r.number("x_t1_rating_va", fc.x_t1_rating);
	r.number("x_t2_pu", fc.x_t2_pu);
	if (const json* v = r.get("calibrate_deg_per_kw")) {
		if (v->is_null())
			fc.calibrate_deg_per_kw.reset();
		else if (v->is_number())
			fc.calibrate_deg_per_kw = v->get<double>();
		else
			throw InputError("feeder.calibrate_deg_per_kw: expected a number or null");
	}
	r.number("x_coupling_pu", fc.x_coupling_pu);
	r.number("load_w", fc.load_w);
	r.number("pv_w", fc.pv_w);
	r.finish();
}

void read_converter(const json& doc, converter::ConverterParams& cp, double& soc_init) {
	Reader r(doc, "converter");
	r.number("s_rated_va", cp.s_rated);
	r.number("e_cap_wh", cp.e_cap);
	r.number("droop_w_per_hz", cp.droop);
	r.number("p0_w", cp.p0);
	r.number("gfr_filter_cutoff_rad_s", cp.gfr_filter_cutoff);
	r.number("gfr_e_mag_pu", cp.gfr_e_mag);
	r.number("pll_kp", cp.pll_kp);
	r.number("pll_ki", cp.pll_ki);
	r.number("current_lag_s", cp.current_lag);
	r.number("deadband_hz", cp.deadband);
	r.number("soc_min", cp.soc_min);
	r.number("soc_max", cp.soc_max);
	r.number("soc_init", soc_init);
	r.finish();
}

void read_pmu(const json& doc, PmuSetup& ps) {
	Reader r(doc, "pmu");
	r.number("reporting_rate_fps", ps.reporting_rate);
	r.number("angle_noise_deg", ps.angle_noise_deg);
	if (const json* v = r.get("seeds")) {
		if (!v->is_array() || v->size() != 3)
			throw InputError("pmu.seeds: expected three seeds (PMU 0, 1, 2)");
		for (std::size_t i = 0; i < 3; ++i) {
			if (!(*v)[i].is_number_unsigned())
				throw InputError("pmu.seeds: seeds must be non-negative integers");
			ps.seeds[i] = (*v)[i].get<std::uint64_t>();
		}
	}
	r.finish();
}

void read_metrics(const json& doc, MetricConfig& mc) {
	Reader r(doc, "metrics");
	r.number("rrocof_window_s", mc.rrocof_window);
	r.number("rrocof_threshold_w", mc.rrocof_threshold);
	r.number("rpadd_threshold_w", mc.rpadd_threshold);
	std::string den = metrics::to_string(mc.rpadd_denominator);
	r.string("rpadd_denominator", den);
	mc.rpadd_denominator = metrics::padd_denominator_from_string(den);
	r.size("quantile_points", mc.quantile_points);
	r.finish();
}

} // namespace

Scenario Scenario::from_json(const json& doc) {
	Scenario s;
	{
		Reader r(doc, "scenario");
		r.number("f0_hz", s.f0);
		r.number("duration_s", s.duration);
		r.number("dt_sim_s", s.dt_sim);
		r.number("activation_time_s", s.activation_time);
		if (const json* v = r.get("baseline_window_s")) {
			if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number())
				throw InputError("baseline_window_s: expected [begin, end]");
			s.baseline_begin = (*v)[0].get<double>();
			s.baseline_end = (*v)[1].get<double>();
		}
		std::string mode = to_string(s.mode);
		r.string("mode", mode);
		s.mode = mode_from_string(mode);
		if (const json* v = r.get("trace"))
			read_trace(*v, s.trace);
		if (const json* v = r.get("feeder"))
			read_feeder(*v, s.feeder);
		if (const json* v = r.get("converter"))
			read_converter(*v, s.converter, s.soc_init);
		if (const json* v = r.get("pmu"))
			read_pmu(*v, s.pmu);
		if (const json* v = r.get("metrics"))
			read_metrics(*v, s.metrics);
		if (const json* v = r.get("output")) {
			Reader o(*v, "output");
			o.size("telemetry_decimation", s.telemetry_decimation);
			o.finish();
		}
		r.finish();
	}
	s.validate();
	return s;
}

Scenario Scenario::load(const std::filesystem::path& path) {
	std::ifstream in(path);
	if (!in)
		throw InputError("cannot open config '" + path.string() + "'");
	json doc;
	try {
		doc = json::parse(in);
	} catch (const json::parse_error& e) {
		throw InputError("config '" + path.string() + "': " + e.what());
	}
	return from_json(doc);
}

json Scenario::to_json() const {
	json j;
	j["f0_hz"] = f0;
	j["duration_s"] = duration;
	j["dt_sim_s"] = dt_sim;
	j["activation_time_s"] = activation_time;
	j["baseline_window_s"] = {baseline_begin, baseline_end};
	j["mode"] = to_string(mode);
	if (trace.kind == TraceSource::Kind::Synth) {
		j["trace"] = {{"source", "synth"},
		              {"dt_s", trace.synth.dt},
		              {"ramp_start_s", trace.synth.ramp_start},
		              {"ramp_magnitude_hz", trace.synth.ramp_magnitude},
		              {"ramp_duration_s", trace.synth.ramp_duration},
		              {"ou_sigma_hz", trace.synth.ou_sigma},
		              {"ou_tau_s", trace.synth.ou_tau},
		              {"seed", trace.synth.seed}};
	} else {
		j["trace"] = {{"source", "file"},
		              {"path", trace.path.string()},
		              {"time_column", trace.columns.time},
		              {"frequency_column", trace.columns.frequency},
		              {"dt_s", trace.file_dt}};
	}
	j["feeder"] = {{"s_base_va", feeder.s_base},
	               {"x_t1_pu", feeder.x_t1_pu},
	               {"x_t1_rating_va", feeder.x_t1_rating},
	               {"x_t2_pu", feeder.x_t2_pu},
	               {"calibrate_deg_per_kw", feeder.calibrate_deg_per_kw ? json(*feeder.calibrate_deg_per_kw) : json(nullptr)},
	               {"x_coupling_pu", feeder.x_coupling_pu},
	               {"load_w", feeder.load_w},
	               {"pv_w", feeder.pv_w}};
	j["converter"] = {{"s_rated_va", converter.s_rated},
	                  {"e_cap_wh", converter.e_cap},
	                  {"droop_w_per_hz", converter.droop},
	                  {"p0_w", converter.p0},
	                  {"gfr_filter_cutoff_rad_s", converter.gfr_filter_cutoff},
	                  {"gfr_e_mag_pu", converter.gfr_e_mag},
	                  {"pll_kp", converter.pll_kp},
	                  {"pll_ki", converter.pll_ki},
	                  {"current_lag_s", converter.current_lag},
	                  {"deadband_hz", converter.deadband},
	                  {"soc_min", converter.soc_min},
	                  {"soc_max", converter.soc_max},
	                  {"soc_init", soc_init}};
	j["pmu"] = {{"reporting_rate_fps", pmu.reporting_rate},
	            {"angle_noise_deg", pmu.angle_noise_deg},
	            {"seeds", pmu.seeds}};
	j["metrics"] = {{"rrocof_window_s", metrics.rrocof_window},
	                {"rrocof_threshold_w", metrics.rrocof_threshold},
	                {"rpadd_threshold_w", metrics.rpadd_threshold},
	                {"rpadd_denominator", metrics::to_string(metrics.rpadd_denominator)},
	                {"quantile_points", metrics.quantile_points}};
	j["output"] = {{"telemetry_decimation", telemetry_decimation}};
	return j;
}

std::string Scenario::hash() const {
	const std::string text = to_json().dump();
	std::uint64_t h = 14695981039346656037ULL;
	for (unsigned char c : text) {
		h ^= c;
		h *= 1099511628211ULL;
	}
	char buf[17];
	std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
	return buf;
}

void Scenario::override_seed(std::uint64_t seed) {
	trace.synth.seed = seed;
	for (std::size_t i = 0; i < 3; ++i)
		pmu.seeds[i] = seed + 1 + i;
}

void Scenario::validate() const {
	if (!(f0 > 0.0))
		throw InputError("f0 must be positive");
	if (!(duration > 0.0))
		throw InputError("duration must be positive");
	if (!(dt_sim > 0.0) || dt_sim > converter::kMaxStep)
		throw InputError("dt_sim must be in (0, 2 ms]");
	const double ratio = 1.0 / (pmu.reporting_rate * dt_sim);
	if (std::abs(ratio - std::round(ratio)) > 1e-6 * ratio || std::round(ratio) < 1.0)
		throw InputError("dt_sim must divide the PMU reporting interval");
	if (!(baseline_begin <= baseline_end) || !(baseline_end < activation_time))
		throw InputError("baseline window must end before activation_time");
	if (baseline_begin < 0.0 || activation_time > duration)
		throw InputError("baseline and activation must lie within the run");
	if (trace.kind == TraceSource::Kind::Synth) {
		bulk::SynthParams p = trace.synth;
		p.duration = duration;
		p.f0 = f0;
		p.validate();
	}
	if (!(feeder.x_t1_rating > 0.0))
		throw InputError("feeder.x_t1_rating_va must be positive");
	if (feeder.calibrate_deg_per_kw && !(*feeder.calibrate_deg_per_kw > 0.0))
		throw InputError("feeder.calibrate_deg_per_kw must be positive");
	feeder_model().validate();
	converter.validate();
	if (!(soc_init >= converter.soc_min && soc_init <= converter.soc_max))
		throw InputError("soc_init must lie in [soc_min, soc_max]");
	if (!(pmu.angle_noise_deg >= 0.0))
		throw InputError("pmu.angle_noise_deg must be non-negative");
	if (!(metrics.rrocof_window > 0.0) || metrics.rrocof_threshold < 0.0 || metrics.rpadd_threshold < 0.0)
		throw InputError("metric window must be positive and thresholds non-negative");
	if (metrics.quantile_points == 0)
		throw InputError("metrics.quantile_points must be positive");
	if (telemetry_decimation == 0)
		throw InputError("output.telemetry_decimation must be positive");
}

network::FeederModel Scenario::feeder_model() const {
	network::FeederModel m;
	m.base.s_base = feeder.s_base;
	m.base.f0 = f0;
	m.x_t1 = m.base.rebase_impedance(feeder.x_t1_pu, feeder.x_t1_rating);
	m.x_t2 = feeder.x_t2_pu;
	m.x_coupling = feeder.x_coupling_pu;
	m.load_p = feeder.load_w;
	m.pv_p = feeder.pv_w;
	return m;
}

std::size_t Scenario::steps() const {
	return static_cast<std::size_t>(std::llround(duration / dt_sim));
}

} // namespace feederlab::engine
