#include "feederlab/engine.hpp"

#include <fstream>
#include <future>
#include <sstream>

#include "feederlab/bulk_frequency.hpp"
#include "feederlab/converter.hpp"
#include "feederlab/csv.hpp"
#include "feederlab/network.hpp"

namespace feederlab::engine {

using nlohmann::json;

namespace {

/// Power-balance tolerance asserted at every recorded step (pu).
constexpr double kBalanceTolerance = 1e-8;

bulk::FrequencyTrace build_trace(const Scenario& sc, std::size_t steps) {
	bulk::FrequencyTrace raw;
	if (sc.trace.kind == TraceSource::Kind::Synth) {
		bulk::SynthParams p = sc.trace.synth;
		p.duration = sc.duration;
		p.f0 = sc.f0;
		raw = bulk::synthesize(p);
	} else {
		raw = bulk::load_trace(sc.trace.path, sc.trace.file_dt, sc.trace.columns);
		if (raw.hz.t_end() - raw.hz.t0 < sc.duration - sc.dt_sim - 1e-9)
			throw InputError("frequency trace shorter than the scenario duration");
	}
	return bulk::resample(raw, sc.dt_sim, steps);
}

std::string state_dump(double t, const network::BusState& prev, const converter::GfrState& gfr,
                       const converter::GflState& gfl) {
	std::ostringstream os;
	os << "t=" << csv::format(t) << " s; last state: p_bess=" << csv::format(prev.p_bess)
	   << " W, theta_pcc=" << csv::format(prev.v_pcc.angle) << " rad, theta_pbc=" << csv::format(prev.v_pbc.angle)
	   << " rad, theta_c=" << csv::format(gfr.theta_c) << " rad, theta_pll=" << csv::format(gfl.theta_pll)
	   << " rad, p_out=" << csv::format(gfl.p_out) << " W";
	return os.str();
}

pmu::FrameStream tail_from(const pmu::FrameStream& frames, double t_begin) {
	pmu::FrameStream out;
	for (const auto& fr : frames)
		if (fr.t >= t_begin - 1e-9)
			out.push_back(fr);
	return out;
}

json series_summary(const std::optional<metrics::MetricSeries>& s, const std::optional<metrics::Cdf>& cdf,
                    const std::string& error) {
	json j;
	if (s) {
		j["median"] = cdf->median();
		j["p10"] = cdf->quantile(0.1);
		j["p90"] = cdf->quantile(0.9);
		j["samples"] = s->size();
		j["candidates"] = s->candidates;
		j["retained_fraction"] = s->retained_fraction;
		j["error"] = nullptr;
	} else {
		j["median"] = nullptr;
		j["samples"] = 0;
		j["retained_fraction"] = 0.0;
		j["error"] = error;
	}
	return j;
}

void write_json(const std::filesystem::path& path, const json& doc) {
	std::ofstream os(path);
	if (!os)
		throw InputError("cannot write '" + path.string() + "'");
	os << doc.dump(2) << '\n';
}

void write_telemetry(const std::filesystem::path& path, const Telemetry& tel, std::size_t every,
                     const std::string& hash) {
	std::ofstream os(path);
	if (!os)
		throw InputError("cannot write '" + path.string() + "'");
	csv::write_provenance(os, hash);
	os << "time_s,theta_slack_rad,v_pcc_pu,theta_pcc_rad,v_pbc_pu,theta_pbc_rad,p_bess_w,p_g_w,p_slack_w,"
	      "freq_conv_hz,theta_conv_rad,soc,mismatch_pu,active\n";
	using csv::format;
	for (std::size_t k = 0; k < tel.size(); k += every) {
		os << format(tel.time(k)) << ',' << format(tel.theta_slack[k]) << ',' << format(tel.v_pcc[k]) << ','
		   << format(tel.theta_pcc[k]) << ',' << format(tel.v_pbc[k]) << ',' << format(tel.theta_pbc[k]) << ','
		   << format(tel.p_bess[k]) << ',' << format(tel.p_g[k]) << ',' << format(tel.p_slack[k]) << ','
		   << format(tel.freq_conv[k]) << ',' << format(tel.theta_conv[k]) << ',' << format(tel.soc[k]) << ','
		   << format(tel.mismatch_pu[k]) << ',' << int(tel.active[k]) << '\n';
	}
}

} // namespace

MetricOutcome evaluate_metrics(const MetricInputs& in) {
	MetricOutcome out;
	const auto& cfg = in.config;

	out.baseline = metrics::baseline_angle(in.frames[1], in.frames[2], in.baseline_begin, in.baseline_end,
	                                       in.activation_time);

	std::array<pmu::FrameStream, 3> post;
	for (std::size_t i = 0; i < 3; ++i)
		post[i] = tail_from(in.frames[i], in.activation_time);
	const std::size_t skip = in.frames[1].size() - post[1].size();
	std::vector<double> power(in.power.begin() + static_cast<std::ptrdiff_t>(skip), in.power.end());

	std::array<pmu::FrameStream, 3> valid;
	for (std::size_t i = 0; i < 3; ++i) {
		for (const auto& fr : post[i])
			if (fr.valid)
				valid[i].push_back(fr);
		out.freq_std[i] = valid[i].size() >= 2 ? metrics::freq_std(valid[i]) : 0.0;
	}
	out.ifd = metrics::ifd(valid, in.f0);

	try {
		out.rrocof = metrics::rrocof(post[1], power, cfg.rrocof_window, cfg.rrocof_threshold);
		out.rrocof_cdf = metrics::empirical_cdf(*out.rrocof);
	} catch (const NoActiveSamples& e) {
		out.rrocof_error = e.what();
	}
	try {
		out.rpadd = metrics::rpadd(post[1], post[2], power, out.baseline.delta_theta0, cfg.rpadd_threshold,
		                           cfg.rpadd_denominator);
		out.rpadd_cdf = metrics::empirical_cdf(*out.rpadd);
	} catch (const NoActiveSamples& e) {
		out.rpadd_error = e.what();
	}
	return out;
}

json metrics_summary(const MetricOutcome& m) {
	json j;
	j["delta_theta0_deg"] = rad2deg(m.baseline.delta_theta0);
	j["delta_theta0_std_deg"] = rad2deg(m.baseline.std);
	j["baseline_frames"] = m.baseline.count;
	j["ifd_hz"] = m.ifd;
	j["freq_std_hz"] = m.freq_std;
	j["rrocof_hz_per_s_per_w"] = series_summary(m.rrocof, m.rrocof_cdf, m.rrocof_error);
	j["rpadd_deg_per_kw"] = series_summary(m.rpadd, m.rpadd_cdf, m.rpadd_error);
	return j;
}

void write_metric_artifacts(const std::filesystem::path& dir, const MetricOutcome& m, const json& summary,
                            const std::string& hash) {
	std::filesystem::create_directories(dir);
	if (m.rrocof) {
		metrics::write_series(dir / "rrocof.csv", *m.rrocof, hash);
		metrics::write_cdf(dir / "rrocof_cdf.csv", *m.rrocof_cdf, hash);
	}
	if (m.rpadd) {
		metrics::write_series(dir / "rpadd.csv", *m.rpadd, hash);
		metrics::write_cdf(dir / "rpadd_cdf.csv", *m.rpadd_cdf, hash);
	}
	write_json(dir / "summary.json", summary);
}

void write_power(const std::filesystem::path& path, const pmu::FrameStream& frames, const std::vector<double>& power,
                 const std::string& hash) {
	std::ofstream os(path);
	if (!os)
		throw InputError("cannot write '" + path.string() + "'");
	csv::write_provenance(os, hash);
	os << "time_s,p_bess_w\n";
	for (std::size_t k = 0; k < frames.size(); ++k)
		os << csv::format(frames[k].t) << ',' << csv::format(power[k]) << '\n';
}

std::vector<double> read_power(const std::filesystem::path& path, const pmu::FrameStream& frames) {
	const csv::Table table = csv::read(path);
	const std::size_t ct = table.column("time_s");
	const std::size_t cp = table.column("p_bess_w");
	std::vector<double> t, p;
	for (std::size_t r = 0; r < table.rows.size(); ++r) {
		t.push_back(csv::parse_double(table.rows[r][ct], table.line_numbers[r]));
		p.push_back(csv::parse_double(table.rows[r][cp], table.line_numbers[r]));
	}
	if (t.empty())
		throw InputError("'" + path.string() + "' has no power samples");
	// Zero-order hold onto the frame instants.
	std::vector<double> out(frames.size());
	std::size_t j = 0;
	for (std::size_t k = 0; k < frames.size(); ++k) {
		while (j + 1 < t.size() && t[j + 1] <= frames[k].t + 1e-9)
			++j;
		if (t[j] > frames[k].t + 1e-9)
			throw InputError("power series starts after the first PMU frame");
		out[k] = p[j];
	}
	return out;
}

RunArtifacts run_scenario(const Scenario& scenario, const std::optional<std::filesystem::path>& out_dir) {
	scenario.validate();
	RunArtifacts art;
	art.scenario = scenario;
	art.hash = scenario.hash();
	const Scenario& sc = art.scenario;

	const std::size_t n = sc.steps();
	const double dt = sc.dt_sim;
	const bulk::FrequencyTrace trace = build_trace(sc, n);
	const ScalarSeries theta_slack = bulk::slack_angle(trace, sc.f0);

	network::FeederModel feeder = sc.feeder_model();
	if (sc.feeder.calibrate_deg_per_kw)
		feeder.x_t2 = network::calibrate_sensitivity(feeder, *sc.feeder.calibrate_deg_per_kw);
	art.x_t2 = feeder.x_t2;

	converter::ConverterParams cp = sc.converter;
	cp.f0 = sc.f0;
	const auto k_act = static_cast<std::size_t>(std::ceil(sc.activation_time / dt - 1e-9));

	Telemetry& tel = art.telemetry;
	tel.dt = dt;
	for (auto* v : {&tel.theta_slack, &tel.v_pcc, &tel.theta_pcc, &tel.v_pbc, &tel.theta_pbc, &tel.p_bess, &tel.p_g,
	                &tel.p_slack, &tel.freq_conv, &tel.theta_conv, &tel.soc, &tel.mismatch_pu, &tel.balance_pu})
		v->reserve(n);
	tel.active.reserve(n);

	converter::GfrState gfr;
	converter::GflState gfl;
	converter::BessState bess{sc.soc_init, 0.0};
	long double energy_soc = 0.0L; // integral of p dt / (3600 e_cap)
	std::size_t saturated = 0;

	network::BusState prev;
	try {
		prev = network::solve_step(feeder, Phasor(1.0, theta_slack[0]), network::PowerSource{0.0, 0.0});
	} catch (const SolverError& e) {
		throw SolverError(std::string(e.what()) + " at initialisation, t=0 s", e.residual());
	}
	gfr.theta_c = prev.v_pbc.angle;
	gfl.theta_pll = prev.v_pbc.angle;

	for (std::size_t k = 0; k < n; ++k) {
		const double t = static_cast<double>(k) * dt;
		const Phasor slack(1.0, theta_slack[k]);
		const bool active = sc.mode != Mode::Off && k >= k_act;

		network::ConverterBoundary boundary = network::PowerSource{0.0, 0.0};
		double p_booked = 0.0;
		switch (sc.mode) {
		case Mode::Gfr:
			if (active) {
				if (k == k_act && k > 0)
					gfr.theta_c += theta_slack[k] - theta_slack[k - 1]; // keep the held angle on the moving grid
				gfr = converter::gfr_step(gfr, prev.p_bess, dt, cp);
				boundary = network::VoltageSource{cp.gfr_e_mag, gfr.theta_c};
			}
			break;
		case Mode::Gfl:
			gfl = converter::gfl_pll_step(gfl, prev.v_pbc, dt, cp);
			if (active) {
				gfl = converter::gfl_droop_step(gfl, dt, cp);
				const auto lim = converter::apply_limits(gfl.p_out, bess, dt, cp);
				gfl.p_out = lim.p_actual;
				bess = lim.bess;
				p_booked = lim.p_actual;
			} else {
				gfl.p_out = 0.0;
				gfl.p_cmd = 0.0;
			}
			boundary = network::PowerSource{gfl.p_out, 0.0};
			break;
		case Mode::Off:
			break;
		}

		network::BusState st;
		try {
			st = network::solve_step(feeder, slack, boundary, &prev);
		} catch (const SolverError& e) {
			throw SolverError(std::string(e.what()) + " at " + state_dump(t, prev, gfr, gfl), e.residual());
		}

		if (sc.mode == Mode::Gfr) {
			if (!active) {
				// Bumpless hold: the idle converter tracks the PBC angle.
				gfr.theta_c = st.v_pbc.angle;
			} else {
				const auto lim = converter::apply_limits(st.p_bess, bess, dt, cp);
				saturated += lim.p_actual != st.p_bess ? 1 : 0;
				bess = lim.bess;
				p_booked = lim.p_actual;
			}
		}
		energy_soc += static_cast<long double>(p_booked) * dt / (3600.0L * cp.e_cap);

		const double balance = std::abs(st.p_slack + st.p_bess + feeder.pv_p - feeder.load_p) / feeder.base.s_base;
		if (!(st.mismatch_pu < kBalanceTolerance) || !(balance < kBalanceTolerance))
			throw Error("power balance violated at t=" + csv::format(t) + " s");

		tel.theta_slack.push_back(theta_slack[k]);
		tel.v_pcc.push_back(st.v_pcc.magnitude);
		tel.theta_pcc.push_back(st.v_pcc.angle);
		tel.v_pbc.push_back(st.v_pbc.magnitude);
		tel.theta_pbc.push_back(st.v_pbc.angle);
		tel.p_bess.push_back(st.p_bess);
		tel.p_g.push_back(st.p_g);
		tel.p_slack.push_back(st.p_slack);
		switch (sc.mode) {
		case Mode::Gfr:
			tel.freq_conv.push_back(active ? converter::gfr_frequency(gfr, cp) : sc.f0);
			tel.theta_conv.push_back(gfr.theta_c);
			break;
		case Mode::Gfl:
			tel.freq_conv.push_back(converter::gfl_frequency(gfl, cp));
			tel.theta_conv.push_back(gfl.theta_pll);
			break;
		case Mode::Off:
			tel.freq_conv.push_back(sc.f0);
			tel.theta_conv.push_back(0.0);
			break;
		}
		tel.soc.push_back(bess.soc);
		tel.mismatch_pu.push_back(st.mismatch_pu);
		tel.balance_pu.push_back(balance);
		tel.active.push_back(active ? 1 : 0);
		art.max_mismatch_pu = std::max(art.max_mismatch_pu, st.mismatch_pu);
		art.max_balance_pu = std::max(art.max_balance_pu, balance);
		prev = st;
	}
	art.soc_initial = sc.soc_init;
	art.soc_final = bess.soc;
	art.soc_from_energy = static_cast<double>(static_cast<long double>(sc.soc_init) - energy_soc);

	// PMU chain: sample, emit at CSV precision, estimate frequency.
	std::array<TimeSeries<Phasor>, 3> buses;
	for (auto& b : buses) {
		b.t0 = 0.0;
		b.dt = dt;
		b.values.resize(n);
	}
	for (std::size_t k = 0; k < n; ++k) {
		buses[0].values[k] = Phasor(1.0, tel.theta_slack[k]);
		buses[1].values[k] = Phasor(tel.v_pcc[k], tel.theta_pcc[k]);
		buses[2].values[k] = Phasor(tel.v_pbc[k], tel.theta_pbc[k]);
	}
	constexpr std::array<pmu::Location, 3> kLocations{pmu::Location::Slack, pmu::Location::Pcc, pmu::Location::Pbc};
	MetricInputs& in = art.inputs;
	for (std::size_t i = 0; i < 3; ++i) {
		pmu::PmuConfig pc{sc.pmu.reporting_rate, sc.pmu.angle_noise_deg, sc.pmu.seeds[i], kLocations[i]};
		pmu::FrameStream fr = pmu::sample(buses[i], pc);
		pmu::quantize_measurements(fr);
		fr = pmu::estimate_frequency(std::move(fr), sc.f0);
		pmu::quantize_frequencies(fr);
		in.frames[i] = std::move(fr);
	}
	in.power = metrics::align_power(in.frames[1], ScalarSeries(0.0, dt, tel.p_bess));
	for (double& p : in.power)
		p = csv::quantize(p);
	in.f0 = sc.f0;
	in.activation_time = sc.activation_time;
	in.baseline_begin = sc.baseline_begin;
	in.baseline_end = sc.baseline_end;
	in.config = sc.metrics;

	art.metrics = evaluate_metrics(in);

	json& s = art.summary;
	s["scenario_hash"] = art.hash;
	s["mode"] = to_string(sc.mode);
	s["x_t2_pu"] = art.x_t2;
	s["steps"] = n;
	s["max_mismatch_pu"] = art.max_mismatch_pu;
	s["max_balance_pu"] = art.max_balance_pu;
	s["soc"] = {{"initial", art.soc_initial},
	            {"final", art.soc_final},
	            {"from_energy_integral", art.soc_from_energy},
	            {"saturated_steps", saturated}};
	s["metrics"] = metrics_summary(art.metrics);

	if (out_dir) {
		const std::filesystem::path dir = *out_dir / art.hash;
		std::filesystem::create_directories(dir);
		write_json(dir / "config.json", json{{"scenario_hash", art.hash}, {"scenario", sc.to_json()}});
		for (std::size_t i = 0; i < 3; ++i)
			pmu::write_frames(dir / ("pmu" + std::to_string(i) + ".csv"), in.frames[i], art.hash);
		write_power(dir / "power.csv", in.frames[1], in.power, art.hash);
		write_telemetry(dir / "telemetry.csv", tel, sc.telemetry_decimation, art.hash);
		write_metric_artifacts(dir, art.metrics, s, art.hash);
	}
	return art;
}

Comparison run_comparison(const Scenario& base, const std::optional<std::filesystem::path>& out_dir) {
	Scenario gfr = base;
	gfr.mode = Mode::Gfr;
	Scenario gfl = base;
	gfl.mode = Mode::Gfl;

	Comparison c;
	auto gfl_run = std::async(std::launch::async, [&] { return run_scenario(gfl, out_dir); });
	c.gfr = run_scenario(gfr, out_dir);
	c.gfl = gfl_run.get();

	const auto& a = c.gfr.metrics;
	const auto& b = c.gfl.metrics;
	if (!a.rrocof_cdf || !b.rrocof_cdf)
		throw NoActiveSamples();
	const std::vector<double> grid = metrics::quantile_grid(base.metrics.quantile_points);
	c.rrocof = metrics::dominance_report(*a.rrocof_cdf, *b.rrocof_cdf, grid);
	if (a.rpadd_cdf && b.rpadd_cdf)
		c.rpadd = metrics::dominance_report(*a.rpadd_cdf, *b.rpadd_cdf, grid);

	auto dom = [](const metrics::Dominance& d) {
		return json{{"gfr_dominance_fraction", d.fraction},
		            {"gfr_median", d.median_a},
		            {"gfl_median", d.median_b},
		            {"median_ratio", d.median_ratio},
		            {"grid_points", d.grid_points}};
	};
	json& r = c.report;
	r["base_hash"] = base.hash();
	r["gfr_hash"] = c.gfr.hash;
	r["gfl_hash"] = c.gfl.hash;
	r["rrocof"] = dom(c.rrocof);
	r["rpadd"] = c.rpadd ? dom(*c.rpadd) : json(nullptr);
	r["gfr"] = c.gfr.summary;
	r["gfl"] = c.gfl.summary;

	if (out_dir) {
		const std::filesystem::path dir = *out_dir / ("compare-" + base.hash());
		std::filesystem::create_directories(dir);
		write_json(dir / "comparison.json", r);
	}
	return c;
}

} // namespace feederlab::engine
