#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "feederlab/bulk_frequency.hpp"
#include "feederlab/csv.hpp"
#include "feederlab/engine.hpp"
#include "feederlab/network.hpp"

using namespace feederlab;
using engine::Scenario;

namespace {

struct Options {
	std::string config;
	std::string out = "runs";
	std::optional<std::uint64_t> seed;
	std::string mode;
	bool quiet = false;
	std::optional<double> target;
	std::string run_dir;
};

Scenario resolve(const Options& o, bool require_config) {
	Scenario sc;
	if (!o.config.empty())
		sc = Scenario::load(o.config);
	else if (require_config)
		throw CLI::RequiredError("--config");
	if (o.seed)
		sc.override_seed(*o.seed);
	if (!o.mode.empty())
		sc.mode = engine::mode_from_string(o.mode);
	sc.validate();
	return sc;
}

std::string fmt(double v) { return csv::format(v); }

void print_metrics(const nlohmann::json& m) {
	std::cout << "  delta_theta0   " << fmt(m["delta_theta0_deg"].get<double>()) << " deg (std "
	          << fmt(m["delta_theta0_std_deg"].get<double>()) << ")\n";
	std::cout << "  IFD            " << fmt(m["ifd_hz"].get<double>()) << " Hz\n";
	for (const char* key : {"rrocof_hz_per_s_per_w", "rpadd_deg_per_kw"}) {
		const auto& s = m[key];
		std::cout << "  " << (std::string(key).starts_with("rrocof") ? "rRoCoF median  " : "rPADD median   ");
		if (s["median"].is_null())
			std::cout << "n/a (" << s["error"].get<std::string>() << ")\n";
		else
			std::cout << fmt(s["median"].get<double>()) << (key[1] == 'r' ? " Hz/s/W" : " deg/kW") << "  (retained "
			          << fmt(s["retained_fraction"].get<double>()) << ")\n";
	}
}

int cmd_synth(const Options& o) {
	Scenario sc = resolve(o, false);
	bulk::SynthParams p = sc.trace.synth;
	p.duration = sc.duration;
	p.f0 = sc.f0;
	const auto trace = bulk::synthesize(p);
	const std::string hash = sc.hash();
	const std::filesystem::path dir = std::filesystem::path(o.out) / hash;
	std::filesystem::create_directories(dir);
	bulk::write_trace(dir / "trace.csv", trace, hash);
	if (!o.quiet)
		std::cout << "wrote " << trace.size() << " samples to " << (dir / "trace.csv").string() << '\n';
	return 0;
}

int cmd_calibrate(const Options& o) {
	Scenario sc = resolve(o, false);
	const double target = o.target ? *o.target : sc.feeder.calibrate_deg_per_kw.value_or(0.006);
	network::FeederModel feeder = sc.feeder_model();
	feeder.x_t2 = network::calibrate_sensitivity(feeder, target);
	const double achieved = network::angle_sensitivity(feeder);
	if (!o.quiet) {
		std::cout << "x_t2        " << fmt(feeder.x_t2) << " pu on " << fmt(feeder.base.s_base) << " VA\n";
		std::cout << "sensitivity " << fmt(achieved) << " deg/kW\n";
	}
	std::filesystem::create_directories(o.out);
	std::ofstream os(std::filesystem::path(o.out) / "calibration.json");
	os << nlohmann::json{{"scenario_hash", sc.hash()},
	                     {"target_deg_per_kw", target},
	                     {"x_t2_pu", feeder.x_t2},
	                     {"sensitivity_deg_per_kw", achieved}}
	          .dump(2)
	   << '\n';
	return 0;
}

int cmd_run(const Options& o) {
	Scenario sc = resolve(o, true);
	const auto art = engine::run_scenario(sc, std::filesystem::path(o.out));
	if (!o.quiet) {
		std::cout << "run " << art.hash << " (" << engine::to_string(sc.mode) << ") -> "
		          << (std::filesystem::path(o.out) / art.hash).string() << '\n';
		print_metrics(art.summary["metrics"]);
	}
	return 0;
}

int cmd_compare(const Options& o) {
	Scenario sc = resolve(o, true);
	const auto cmp = engine::run_comparison(sc, std::filesystem::path(o.out));
	if (!o.quiet) {
		std::cout << "GFR run " << cmp.gfr.hash << '\n';
		print_metrics(cmp.gfr.summary["metrics"]);
		std::cout << "GFL run " << cmp.gfl.hash << '\n';
		print_metrics(cmp.gfl.summary["metrics"]);
		std::cout << "rRoCoF dominance " << fmt(cmp.rrocof.fraction) << ", median ratio GFR/GFL "
		          << fmt(cmp.rrocof.median_ratio) << '\n';
		if (cmp.rpadd)
			std::cout << "rPADD dominance  " << fmt(cmp.rpadd->fraction) << ", median ratio GFR/GFL "
			          << fmt(cmp.rpadd->median_ratio) << '\n';
	}
	return 0;
}

int cmd_replay(const Options& o) {
	const std::filesystem::path run = o.run_dir;
	std::ifstream is(run / "config.json");
	if (!is)
		throw InputError("no config.json in '" + run.string() + "'");
	const auto echo = nlohmann::json::parse(is, nullptr, false);
	if (echo.is_discarded() || !echo.contains("scenario"))
		throw InputError("malformed config.json in '" + run.string() + "'");
	const Scenario sc = Scenario::from_json(echo["scenario"]);

	engine::MetricInputs in;
	for (std::size_t i = 0; i < 3; ++i)
		in.frames[i] = pmu::read_frames(run / ("pmu" + std::to_string(i) + ".csv"));
	in.power = engine::read_power(run / "power.csv", in.frames[1]);
	in.f0 = sc.f0;
	in.activation_time = sc.activation_time;
	in.baseline_begin = sc.baseline_begin;
	in.baseline_end = sc.baseline_end;
	in.config = sc.metrics;

	const auto m = engine::evaluate_metrics(in);
	nlohmann::json summary{{"scenario_hash", sc.hash()}, {"replayed_from", run.string()}};
	summary["metrics"] = engine::metrics_summary(m);
	const std::filesystem::path dir = o.out.empty() ? run / "replay" : std::filesystem::path(o.out);
	engine::write_metric_artifacts(dir, m, summary, sc.hash());
	if (!o.quiet) {
		std::cout << "replayed " << run.string() << " -> " << dir.string() << '\n';
		print_metrics(summary["metrics"]);
	}
	return 0;
}

} // namespace

int main(int argc, char** argv) {
	CLI::App app{"feederlab: GFR/GFL battery converter metrics on a distribution feeder"};
	app.require_subcommand(1, 1);
	Options o;

	auto common = [&](CLI::App* sub, bool need_config) {
		auto* c = sub->add_option("--config", o.config, "Scenario JSON file")->check(CLI::ExistingFile);
		if (need_config)
			c->required();
		sub->add_option("--seed", o.seed, "Trace seed; PMU noise seeds follow as seed+1..seed+3");
		sub->add_flag("--quiet", o.quiet, "Suppress the summary");
	};

	auto* synth = app.add_subcommand("synth-trace", "Synthesize a bulk-grid frequency trace");
	common(synth, false);
	synth->add_option("--out", o.out, "Output directory")->capture_default_str();

	auto* cal = app.add_subcommand("calibrate", "Fit the T2 reactance to an angle sensitivity");
	common(cal, false);
	cal->add_option("--target", o.target, "Sensitivity in deg/kW (default: config value)");
	cal->add_option("--out", o.out, "Output directory")->capture_default_str();

	auto* run = app.add_subcommand("run", "Run one scenario");
	common(run, true);
	run->add_option("--out", o.out, "Output directory")->capture_default_str();
	run->add_option("--mode", o.mode, "Converter mode")->check(CLI::IsMember({"gfr", "gfl", "off"}));

	auto* cmp = app.add_subcommand("compare", "Run GFR and GFL on the same scenario and compare");
	common(cmp, true);
	cmp->add_option("--out", o.out, "Output directory")->capture_default_str();

	auto* replay = app.add_subcommand("replay-metrics", "Recompute metrics from a run directory's CSV files");
	replay->add_option("--run-dir", o.run_dir, "Directory written by 'run'")->required()->check(CLI::ExistingDirectory);
	replay->add_option("--out", o.out, "Output directory (default: <run-dir>/replay)");
	replay->add_flag("--quiet", o.quiet, "Suppress the summary");

	try {
		app.parse(argc, argv);
		if (replay->parsed() && replay->count("--out") == 0)
			o.out.clear();
	} catch (const CLI::CallForHelp& e) {
		return app.exit(e);
	} catch (const CLI::ParseError& e) {
		app.exit(e);
		std::cerr << '\n' << app.help();
		return 2;
	}

	try {
		if (synth->parsed())
			return cmd_synth(o);
		if (cal->parsed())
			return cmd_calibrate(o);
		if (run->parsed())
			return cmd_run(o);
		if (cmp->parsed())
			return cmd_compare(o);
		return cmd_replay(o);
	} catch (const Error& e) {
		std::cerr << "error: " << e.what() << '\n';
		return 1;
	} catch (const nlohmann::json::exception& e) {
		std::cerr << "error: " << e.what() << '\n';
		return 1;
	}
}
