// floodsense command-line driver: gen, train, features, diagnose, detect, eval.

#include "floodsense/arima.hpp"
#include "floodsense/baseline.hpp"
#include "floodsense/detector.hpp"
#include "floodsense/error.hpp"
#include "floodsense/metrics.hpp"
#include "floodsense/pipeline.hpp"
#include "floodsense/report.hpp"
#include "floodsense/scenario.hpp"
#include "floodsense/timeseries.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/fmt/fmt.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>
#include <optional>

namespace fs = floodsense;
using nlohmann::json;

namespace {

constexpr const char *kConfigFormat = "floodsense-config/1";

// Flags shared by every subcommand. Values come from --config first and are
// overridden by any flag given on the command line.
struct Globals {
	std::string config_path;
	double unit_time = 0.8;
	fs::DetectorConfig detector;
	std::string weights = "equal";
	bool no_filter = false;
	std::uint64_t seed = 1;
	bool verbose = false;
};

struct GenArgs {
	std::string scenario = "normal";
	std::string scenario_file;
	std::optional<double> duration;
	std::string out;
	std::string labels;
};

struct TrainArgs {
	std::string in;
	std::string out;
	unsigned ipd_bits = fs::IpBitmap::kDefaultBits;
};

struct FeaturesArgs {
	std::string in;
	std::string baseline;
	std::string out;
};

struct DiagnoseArgs {
	std::string in;
	std::string out;
	std::string acf_out;
	std::string column = "nafv";
	int lags = 20;
	int p = 2, d = 2, q = 1;
	bool select_order = false;
};

struct DetectArgs {
	std::string in;
	std::string baseline;
	std::string out;
	std::string states;
	std::string score = "plain";
	int p = 2, d = 2, q = 1;
};

struct EvalArgs {
	std::string events;
	std::string labels;
	std::string out;
};

json config_to_json(const Globals &g) {
	return {{"format", kConfigFormat},
	        {"unit_time", g.unit_time},
	        {"alpha", g.detector.alpha},
	        {"beta", g.detector.beta},
	        {"window", g.detector.window},
	        {"rho", g.detector.rho},
	        {"refit_interval", g.detector.refit_interval},
	        {"min_history", g.detector.min_history},
	        {"weights", g.weights},
	        {"filter", !g.no_filter},
	        {"seed", g.seed}};
}

void apply_config_file(Globals &g, const CLI::App &app) {
	const json doc = [&] {
		try {
			return json::parse(fs::read_text_file(g.config_path));
		} catch (const json::parse_error &e) {
			throw fs::ConfigError(g.config_path + ": " + e.what());
		}
	}();
	if (!doc.is_object()) {
		throw fs::ConfigError(g.config_path + ": expected a JSON object");
	}
	if (doc.contains("format") && doc["format"] != kConfigFormat) {
		throw fs::VersionError(g.config_path + ": unsupported config format " + doc["format"].dump());
	}
	auto take = [&](const char *key, const char *flag, auto &field) {
		if (doc.contains(key) && app.count(flag) == 0) {
			try {
				field = doc[key].get<std::decay_t<decltype(field)>>();
			} catch (const json::exception &e) {
				throw fs::ConfigError(g.config_path + ": field '" + key + "': " + e.what());
			}
		}
	};
	take("unit_time", "--unit-time", g.unit_time);
	take("alpha", "--alpha", g.detector.alpha);
	take("beta", "--beta", g.detector.beta);
	take("window", "--window", g.detector.window);
	take("rho", "--rho", g.detector.rho);
	take("refit_interval", "--refit-interval", g.detector.refit_interval);
	take("min_history", "--min-history", g.detector.min_history);
	take("weights", "--weights", g.weights);
	take("seed", "--seed", g.seed);
	if (doc.contains("filter") && app.count("--no-filter") == 0) {
		g.no_filter = !doc["filter"].get<bool>();
	}
}

void emit(const std::string &path, const std::string &text) {
	if (path.empty() || path == "-") {
		std::cout << text;
	} else {
		fs::write_text_file(path, text);
	}
}

// "pca" is resolved against the stream being scored.
void apply_weights(const Globals &g, std::vector<fs::NafvPoint> &points, const fs::Baseline &baseline) {
	fs::WeightVector w = baseline.weights;
	if (g.weights == "pca") {
		w = fs::pca_weights(fs::feature_rows(points));
		const auto &v = w.values();
		spdlog::info("pca weights {:.4f},{:.4f},{:.4f},{:.4f}", v[0], v[1], v[2], v[3]);
	} else if (g.weights != "equal") {
		w = fs::WeightVector::parse(g.weights, false);
	}
	fs::reweight(points, w);
}

int run_gen(const Globals &g, const GenArgs &a) {
	fs::ScenarioConfig cfg = fs::preset_scenario(a.scenario);
	if (!a.scenario_file.empty()) {
		try {
			cfg = fs::scenario_from_json(json::parse(fs::read_text_file(a.scenario_file)), cfg);
		} catch (const json::parse_error &e) {
			throw fs::ConfigError(a.scenario_file + ": " + e.what());
		}
	}
	cfg.unit_time = g.unit_time;
	if (a.duration) {
		cfg.duration = *a.duration;
	}
	const auto data = fs::gen_scenario(cfg, g.seed);
	fs::write_text_file(a.out, fs::format_flow_csv(data.records));
	if (!a.labels.empty()) {
		fs::write_text_file(a.labels, fs::format_labels_csv(data.labels));
	}
	spdlog::info("wrote {} records over {} windows", data.records.size(), data.labels.size());
	return 0;
}

int run_train(const Globals &g, const TrainArgs &a) {
	const auto records = fs::read_flow_file(a.in);
	fs::TrainOptions opts;
	opts.ipd_bits = a.ipd_bits;
	opts.unit_time = g.unit_time;
	opts.filtered = !g.no_filter;
	// pca needs detection-time features; the stored weights stay equal.
	if (g.weights != "pca") {
		opts.weights = fs::WeightVector::parse(g.weights, false);
	}
	const auto baseline = fs::train_from_records(records, opts);
	fs::save_baseline(baseline, a.out);
	spdlog::info("trained on {} windows: O'_max={} mean new users={:.3f} |O'|={}", baseline.window_count,
	             baseline.max_old_users, baseline.mean_new_users, baseline.old_users.count_marked());
	return 0;
}

fs::Baseline load_for_scoring(const Globals &g, const std::string &path) {
	auto baseline = fs::load_baseline(path);
	if (std::abs(baseline.unit_time - g.unit_time) > 1e-12) {
		spdlog::warn("baseline unit time {} differs from --unit-time {}; using the baseline's", baseline.unit_time,
		             g.unit_time);
	}
	if (baseline.filtered == g.no_filter) {
		spdlog::warn("baseline was trained {} the filter; scoring the same way",
		             baseline.filtered ? "with" : "without");
	}
	return baseline;
}

int run_features(const Globals &g, const FeaturesArgs &a) {
	const auto baseline = load_for_scoring(g, a.baseline);
	const auto records = fs::read_flow_file(a.in);
	auto points = fs::score_records(records, baseline);
	apply_weights(g, points, baseline);
	emit(a.out, fs::format_features_csv(points));
	return 0;
}

int run_diagnose(const DiagnoseArgs &a) {
	const auto points = fs::parse_features_csv(fs::read_text_file(a.in));
	if (a.column != "nafv" && a.column != "weighted") {
		throw fs::ConfigError("--column must be nafv or weighted");
	}
	Eigen::VectorXd x(static_cast<Eigen::Index>(points.size()));
	for (std::size_t i = 0; i < points.size(); ++i) {
		x[static_cast<Eigen::Index>(i)] = a.column == "nafv" ? points[i].value : points[i].weighted;
	}
	if (!x.allFinite()) {
		throw fs::DataError("series contains non-finite values");
	}
	const int lags = std::min<int>(a.lags, static_cast<int>(x.size()) - 1);
	if (lags < 1) {
		throw fs::DataError("series too short for diagnostics");
	}
	const Eigen::VectorXd r = fs::ts::acf(x, lags);
	const Eigen::VectorXd phi = fs::ts::pacf(x, lags);
	const double band = fs::ts::white_noise_band(x.size());

	if (!a.acf_out.empty()) {
		std::string csv = "lag,acf,pacf,band\n";
		for (int k = 0; k <= lags; ++k) {
			csv += fmt::format("{},{},{},{}\n", k, r[k], phi[k], band);
		}
		fs::write_text_file(a.acf_out, csv);
	}

	json report = {{"format", "floodsense-diagnose/1"},
	               {"column", a.column},
	               {"n", x.size()},
	               {"band", band},
	               {"acf", std::vector<double>(r.data(), r.data() + r.size())},
	               {"pacf", std::vector<double>(phi.data(), phi.data() + phi.size())}};

	fs::ts::ArimaSpec spec{a.p, a.d, a.q};
	if (a.select_order) {
		const auto sel = fs::ts::select_order_aic(x, a.d);
		spec = sel.spec;
		report["selected"] = {{"p", spec.p}, {"d", spec.d}, {"q", spec.q}, {"aic", sel.aic}};
	}
	spec.validate();
	try {
		const auto model = fs::ts::fit_arima(x, spec);
		const Eigen::VectorXd e = model.effective_residuals();
		const int lb_lags = std::min(fs::ts::default_ljung_box_lags(e.size()), static_cast<int>(e.size()) - 1);
		json m = {{"p", spec.p},
		          {"d", spec.d},
		          {"q", spec.q},
		          {"ar", std::vector<double>(model.ar().data(), model.ar().data() + model.ar().size())},
		          {"ma", std::vector<double>(model.ma().data(), model.ma().data() + model.ma().size())},
		          {"sigma2", model.sigma2()},
		          {"aic", model.aic()}};
		if (lb_lags >= 1 && e.size() > 1 && (e.array() != e[0]).any()) {
			const auto lb = fs::ts::ljung_box(e, lb_lags, spec.p + spec.q);
			m["ljung_box"] = {{"statistic", lb.statistic}, {"lags", lb.lags}, {"dof", lb.dof}, {"p_value", lb.p_value}};
			const Eigen::VectorXd re = fs::ts::acf(e, lb_lags);
			m["residual_acf"] = std::vector<double>(re.data(), re.data() + re.size());
		}
		report["model"] = m;
	} catch (const fs::ts::FitError &e) {
		report["model"] = nullptr;
		report["fit_error"] = e.what();
		spdlog::warn("ARIMA fit failed: {}", e.what());
	}
	emit(a.out, report.dump(2) + "\n");
	return 0;
}

int run_detect(const Globals &g, const DetectArgs &a) {
	const auto baseline = load_for_scoring(g, a.baseline);
	const auto records = fs::read_flow_file(a.in);
	auto points = fs::score_records(records, baseline);
	apply_weights(g, points, baseline);

	if (a.score != "plain" && a.score != "weighted") {
		throw fs::ConfigError("--score must be plain or weighted");
	}
	fs::ts::ArimaSpec spec{a.p, a.d, a.q};
	spec.validate();
	fs::ArimaTrendService service(spec);
	const auto run = fs::run_detector(points, g.detector, service,
	                                  a.score == "plain" ? fs::ScoreKind::Plain : fs::ScoreKind::Weighted);

	json extra = config_to_json(g);
	extra.erase("format");
	extra["score"] = a.score;
	emit(a.out, fs::format_events_jsonl(run.events, points.size(), extra));
	if (!a.states.empty()) {
		fs::write_text_file(a.states, fs::format_states_jsonl(run.states));
	}
	std::size_t alarms = 0;
	for (const auto &e : run.events) {
		alarms += e.kind == fs::EventKind::DdosAlarm;
	}
	spdlog::info("{} windows, {} events, {} alarms, {} model fits", points.size(), run.events.size(), alarms,
	             service.fit_calls());
	return 0;
}

int run_eval(const EvalArgs &a) {
	const auto log = fs::parse_events_jsonl(fs::read_text_file(a.events));
	const auto labels = fs::parse_labels_csv(fs::read_text_file(a.labels));
	if (log.windows != labels.size()) {
		throw fs::DataError("label count " + std::to_string(labels.size()) + " does not match the " +
		                    std::to_string(log.windows) + " windows in " + a.events);
	}
	const auto m = fs::evaluate(log.events, labels);
	emit(a.out, fs::metrics_to_json(m).dump(2) + "\n");
	return 0;
}

} // namespace

int main(int argc, char **argv) {
	CLI::App app{"floodsense: flood detection from flow records"};
	app.require_subcommand(1);
	app.set_version_flag("--version", "floodsense 1.0");

	Globals g;
	app.add_option("--config", g.config_path, "JSON config mirroring these flags");
	app.add_option("--unit-time", g.unit_time, "sampling window in seconds")->check(CLI::PositiveNumber);
	app.add_option("--alpha", g.detector.alpha, "outlier threshold on the score");
	app.add_option("--beta", g.detector.beta, "consecutive outliers that start prediction");
	app.add_option("--window", g.detector.window, "sliding window length w");
	app.add_option("--rho", g.detector.rho, "alarm ratio y/w");
	app.add_option("--refit-interval", g.detector.refit_interval, "steps between model refits (0 disables)");
	app.add_option("--min-history", g.detector.min_history, "points required before the predictor starts");
	app.add_option("--weights", g.weights, "equal | pca | w1,w2,w3,w4");
	app.add_flag("--no-filter", g.no_filter, "skip the many-to-one filter");
	app.add_option("--seed", g.seed, "random seed");
	app.add_flag("-v,--verbose", g.verbose, "debug logging");
	app.fallthrough();

	GenArgs gen;
	auto *gen_cmd = app.add_subcommand("gen", "generate a labelled synthetic scenario");
	gen_cmd->add_option("--scenario", gen.scenario, "normal | flood | flashcrowd | mixed")
	    ->check(CLI::IsMember({"normal", "flood", "flashcrowd", "mixed"}));
	gen_cmd->add_option("--scenario-file", gen.scenario_file, "JSON scenario overriding the preset");
	gen_cmd->add_option("--duration", gen.duration, "seconds")->check(CLI::PositiveNumber);
	gen_cmd->add_option("--out", gen.out, "flow CSV (.gz compresses)")->required();
	gen_cmd->add_option("--labels", gen.labels, "labels CSV");

	TrainArgs train;
	auto *train_cmd = app.add_subcommand("train", "learn a baseline from attack-free flows");
	train_cmd->add_option("--in", train.in, "flow CSV")->required();
	train_cmd->add_option("--out", train.out, "baseline JSON (bitmap goes next to it)")->required();
	train_cmd->add_option("--ipd-bits", train.ipd_bits, "bitmap address bits")->check(CLI::Range(1u, 32u));

	FeaturesArgs feat;
	auto *feat_cmd = app.add_subcommand("features", "score windows against a baseline");
	feat_cmd->add_option("--in", feat.in, "flow CSV")->required();
	feat_cmd->add_option("--baseline", feat.baseline, "baseline JSON")->required();
	feat_cmd->add_option("--out", feat.out, "features CSV (default stdout)");

	DiagnoseArgs diag;
	auto *diag_cmd = app.add_subcommand("diagnose", "ACF/PACF and Ljung-Box report for a features CSV");
	diag_cmd->add_option("--in", diag.in, "features CSV")->required();
	diag_cmd->add_option("--out", diag.out, "report JSON (default stdout)");
	diag_cmd->add_option("--acf-out", diag.acf_out, "lag,acf,pacf,band CSV");
	diag_cmd->add_option("--column", diag.column, "nafv | weighted");
	diag_cmd->add_option("--lags", diag.lags, "ACF/PACF lags")->check(CLI::PositiveNumber);
	diag_cmd->add_option("--p", diag.p, "AR order");
	diag_cmd->add_option("--d", diag.d, "differencing order");
	diag_cmd->add_option("--q", diag.q, "MA order");
	diag_cmd->add_flag("--select-order", diag.select_order, "pick p, q by AIC");

	DetectArgs det;
	auto *det_cmd = app.add_subcommand("detect", "run the detector over a flow CSV");
	det_cmd->add_option("--in", det.in, "flow CSV")->required();
	det_cmd->add_option("--baseline", det.baseline, "baseline JSON")->required();
	det_cmd->add_option("--out", det.out, "event log JSON-lines (default stdout)");
	det_cmd->add_option("--states", det.states, "per-window state log JSON-lines");
	det_cmd->add_option("--score", det.score, "plain | weighted")->check(CLI::IsMember({"plain", "weighted"}));
	det_cmd->add_option("--p", det.p, "AR order");
	det_cmd->add_option("--d", det.d, "differencing order");
	det_cmd->add_option("--q", det.q, "MA order");

	EvalArgs ev;
	auto *eval_cmd = app.add_subcommand("eval", "score an event log against labels");
	eval_cmd->add_option("--events", ev.events, "event log")->required();
	eval_cmd->add_option("--labels", ev.labels, "labels CSV")->required();
	eval_cmd->add_option("--out", ev.out, "metrics JSON (default stdout)");

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e) {
		const int rc = app.exit(e);
		return rc == 0 ? 0 : 2;
	}

	spdlog::set_default_logger(spdlog::stderr_color_st("floodsense"));
	spdlog::set_pattern("%^%l%$: %v");
	spdlog::set_level(g.verbose ? spdlog::level::debug : spdlog::level::info);

	try {
		if (!g.config_path.empty()) {
			apply_config_file(g, app);
		}
		g.detector.validate();
		if (g.weights != "pca") {
			fs::WeightVector::parse(g.weights, false);
		}
		if (*gen_cmd) {
			return run_gen(g, gen);
		}
		if (*train_cmd) {
			return run_train(g, train);
		}
		if (*feat_cmd) {
			return run_features(g, feat);
		}
		if (*diag_cmd) {
			return run_diagnose(diag);
		}
		if (*det_cmd) {
			return run_detect(g, det);
		}
		if (*eval_cmd) {
			return run_eval(ev);
		}
	} catch (const fs::ConfigError &e) {
		spdlog::error("{}", e.what());
		return 2;
	} catch (const std::exception &e) {
		spdlog::error("{}", e.what());
		return 1;
	}
	return 2;
}
