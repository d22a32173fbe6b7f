// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "floodsense/arima.hpp"
#include "floodsense/detector.hpp"
#include "floodsense/ipd.hpp"
#include "floodsense/metrics.hpp"
#include "floodsense/pipeline.hpp"
#include "floodsense/prefilter.hpp"
#include "floodsense/scenario.hpp"
#include "floodsense/timeseries.hpp"

#include "oracles.hpp"

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <functional>
#include <random>
#include <unordered_set>

using namespace floodsense;
using Eigen::VectorXd;

namespace {

struct Outcome {
	bool pass = false;
	std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
	return std::chrono::duration<double>(Clock::now() - t0).count();
}

Outcome c1_golden_offset() {
	const auto loc = byte_bit_offset(1232040553u);
	const bool ok = loc.byte_offset == 154005069u && loc.byte_offset == 0x092DEE4Du && loc.bit_offset == 1;
	return {ok, fmt::format("byte={} (0x{:08X}) bit={}", loc.byte_offset, loc.byte_offset, loc.bit_offset)};
}

Outcome c2_ipd_oracle() {
	const auto t0 = Clock::now();
	IpBitmap bm;
	std::unordered_set<std::uint32_t> ref;
	std::mt19937_64 rng(2);
	// A narrow address range so mark, unmark and lookups collide often.
	std::uniform_int_distribution<std::uint32_t> ip(0, 50000);
	std::uniform_int_distribution<int> op(0, 2);
	std::size_t mismatches = 0;
	for (int i = 0; i < 100000; ++i) {
		const std::uint32_t a = i % 7 == 0 ? static_cast<std::uint32_t>(rng()) : ip(rng);
		switch (op(rng)) {
		case 0:
			bm.mark(ip_key(a));
			ref.insert(a);
			break;
		case 1:
			bm.unmark(ip_key(a));
			ref.erase(a);
			break;
		default:
			mismatches += bm.is_marked(ip_key(a)) != (ref.count(a) == 1);
		}
		mismatches += bm.count_marked() != ref.size();
	}
	const bool scan_ok = bm.scan_population() == bm.count_marked();
	const double secs = seconds_since(t0);
	return {mismatches == 0 && scan_ok && secs < 5.0,
	        fmt::format("mismatches={} marked={} scan={} time={:.2f}s", mismatches, bm.count_marked(),
	                    bm.scan_population(), secs)};
}

Outcome c3_filter_oracle() {
	const auto t0 = Clock::now();
	std::mt19937_64 rng(3);
	std::size_t wrong = 0, invariant = 0, unstable = 0;
	for (int trial = 0; trial < 1000; ++trial) {
		const auto in = oracle::random_classes(rng, 20);
		const auto out = apply_delete_rules(in);
		const auto expected = oracle::brute_force_filter(in);
		bool same = out.classes.size() == expected.size();
		for (const auto &c : out.classes) {
			const auto it = expected.find({to_u32(c.src), to_u32(c.dst)});
			same = same && it != expected.end() && it->second == c.packet_count;
		}
		wrong += !same;
		invariant += !is_many_to_one(out.classes);
		unstable += apply_delete_rules(out.classes).classes != out.classes;
	}
	const double secs = seconds_since(t0);
	return {wrong == 0 && invariant == 0 && unstable == 0 && secs < 5.0,
	        fmt::format("oracle mismatches={} invariant violations={} non-idempotent={} time={:.2f}s", wrong,
	                    invariant, unstable, secs)};
}

Outcome c4_regimes() {
	const auto t0 = Clock::now();
	const auto training = gen_scenario(preset_scenario("normal"), 1001);
	const Baseline b = train_from_records(training.records, {});

	auto fraction = [&](const char *preset, std::uint64_t seed, std::size_t from, const std::function<bool(double)> &ok) {
		const auto data = gen_scenario(preset_scenario(preset), seed);
		const auto pts = score_records(data.records, b);
		std::size_t hits = 0;
		for (std::size_t k = from; k < pts.size(); ++k) {
			hits += ok(pts[k].value);
		}
		return static_cast<double>(hits) / static_cast<double>(pts.size() - from);
	};
	const double normal = fraction("normal", 2002, 0, [](double v) { return std::abs(v) < 25.0; });
	const double flood = fraction("flood", 2003, 360, [](double v) { return v > 25.0; });
	const double crowd = fraction("flashcrowd", 2004, 360, [](double v) { return v < -1.0; });
	const double secs = seconds_since(t0);
	return {normal >= 0.95 && flood >= 0.90 && crowd >= 0.80 && secs < 30.0,
	        fmt::format("normal |nafv|<25: {:.3f} (>=0.95), flood nafv>25: {:.3f} (>=0.90), crowd nafv<-1: {:.3f} "
	                    "(>=0.80), time={:.2f}s",
	                    normal, flood, crowd, secs)};
}

Outcome c5_recover() {
	const auto t0 = Clock::now();
	VectorXd ar(2), ma(1);
	ar << 0.5, -0.3;
	ma << 0.4;
	std::vector<double> errors;
	bool admissible = true;
	for (int seed = 0; seed < 20; ++seed) {
		const auto x = oracle::simulate_arima(ar, ma, 2, 2000, 1.0, 5000 + seed);
		const auto m = ts::fit_arima(x);
		for (Eigen::Index i = 0; i < 2; ++i) {
			errors.push_back(std::abs(m.ar()[i] - ar[i]));
		}
		errors.push_back(std::abs(m.ma()[0] - ma[0]));
		admissible = admissible && m.min_ar_root_modulus() > 1.0 + 1e-6 && m.min_ma_root_modulus() > 1.0 + 1e-6;
	}
	std::sort(errors.begin(), errors.end());
	const double median = 0.5 * (errors[errors.size() / 2 - 1] + errors[errors.size() / 2]);
	const double secs = seconds_since(t0);
	return {median <= 0.15 && admissible && secs < 60.0,
	        fmt::format("median |error|={:.4f} (<=0.15) max={:.4f} stationary/invertible={} time={:.2f}s", median,
	                    errors.back(), admissible, secs)};
}

Outcome c6_diagnostics() {
	const auto t0 = Clock::now();
	int lb_pass = 0;
	double band_fraction = 0.0;
	for (int trial = 0; trial < 100; ++trial) {
		const VectorXd x = oracle::white_noise(500, 9000 + trial);
		lb_pass += ts::ljung_box(x, ts::default_ljung_box_lags(x.size())).p_value > 0.05;
		const VectorXd r = ts::acf(x, 20);
		const double band = ts::white_noise_band(x.size());
		int inside = 0;
		for (int h = 1; h <= 20; ++h) {
			inside += std::abs(r[h]) < band;
		}
		band_fraction += inside / 20.0;
	}
	band_fraction /= 100.0;
	const double secs = seconds_since(t0);
	return {lb_pass >= 90 && band_fraction >= 0.93 && secs < 30.0,
	        fmt::format("Ljung-Box p>0.05 in {}/100 (>=90), acf inside band {:.3f} (>=0.93), time={:.2f}s", lb_pass,
	                    band_fraction, secs)};
}

Outcome c7_round_trip() {
	std::mt19937_64 rng(7);
	std::uniform_int_distribution<int> v(-100000, 100000);
	int exact = 0;
	double real_err = 0.0;
	for (int trial = 0; trial < 100; ++trial) {
		VectorXd x(100);
		for (auto &e : x) {
			e = v(rng);
		}
		const VectorXd y = oracle::white_noise(100, 700 + trial);
		for (int d = 0; d <= 2; ++d) {
			exact += ts::integrate(ts::difference(x, d), x.head(d)) == x;
			real_err = std::max(real_err, (ts::integrate(ts::difference(y, d), y.head(d)) - y).cwiseAbs().maxCoeff());
		}
	}
	return {exact == 300, fmt::format("exact on integer series {}/300, real-valued max error {:.2e}", exact, real_err)};
}

class PersistModel final : public TrendModel {
public:
	explicit PersistModel(double v) : last_(v) {
	}
	void append(double v) override {
		last_ = v;
	}
	std::vector<double> forecast(int h) override {
		return std::vector<double>(static_cast<std::size_t>(h), last_);
	}

private:
	double last_;
};

class PersistService final : public TrendService {
public:
	int fits = 0;
	std::unique_ptr<TrendModel> fit(std::span<const double> history) override {
		++fits;
		return std::make_unique<PersistModel>(history.back());
	}
};

Outcome c8_state_machine() {
	DetectorConfig cfg;
	cfg.alpha = 25;
	cfg.beta = 2;
	cfg.window = 4;
	cfg.rho = 0.5;
	cfg.min_history = 1;
	auto pts = [](std::vector<double> v) {
		std::vector<NafvPoint> out(v.size());
		for (std::size_t k = 0; k < v.size(); ++k) {
			out[k].index = k;
			out[k].value = out[k].weighted = v[k];
		}
		return out;
	};
	auto kinds = [](const DetectionRun &r) {
		std::vector<std::pair<std::size_t, EventKind>> out;
		for (const auto &e : r.events) {
			out.emplace_back(e.window, e.kind);
		}
		return out;
	};
	using K = EventKind;

	PersistService s1;
	const auto alarm = run_detector(pts({1, 2, 30, 30, 30, 30}), cfg, s1);
	const bool alarm_ok = kinds(alarm) == std::vector<std::pair<std::size_t, K>>{{2, K::OutlierMarked},
	                                                                           {3, K::OutlierMarked},
	                                                                           {3, K::PredictorActivated},
	                                                                           {3, K::DdosAlarm},
	                                                                           {4, K::OutlierMarked},
	                                                                           {5, K::OutlierMarked}};

	PersistService s2;
	const auto quiet = run_detector(pts(std::vector<double>(100, 10.0)), cfg, s2);
	const bool quiet_ok = quiet.events.empty() && s2.fits == 0;

	PersistService s3;
	const auto spikes = run_detector(pts({30, 1, 30, 1, 30, 1}), cfg, s3);
	bool spikes_ok = s3.fits == 0 && spikes.events.size() == 3;
	for (const auto &e : spikes.events) {
		spikes_ok = spikes_ok && e.kind == K::OutlierMarked;
	}

	// Real ARIMA service on a sub-threshold stream.
	ArimaTrendService arima;
	std::vector<double> noise(1000);
	std::mt19937 rng(8);
	std::normal_distribution<double> z(0.0, 5.0);
	for (auto &v : noise) {
		v = z(rng);
	}
	run_detector(pts(noise), DetectorConfig{}, arima);
	const bool saving = arima.fit_calls() == 0 && arima.forecast_calls() == 0;

	return {alarm_ok && quiet_ok && spikes_ok && saving,
	        fmt::format("alarm path={} quiescent={} spikes={} ARIMA calls on quiet stream: fit={} forecast={}", alarm_ok,
	                    quiet_ok, spikes_ok, arima.fit_calls(), arima.forecast_calls())};
}

struct EndToEnd {
	Metrics metrics;
	std::vector<std::size_t> alarms;
};

EndToEnd run_pipeline(const LabeledDataset &training, const LabeledDataset &test, bool filtered) {
	TrainOptions opts;
	opts.filtered = filtered;
	const Baseline b = train_from_records(training.records, opts);
	const auto pts = score_records(test.records, b);
	ArimaTrendService svc;
	const auto run = run_detector(pts, DetectorConfig{}, svc);
	EndToEnd out;
	std::vector<WindowLabel> labels = test.labels;
	labels.resize(pts.size(), WindowLabel::Normal);
	out.metrics = evaluate(run.events, labels);
	for (const auto &e : run.events) {
		if (e.kind == EventKind::DdosAlarm) {
			out.alarms.push_back(e.window);
		}
	}
	return out;
}

Outcome c9_end_to_end() {
	const auto t0 = Clock::now();
	const auto training = gen_scenario(preset_scenario("normal"), 11);
	const auto flood = gen_scenario(preset_scenario("flood"), 7);
	const auto mixed = gen_scenario(preset_scenario("mixed"), 7);

	const std::size_t onset = static_cast<std::size_t>(
	    std::find(flood.labels.begin(), flood.labels.end(), WindowLabel::Attack) - flood.labels.begin());
	const double attack_share =
	    static_cast<double>(std::count(flood.labels.begin(), flood.labels.end(), WindowLabel::Attack)) /
	    static_cast<double>(flood.labels.size());

	const auto f = run_pipeline(training, flood, true);
	const auto fu = run_pipeline(training, flood, false);
	const auto m = run_pipeline(training, mixed, true);
	const auto mu = run_pipeline(training, mixed, false);

	const bool one_alarm = f.alarms.size() == 1 && f.alarms[0] >= onset && f.alarms[0] <= onset + 3;
	const double dr = f.metrics.dr.value_or(0.0);
	const double fr = f.metrics.fr.value_or(1.0);
	const bool ablation = f.metrics.fr.value_or(1.0) <= fu.metrics.fr.value_or(1.0) &&
	                      m.metrics.fr.value_or(1.0) <= mu.metrics.fr.value_or(1.0);
	const double secs = seconds_since(t0);
	return {flood.labels.size() >= 500 && attack_share >= 0.30 && dr >= 0.99 && fr <= 0.01 && one_alarm && ablation &&
	            secs < 60.0,
	        fmt::format("windows={} attack share={:.2f} DR={:.4f} (>=0.99) FR={:.4f} (<=0.01) alarms={} onset={} "
	                    "first alarm={} | fr filtered/unfiltered flood {:.4f}/{:.4f} mixed {:.4f}/{:.4f} time={:.2f}s",
	                    flood.labels.size(), attack_share, dr, fr, f.alarms.size(), onset,
	                    f.alarms.empty() ? -1 : static_cast<long>(f.alarms[0]), f.metrics.fr.value_or(-1),
	                    fu.metrics.fr.value_or(-1), m.metrics.fr.value_or(-1), mu.metrics.fr.value_or(-1), secs)};
}

Outcome c10_throughput() {
	auto cfg = preset_scenario("flood");
	cfg.duration = 900.0;
	cfg.attack->onset = 600.0;
	auto data = gen_scenario(cfg, 10);
	if (data.records.size() < 1000000) {
		return {false, fmt::format("generator produced only {} records", data.records.size())};
	}
	data.records.resize(1000000);
	const std::string text = format_flow_csv(data.records);
	const auto training = gen_scenario(preset_scenario("normal"), 12);
	const Baseline b = train_from_records(training.records, {});

	const auto t0 = Clock::now();
	const auto records = parse_flow_csv(text);
	const auto pts = score_records(records, b);
	const double secs = seconds_since(t0);
	return {records.size() == 1000000 && secs < 5.0,
	        fmt::format("{} records -> {} windows in {:.2f}s (<5s)", records.size(), pts.size(), secs)};
}

} // namespace

int main() {
	spdlog::set_level(spdlog::level::err);
	const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria{
	    {"1 IPD golden offset", c1_golden_offset},
	    {"2 IPD oracle equivalence", c2_ipd_oracle},
	    {"3 filter correctness", c3_filter_oracle},
	    {"4 NAFV regime properties", c4_regimes},
	    {"5 ARIMA simulate-and-recover", c5_recover},
	    {"6 diagnostics calibration", c6_diagnostics},
	    {"7 differencing round trip", c7_round_trip},
	    {"8 detector state machine", c8_state_machine},
	    {"9 end-to-end synthetic detection", c9_end_to_end},
	    {"10 throughput", c10_throughput},
	};
	int failed = 0;
	for (const auto &[name, check] : criteria) {
		Outcome o;
		try {
			o = check();
		} catch (const std::exception &e) {
			o = {false, std::string("exception: ") + e.what()};
		}
		failed += !o.pass;
		fmt::print("{} [{}] {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
		std::fflush(stdout);
	}
	fmt::print("{}/{} criteria passed\n", criteria.size() - failed, criteria.size());
	return failed == 0 ? 0 : 1;
}
