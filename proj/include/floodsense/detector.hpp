#pragma once

#include "floodsense/arima.hpp"
#include "floodsense/features.hpp"

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace floodsense {

struct DetectorConfig {
	double alpha = 25.0;      ///< outlier threshold on the score
	int beta = 2;             ///< consecutive outliers that activate prediction
	int window = 10;          ///< w, sliding-window length in points
	double rho = 0.5;         ///< alarm when y / w >= rho
	int refit_interval = 16;  ///< steps between refits while active; <= 0 disables
	int min_history = 42;     ///< points required before the predictor can start
	std::size_t history_limit = 4096; ///< fits use at most this many trailing points

	void validate() const;
	/// min_history = 10 (p + q + 1) + d for the given orders.
	static int default_min_history(const ts::ArimaSpec &spec) {
		return spec.min_length();
	}
};

/// Trend model seen by the detector. The ARIMA implementation lives in
/// ArimaTrendService; tests substitute scripted models.
class TrendModel {
public:
	virtual ~TrendModel() = default;
	virtual void append(double value) = 0;
	virtual std::vector<double> forecast(int horizon) = 0;
};

class TrendService {
public:
	virtual ~TrendService() = default;
	/// Throws on fit failure; the detector stays armed and retries.
	virtual std::unique_ptr<TrendModel> fit(std::span<const double> history) = 0;
};

/// ARIMA-backed trend service with invocation counters.
class ArimaTrendService final : public TrendService {
public:
	explicit ArimaTrendService(ts::ArimaSpec spec = {}, ts::FitOptions options = {})
	    : spec_(spec), options_(options) {
	}

	std::unique_ptr<TrendModel> fit(std::span<const double> history) override;

	std::uint64_t fit_calls() const noexcept {
		return fit_calls_;
	}
	std::uint64_t forecast_calls() const noexcept {
		return forecast_calls_;
	}
	const ts::ArimaSpec &spec() const noexcept {
		return spec_;
	}

private:
	friend class ArimaTrendModel;
	ts::ArimaSpec spec_;
	ts::FitOptions options_;
	std::uint64_t fit_calls_ = 0;
	std::uint64_t forecast_calls_ = 0;
};

enum class Mode { Idle, Armed, Predicting, Alarmed };

enum class EventKind { OutlierMarked, PredictorActivated, DdosAlarm, PredictorDeactivated, AlarmCleared, FitFailed };

std::string_view to_string(Mode mode);
std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view text);

struct DetectionEvent {
	std::size_t window = 0;
	EventKind kind = EventKind::OutlierMarked;
	double value = 0.0;
	int y = 0;
	int w = 0;
	std::vector<double> forecast;
	std::string message; ///< FitFailed diagnostics

	friend bool operator==(const DetectionEvent &, const DetectionEvent &) = default;
};

/// Snapshot of the state after one step.
struct StateRecord {
	std::size_t window = 0;
	Mode mode = Mode::Idle;
	int consecutive = 0; ///< outlier run length while Idle/Armed
	int y = 0;

	friend bool operator==(const StateRecord &, const StateRecord &) = default;
};

/// Threshold-activated detection state machine.
///
///   Idle       --score > alpha-->                         Armed(1)
///   Armed(c)   --score > alpha, c + 1 >= beta, history ok-> Predicting
///   Armed(c)   --score <= alpha-->                        Idle
///   Predicting --y / w >= rho-->                          Alarmed
///   Predicting --y == 0-->                                Idle
///   Alarmed    --y / w < rho-->                           Predicting
///
/// On activation the trend model is fitted on the history and the ring of w
/// abnormality flags is filled from its w-step forecast. Each later step
/// appends the point to the model and pushes one flag: the point is abnormal
/// when max(point, one-step forecast) > alpha. The model is refitted every
/// refit_interval steps. Every point above alpha emits OutlierMarked, in any
/// mode. Without enough history an outlier run stays Armed.
class Detector {
public:
	Detector(DetectorConfig config, TrendService &service);

	/// Advances one window; returns events in emission order.
	std::vector<DetectionEvent> step(const NafvPoint &point);

	Mode mode() const noexcept {
		return mode_;
	}
	int consecutive() const noexcept {
		return consecutive_;
	}
	int abnormal_count() const noexcept {
		return y_;
	}
	const std::deque<bool> &ring() const noexcept {
		return ring_;
	}
	std::span<const double> history() const noexcept {
		return history_;
	}
	StateRecord record(std::size_t window) const {
		return {window, mode_, consecutive_, y_};
	}
	const DetectorConfig &config() const noexcept {
		return config_;
	}

private:
	DetectorConfig config_;
	TrendService *service_;
	Mode mode_ = Mode::Idle;
	int consecutive_ = 0;
	int y_ = 0;
	int steps_since_fit_ = 0;
	std::deque<bool> ring_;
	std::vector<double> history_;
	std::unique_ptr<TrendModel> model_;

	bool fit_model(std::string &error);
	void push_flag(bool abnormal);
	void step_active(const NafvPoint &point, std::vector<DetectionEvent> &events);
	void activate(const NafvPoint &point, std::vector<DetectionEvent> &events);
};

struct DetectionRun {
	std::vector<DetectionEvent> events;
	std::vector<StateRecord> states;
};

/// Folds Detector::step over the points. `score` picks which value drives
/// the state machine.
enum class ScoreKind { Plain, Weighted };

DetectionRun run_detector(std::span<const NafvPoint> points, const DetectorConfig &config, TrendService &service,
                          ScoreKind score = ScoreKind::Plain);

} // namespace floodsense
