#include "floodsense/detector.hpp"

#include <algorithm>

namespace floodsense {

class ArimaTrendModel final : public TrendModel {
public:
	ArimaTrendModel(ts::ArimaModel model, ArimaTrendService &owner) : model_(std::move(model)), owner_(&owner) {
	}

	void append(double value) override {
		model_.append(value);
	}

	std::vector<double> forecast(int horizon) override {
		++owner_->forecast_calls_;
		const Eigen::VectorXd f = model_.forecast(horizon);
		return {f.data(), f.data() + f.size()};
	}

private:
	ts::ArimaModel model_;
	ArimaTrendService *owner_;
};

std::unique_ptr<TrendModel> ArimaTrendService::fit(std::span<const double> history) {
	++fit_calls_;
	const Eigen::Map<const Eigen::VectorXd> series(history.data(), static_cast<Eigen::Index>(history.size()));
	return std::make_unique<ArimaTrendModel>(ts::fit_arima(series, spec_, options_), *this);
}

void DetectorConfig::validate() const {
	if (!(alpha > 0.0)) {
		throw ConfigError("alpha must be positive");
	}
	if (beta < 1) {
		throw ConfigError("beta must be at least 1");
	}
	if (window < 1) {
		throw ConfigError("window must be at least 1");
	}
	if (!(rho > 0.0 && rho <= 1.0)) {
		throw ConfigError("rho must lie in (0, 1]");
	}
	if (min_history < 1) {
		throw ConfigError("min_history must be at least 1");
	}
	if (history_limit < static_cast<std::size_t>(min_history)) {
		throw ConfigError("history_limit must be at least min_history");
	}
}

std::string_view to_string(Mode mode) {
	switch (mode) {
	case Mode::Idle:
		return "Idle";
	case Mode::Armed:
		return "Armed";
	case Mode::Predicting:
		return "Predicting";
	case Mode::Alarmed:
		return "Alarmed";
	}
	return "?";
}

std::string_view to_string(EventKind kind) {
	switch (kind) {
	case EventKind::OutlierMarked:
		return "OutlierMarked";
	case EventKind::PredictorActivated:
		return "PredictorActivated";
	case EventKind::DdosAlarm:
		return "DdosAlarm";
	case EventKind::PredictorDeactivated:
		return "PredictorDeactivated";
	case EventKind::AlarmCleared:
		return "AlarmCleared";
	case EventKind::FitFailed:
		return "FitFailed";
	}
	return "?";
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
	for (auto kind : {EventKind::OutlierMarked, EventKind::PredictorActivated, EventKind::DdosAlarm,
	                  EventKind::PredictorDeactivated, EventKind::AlarmCleared, EventKind::FitFailed}) {
		if (to_string(kind) == text) {
			return kind;
		}
	}
	return std::nullopt;
}

Detector::Detector(DetectorConfig config, TrendService &service) : config_(config), service_(&service) {
	config_.validate();
}

bool Detector::fit_model(std::string &error) {
	const std::size_t n = std::min(history_.size(), config_.history_limit);
	try {
		model_ = service_->fit(std::span<const double>(history_).last(n));
		steps_since_fit_ = 0;
		return true;
	} catch (const std::exception &e) {
		error = e.what();
		return false;
	}
}

void Detector::push_flag(bool abnormal) {
	ring_.push_back(abnormal);
	y_ += abnormal ? 1 : 0;
	while (ring_.size() > static_cast<std::size_t>(config_.window)) {
		y_ -= ring_.front() ? 1 : 0;
		ring_.pop_front();
	}
}

std::vector<DetectionEvent> Detector::step(const NafvPoint &point) {
	std::vector<DetectionEvent> events;
	const double v = point.value;
	history_.push_back(v);
	const bool outlier = v > config_.alpha;
	if (outlier) {
		events.push_back({point.index, EventKind::OutlierMarked, v, y_, config_.window, {}, {}});
	}

	if (mode_ == Mode::Predicting || mode_ == Mode::Alarmed) {
		step_active(point, events);
		return events;
	}

	if (!outlier) {
		mode_ = Mode::Idle;
		consecutive_ = 0;
		return events;
	}
	const int run = consecutive_ + 1;
	if (run < config_.beta) {
		mode_ = Mode::Armed;
		consecutive_ = run;
		return events;
	}
	if (history_.size() < static_cast<std::size_t>(config_.min_history)) {
		// Cold start: the outlier stays visible but unconfirmed.
		consecutive_ = config_.beta - 1;
		mode_ = consecutive_ > 0 ? Mode::Armed : Mode::Idle;
		return events;
	}
	activate(point, events);
	return events;
}

void Detector::activate(const NafvPoint &point, std::vector<DetectionEvent> &events) {
	const double v = point.value;
	std::string error;
	if (!fit_model(error)) {
		consecutive_ = config_.beta - 1;
		mode_ = consecutive_ > 0 ? Mode::Armed : Mode::Idle;
		events.push_back({point.index, EventKind::FitFailed, v, 0, config_.window, {}, error});
		return;
	}
	const std::vector<double> forecast = model_->forecast(config_.window);
	ring_.clear();
	y_ = 0;
	for (double f : forecast) {
		push_flag(f > config_.alpha);
	}
	mode_ = Mode::Predicting;
	consecutive_ = 0;
	events.push_back({point.index, EventKind::PredictorActivated, v, y_, config_.window, forecast, {}});

	if (static_cast<double>(y_) >= config_.rho * config_.window) {
		mode_ = Mode::Alarmed;
		events.push_back({point.index, EventKind::DdosAlarm, v, y_, config_.window, forecast, {}});
	} else if (y_ == 0) {
		mode_ = Mode::Idle;
		model_.reset();
		ring_.clear();
		events.push_back({point.index, EventKind::PredictorDeactivated, v, y_, config_.window, forecast, {}});
	}
}

void Detector::step_active(const NafvPoint &point, std::vector<DetectionEvent> &events) {
	const double v = point.value;
	model_->append(v);
	++steps_since_fit_;
	if (config_.refit_interval > 0 && steps_since_fit_ >= config_.refit_interval) {
		std::string error;
		if (!fit_model(error)) {
			// Keep the previous model; try again after another interval.
			steps_since_fit_ = 0;
			events.push_back({point.index, EventKind::FitFailed, v, y_, config_.window, {}, error});
		}
	}
	const std::vector<double> next = model_->forecast(1);
	push_flag(std::max(v, next.front()) > config_.alpha);

	const bool over = static_cast<double>(y_) >= config_.rho * config_.window;
	if (mode_ == Mode::Predicting && over) {
		mode_ = Mode::Alarmed;
		events.push_back({point.index, EventKind::DdosAlarm, v, y_, config_.window, next, {}});
		return;
	}
	if (mode_ == Mode::Alarmed && !over) {
		mode_ = Mode::Predicting;
		events.push_back({point.index, EventKind::AlarmCleared, v, y_, config_.window, next, {}});
	}
	if (mode_ == Mode::Predicting && y_ == 0) {
		mode_ = Mode::Idle;
		model_.reset();
		ring_.clear();
		events.push_back({point.index, EventKind::PredictorDeactivated, v, y_, config_.window, next, {}});
	}
}

DetectionRun run_detector(std::span<const NafvPoint> points, const DetectorConfig &config, TrendService &service,
                          ScoreKind score) {
	Detector detector(config, service);
	DetectionRun run;
	run.states.reserve(points.size());
	for (const auto &p : points) {
		NafvPoint scored = p;
		if (score == ScoreKind::Weighted) {
			scored.value = p.weighted;
		}
		auto events = detector.step(scored);
		run.events.insert(run.events.end(), std::make_move_iterator(events.begin()), std::make_move_iterator(events.end()));
		run.states.push_back(detector.record(p.index));
	}
	return run;
}

} // namespace floodsense
