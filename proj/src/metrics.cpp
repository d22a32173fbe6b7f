#include "floodsense/metrics.hpp"

#include "floodsense/error.hpp"

namespace floodsense {

std::vector<bool> alarmed_windows(std::span<const DetectionEvent> events, std::size_t window_count) {
	std::vector<bool> flagged(window_count, false);
	std::optional<std::size_t> open;
	auto close = [&](std::size_t end) {
		for (std::size_t k = *open; k < end && k < window_count; ++k) {
			flagged[k] = true;
		}
		open.reset();
	};
	for (const auto &e : events) {
		if (e.kind == EventKind::DdosAlarm && !open) {
			open = e.window;
		} else if (e.kind == EventKind::AlarmCleared && open) {
			close(e.window);
		}
	}
	if (open) {
		close(window_count);
	}
	return flagged;
}

Metrics evaluate(const std::vector<bool> &flagged, std::span<const WindowLabel> labels) {
	if (flagged.size() != labels.size()) {
		throw DataError("label count " + std::to_string(labels.size()) + " does not match window count " +
		                std::to_string(flagged.size()));
	}
	Metrics m;
	m.windows = labels.size();
	for (std::size_t k = 0; k < labels.size(); ++k) {
		const bool attack = labels[k] == WindowLabel::Attack;
		if (attack) {
			++(flagged[k] ? m.tp : m.fn);
		} else {
			++(flagged[k] ? m.fp : m.tn);
		}
	}
	if (m.tp + m.fn > 0) {
		const double pos = static_cast<double>(m.tp + m.fn);
		m.dr = static_cast<double>(m.tp) / pos;
		m.mr = static_cast<double>(m.fn) / pos;
	}
	if (m.fp + m.tn > 0) {
		m.fr = static_cast<double>(m.fp) / static_cast<double>(m.fp + m.tn);
	}
	return m;
}

Metrics evaluate(std::span<const DetectionEvent> events, std::span<const WindowLabel> labels) {
	for (const auto &e : events) {
		if (e.window >= labels.size()) {
			throw DataError("event at window " + std::to_string(e.window) + " is beyond the " +
			                std::to_string(labels.size()) + " labelled windows");
		}
	}
	return evaluate(alarmed_windows(events, labels.size()), labels);
}

} // namespace floodsense
