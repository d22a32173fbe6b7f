#pragma once

#include "floodsense/detector.hpp"
#include "floodsense/scenario.hpp"

#include <optional>
#include <span>
#include <vector>

namespace floodsense {

/// Window-level confusion counts with attack as the positive class.
/// Rates are empty when their denominator is zero.
struct Metrics {
	std::uint64_t tp = 0; ///< attack windows flagged
	std::uint64_t fn = 0; ///< attack windows missed
	std::uint64_t fp = 0; ///< non-attack windows flagged
	std::uint64_t tn = 0; ///< non-attack windows left alone
	std::optional<double> dr; ///< tp / (tp + fn)
	std::optional<double> mr; ///< fn / (tp + fn)
	std::optional<double> fr; ///< fp / (fp + tn)
	std::size_t windows = 0;
};

/// Windows in the Alarmed state: from each DdosAlarm up to (excluding) the
/// next AlarmCleared, or to the end of the stream.
std::vector<bool> alarmed_windows(std::span<const DetectionEvent> events, std::size_t window_count);

/// Flash-crowd windows count as non-attack. Throws DataError on a size mismatch.
Metrics evaluate(const std::vector<bool> &flagged, std::span<const WindowLabel> labels);

/// Throws DataError when an event refers to a window outside the labels.
Metrics evaluate(std::span<const DetectionEvent> events, std::span<const WindowLabel> labels);

} // namespace floodsense
