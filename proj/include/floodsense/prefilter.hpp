#pragma once

#include "floodsense/flow_ingest.hpp"

#include <vector>

namespace floodsense {

/// Packets sharing one (source, destination) pair.
struct FlowClass {
	IpKey src{};
	IpKey dst{};
	std::uint32_t packet_count = 0;

	friend bool operator==(const FlowClass &, const FlowClass &) = default;
};

/// A window reduced to many-to-one flows: no surviving source talks to more
/// than one destination, and every surviving destination hears from at least
/// two sources.
struct FilteredWindow {
	std::size_t index = 0;
	double start = 0.0;
	std::vector<FlowClass> classes; ///< sorted by (src, dst)
	AccessCounts access_counts;     ///< survivors only
};

/// Groups a window's packets by (src, dst). Output is sorted by (src, dst).
std::vector<FlowClass> classify(const WindowSample &window);

/// Deletes every class of a source with two or more destinations, then every
/// class of a destination left with a single source. One pass of each rule.
FilteredWindow apply_delete_rules(std::vector<FlowClass> classes);

/// Classify and filter in one step, carrying the window index and start.
FilteredWindow filter_window(const WindowSample &window);

/// Keeps every class; used for the unfiltered ablation path.
FilteredWindow passthrough_window(const WindowSample &window);

/// True when both many-to-one invariants hold.
bool is_many_to_one(const std::vector<FlowClass> &classes);

} // namespace floodsense
