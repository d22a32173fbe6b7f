#include "floodsense/prefilter.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace floodsense {

namespace {

std::uint64_t pair_key(IpKey src, IpKey dst) {
	return (std::uint64_t{to_u32(src)} << 32) | to_u32(dst);
}

bool class_less(const FlowClass &a, const FlowClass &b) {
	return pair_key(a.src, a.dst) < pair_key(b.src, b.dst);
}

AccessCounts counts_of(const std::vector<FlowClass> &classes) {
	AccessCounts counts;
	counts.reserve(classes.size());
	for (const auto &c : classes) {
		counts[c.src] += c.packet_count;
	}
	return counts;
}

} // namespace

std::vector<FlowClass> classify(const WindowSample &window) {
	std::unordered_map<std::uint64_t, std::uint32_t> groups;
	groups.reserve(window.access_counts.size() * 2 + 1);
	for (const auto &r : window.records) {
		++groups[pair_key(r.src, r.dst)];
	}
	std::vector<FlowClass> classes;
	classes.reserve(groups.size());
	for (const auto &[key, count] : groups) {
		classes.push_back({ip_key(static_cast<std::uint32_t>(key >> 32)), ip_key(static_cast<std::uint32_t>(key)), count});
	}
	std::sort(classes.begin(), classes.end(), class_less);
	return classes;
}

FilteredWindow apply_delete_rules(std::vector<FlowClass> classes) {
	std::sort(classes.begin(), classes.end(), class_less);
	// Merge duplicate pairs so each (src, dst) is one class.
	std::size_t w = 0;
	for (std::size_t r = 0; r < classes.size(); ++r) {
		if (w > 0 && classes[w - 1].src == classes[r].src && classes[w - 1].dst == classes[r].dst) {
			classes[w - 1].packet_count += classes[r].packet_count;
		} else {
			classes[w++] = classes[r];
		}
	}
	classes.resize(w);

	// Rule 1: sorted by src, so a fan-out source is a run with more than one dst.
	std::vector<FlowClass> kept;
	kept.reserve(classes.size());
	for (std::size_t i = 0; i < classes.size();) {
		std::size_t j = i + 1;
		while (j < classes.size() && classes[j].src == classes[i].src) {
			++j;
		}
		if (j - i == 1) {
			kept.push_back(classes[i]);
		}
		i = j;
	}

	// Rule 2: after rule 1 each source has one class, so a destination's
	// class count is its distinct-source count.
	std::unordered_map<IpKey, std::uint32_t> fan_in;
	fan_in.reserve(kept.size());
	for (const auto &c : kept) {
		++fan_in[c.dst];
	}
	std::erase_if(kept, [&](const FlowClass &c) { return fan_in[c.dst] < 2; });

	FilteredWindow out;
	out.access_counts = counts_of(kept);
	out.classes = std::move(kept);
	return out;
}

FilteredWindow filter_window(const WindowSample &window) {
	FilteredWindow out = apply_delete_rules(classify(window));
	out.index = window.index;
	out.start = window.start;
	return out;
}

FilteredWindow passthrough_window(const WindowSample &window) {
	FilteredWindow out;
	out.index = window.index;
	out.start = window.start;
	out.classes = classify(window);
	out.access_counts = window.access_counts;
	return out;
}

bool is_many_to_one(const std::vector<FlowClass> &classes) {
	std::unordered_map<IpKey, std::unordered_set<IpKey>> dsts_of_src;
	std::unordered_map<IpKey, std::unordered_set<IpKey>> srcs_of_dst;
	for (const auto &c : classes) {
		dsts_of_src[c.src].insert(c.dst);
		srcs_of_dst[c.dst].insert(c.src);
	}
	for (const auto &[src, dsts] : dsts_of_src) {
		if (dsts.size() > 1) {
			return false;
		}
	}
	for (const auto &[dst, srcs] : srcs_of_dst) {
		if (srcs.size() < 2) {
			return false;
		}
	}
	return true;
}

} // namespace floodsense
