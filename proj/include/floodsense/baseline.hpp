#pragma once

#include "floodsense/ipd.hpp"
#include "floodsense/prefilter.hpp"
#include "floodsense/weights.hpp"

#include <filesystem>
#include <span>

namespace floodsense {

/// Parameters learned from an attack-free stream.
struct Baseline {
	IpBitmap old_users{IpBitmap::kDefaultBits}; ///< O'
	std::uint64_t max_old_users = 0;             ///< O'_max
	double mean_new_users = 0.0;                 ///< N-bar over windows 2..k
	double unit_time = 0.8;
	WeightVector weights;
	std::uint64_t window_count = 0;
	bool filtered = true; ///< trained on filtered windows

	friend bool operator==(const Baseline &, const Baseline &) = default;
};

struct TrainOptions {
	unsigned ipd_bits = IpBitmap::kDefaultBits;
	double unit_time = 0.8;
	bool filtered = true;
	WeightVector weights;
};

/// Learns O', O'_max and the mean new-user count from windows in stream
/// order. The first window seeds O'_max with its distinct-source count. Each
/// later window is scored against the current O' before its sources are
/// merged in. The mean excludes the first window, where every source is new.
/// Throws TrainingError on an empty sequence.
Baseline train(std::span<const FilteredWindow> windows, const TrainOptions &options = {});

inline constexpr const char *kBaselineFormat = "floodsense-baseline/1";

/// Writes `path` (JSON header) and a sibling `<stem>.ipd` bitmap snapshot.
void save_baseline(const Baseline &baseline, const std::filesystem::path &path);

/// Inverse of save_baseline. Throws VersionError on an unknown format tag
/// and CorruptFileError on truncated or malformed content.
Baseline load_baseline(const std::filesystem::path &path);

} // namespace floodsense
