#include "floodsense/pipeline.hpp"

namespace floodsense {

std::vector<FilteredWindow> prepare_windows(std::span<const PacketRecord> records, double unit_time, bool filtered) {
	const auto windows = window_stream(records, SamplingConfig{unit_time, StreamRole::Detection});
	std::vector<FilteredWindow> out;
	out.reserve(windows.size());
	for (const auto &w : windows) {
		out.push_back(filtered ? filter_window(w) : passthrough_window(w));
	}
	return out;
}

Baseline train_from_records(std::span<const PacketRecord> records, const TrainOptions &options) {
	const auto windows = prepare_windows(records, options.unit_time, options.filtered);
	return train(windows, options);
}

std::vector<NafvPoint> score_records(std::span<const PacketRecord> records, const Baseline &baseline,
                                     const FeatureOptions &options) {
	const auto windows = prepare_windows(records, baseline.unit_time, baseline.filtered);
	std::vector<NafvPoint> points;
	points.reserve(windows.size());
	for (const auto &w : windows) {
		points.push_back(score_window(w, baseline, options));
	}
	return points;
}

void reweight(std::span<NafvPoint> points, const WeightVector &weights) {
	for (auto &p : points) {
		p.weighted = nafv_weighted(p.features, weights);
	}
}

std::vector<FeatureVector> feature_rows(std::span<const NafvPoint> points) {
	std::vector<FeatureVector> rows;
	rows.reserve(points.size());
	for (const auto &p : points) {
		rows.push_back(p.features);
	}
	return rows;
}

} // namespace floodsense
