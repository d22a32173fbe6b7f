#pragma once

#include "floodsense/baseline.hpp"
#include "floodsense/features.hpp"
#include "floodsense/flow_ingest.hpp"

#include <span>
#include <vector>

namespace floodsense {

/// Windows the stream and applies the many-to-one filter (or the
/// passthrough when `filtered` is false).
std::vector<FilteredWindow> prepare_windows(std::span<const PacketRecord> records, double unit_time, bool filtered);

/// prepare_windows followed by train().
Baseline train_from_records(std::span<const PacketRecord> records, const TrainOptions &options);

/// Scores every window of a detection stream against the baseline, using the
/// baseline's unit time and filter setting.
std::vector<NafvPoint> score_records(std::span<const PacketRecord> records, const Baseline &baseline,
                                     const FeatureOptions &options = {});

/// Recomputes the weighted score of each point.
void reweight(std::span<NafvPoint> points, const WeightVector &weights);

std::vector<FeatureVector> feature_rows(std::span<const NafvPoint> points);

} // namespace floodsense
