#pragma once

#include "floodsense/detector.hpp"
#include "floodsense/features.hpp"
#include "floodsense/metrics.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace floodsense {

inline constexpr const char *kFeaturesCsvHeader = "k,start,n,a,f,v,nafv,nafv_weighted";
inline constexpr const char *kEventsFormat = "floodsense-events/1";
inline constexpr const char *kMetricsFormat = "floodsense-metrics/1";

std::string format_features_csv(std::span<const NafvPoint> points);

/// Reads a features CSV back into points. Throws ParseError.
std::vector<NafvPoint> parse_features_csv(std::string_view text);

nlohmann::json event_to_json(const DetectionEvent &event);
DetectionEvent event_from_json(const nlohmann::json &doc);

/// Header line with the window count, then one JSON object per event.
std::string format_events_jsonl(std::span<const DetectionEvent> events, std::size_t windows,
                                const nlohmann::json &extra = nlohmann::json::object());

struct EventLog {
	std::size_t windows = 0;
	std::vector<DetectionEvent> events;
};

/// Throws ParseError on malformed lines and VersionError on a foreign header.
EventLog parse_events_jsonl(std::string_view text);

std::string format_states_jsonl(std::span<const StateRecord> states);

nlohmann::json metrics_to_json(const Metrics &m);

} // namespace floodsense
