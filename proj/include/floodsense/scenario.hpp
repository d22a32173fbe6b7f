#pragma once

#include "floodsense/flow_ingest.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace floodsense {

enum class WindowLabel { Normal, Attack, FlashCrowd };

std::string_view to_string(WindowLabel label);
std::optional<WindowLabel> parse_label(std::string_view text);

enum class SourcePool { SpoofedRandom, FixedPool };

struct AttackConfig {
	double onset = 0.0; ///< seconds
	std::optional<double> end; ///< defaults to the scenario end
	std::uint32_t bots = 200;
	double bot_rate = 10.0; ///< packets per second per bot
	SourcePool pool = SourcePool::FixedPool;
	/// Fraction of the normal old-user rate that still gets through.
	double old_user_activity = 0.1;
};

struct FlashCrowdConfig {
	double onset = 0.0;
	std::optional<double> end;
	std::uint32_t crowd_size = 400;
	double crowd_rate = 2.0; ///< packets per second per crowd member, about c
	/// Multiplier on the old-user rate while the crowd is active.
	double old_user_boost = 4.0;
};

/// Synthetic traffic description.
///
/// Old users (a fixed population drawn from `population_seed`) send Poisson
/// traffic at `user_rate` to the victim. Each window also brings `churn`
/// fresh sources on average. Background hosts spray packets over a server
/// pool (one-to-many) and random peer pairs exchange packets (one-to-one);
/// both are removed by the many-to-one filter.
struct ScenarioConfig {
	double duration = 480.0;
	double unit_time = 0.8;
	std::uint32_t population = 200;
	double user_rate = 2.0; ///< c, packets per second per old user
	double churn = 5.0;     ///< fresh victim users per window (Poisson mean)
	std::uint32_t victim = 0x0A000001u; ///< 10.0.0.1
	std::uint16_t victim_port = 80;
	std::uint64_t population_seed = 20070804;
	std::uint32_t background_hosts = 40;
	double background_rate = 3.0; ///< packets per second per background host
	std::uint32_t server_pool = 2000;
	double peer_pairs = 20.0; ///< one-to-one pairs per window (Poisson mean)
	std::optional<AttackConfig> attack;
	std::optional<FlashCrowdConfig> flashcrowd;

	void validate() const;
	std::size_t window_count() const;
};

/// Named presets: normal, flood, flashcrowd, mixed.
ScenarioConfig preset_scenario(std::string_view name);

ScenarioConfig scenario_from_json(const nlohmann::json &doc, ScenarioConfig base = {});
nlohmann::json scenario_to_json(const ScenarioConfig &cfg);

struct LabeledDataset {
	std::vector<PacketRecord> records; ///< sorted by timestamp
	std::vector<WindowLabel> labels;   ///< one per window
	/// Bot packets per window; used for label soundness checks.
	std::vector<std::uint32_t> attack_packets;
	std::vector<std::uint32_t> crowd_packets;
};

/// Deterministic for a given (config, seed). A window is labelled Attack
/// (or FlashCrowd) when it overlaps that segment and carries at least one of
/// its packets; Attack wins when both apply.
LabeledDataset gen_scenario(const ScenarioConfig &cfg, std::uint64_t seed);

std::string format_labels_csv(const std::vector<WindowLabel> &labels);
std::vector<WindowLabel> parse_labels_csv(std::string_view text);
std::string format_flow_csv(const std::vector<PacketRecord> &records);

} // namespace floodsense
