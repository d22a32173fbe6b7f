#include "floodsense/scenario.hpp"

#include "floodsense/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <unordered_set>

namespace floodsense {

namespace {

std::int64_t to_us(double seconds) {
	return static_cast<std::int64_t>(std::llround(seconds * 1e6));
}

struct Interval {
	std::int64_t lo = 0;
	std::int64_t hi = 0; // exclusive
	bool empty() const {
		return hi <= lo;
	}
	std::int64_t length() const {
		return std::max<std::int64_t>(0, hi - lo);
	}
};

Interval intersect(Interval a, Interval b) {
	return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

class Emitter {
public:
	Emitter(std::mt19937_64 &rng, std::vector<PacketRecord> &out) : rng_(rng), out_(out) {
	}

	std::uint32_t poisson(double mean) {
		if (!(mean > 0.0)) {
			return 0;
		}
		return static_cast<std::uint32_t>(std::poisson_distribution<std::uint32_t>(mean)(rng_));
	}

	void packets(std::uint32_t count, IpKey src, IpKey dst, std::uint16_t port, Interval span) {
		if (span.empty()) {
			return;
		}
		std::uniform_int_distribution<std::int64_t> when(span.lo, span.hi - 1);
		for (std::uint32_t i = 0; i < count; ++i) {
			out_.push_back({when(rng_), src, dst, port});
		}
	}

	/// Poisson traffic at `rate` packets/s over `span`; returns the count.
	std::uint32_t stream(double rate, IpKey src, IpKey dst, std::uint16_t port, Interval span) {
		const std::uint32_t n = poisson(rate * static_cast<double>(span.length()) * 1e-6);
		packets(n, src, dst, port, span);
		return n;
	}

private:
	std::mt19937_64 &rng_;
	std::vector<PacketRecord> &out_;
};

class AddressPool {
public:
	explicit AddressPool(IpKey victim) {
		taken_.insert(to_u32(victim));
	}

	IpKey fresh(std::mt19937_64 &rng) {
		while (true) {
			const auto v = static_cast<std::uint32_t>(rng());
			if (v != 0 && taken_.insert(v).second) {
				return ip_key(v);
			}
		}
	}

	/// Address outside the reserved set, without reserving it.
	IpKey transient(std::mt19937_64 &rng) const {
		while (true) {
			const auto v = static_cast<std::uint32_t>(rng());
			if (v != 0 && !taken_.contains(v)) {
				return ip_key(v);
			}
		}
	}

private:
	std::unordered_set<std::uint32_t> taken_;
};

Interval segment_span(double onset, const std::optional<double> &end, double duration) {
	return {to_us(onset), to_us(end.value_or(duration))};
}

} // namespace

std::string_view to_string(WindowLabel label) {
	switch (label) {
	case WindowLabel::Normal:
		return "normal";
	case WindowLabel::Attack:
		return "attack";
	case WindowLabel::FlashCrowd:
		return "flashcrowd";
	}
	return "?";
}

std::optional<WindowLabel> parse_label(std::string_view text) {
	for (auto l : {WindowLabel::Normal, WindowLabel::Attack, WindowLabel::FlashCrowd}) {
		if (to_string(l) == text) {
			return l;
		}
	}
	return std::nullopt;
}

void ScenarioConfig::validate() const {
	if (!(duration > 0.0) || !(unit_time > 0.0)) {
		throw ConfigError("scenario duration and unit_time must be positive");
	}
	if (population < 1) {
		throw ConfigError("scenario population must be at least 1");
	}
	if (!(user_rate > 0.0) || churn < 0.0 || background_rate < 0.0 || peer_pairs < 0.0) {
		throw ConfigError("scenario rates must be positive");
	}
	if (background_hosts > 0 && server_pool < 2) {
		throw ConfigError("server_pool must hold at least two servers");
	}
	if (attack) {
		if (!(attack->onset >= 0.0 && attack->onset < duration)) {
			throw ConfigError("attack onset must lie inside the scenario");
		}
		if (attack->end && !(*attack->end > attack->onset)) {
			throw ConfigError("attack end must follow its onset");
		}
		if (attack->bots < 1 || !(attack->bot_rate > 0.0) || attack->old_user_activity < 0.0) {
			throw ConfigError("attack needs bots >= 1 and a positive rate");
		}
	}
	if (flashcrowd) {
		if (!(flashcrowd->onset >= 0.0 && flashcrowd->onset < duration)) {
			throw ConfigError("flash crowd onset must lie inside the scenario");
		}
		if (flashcrowd->end && !(*flashcrowd->end > flashcrowd->onset)) {
			throw ConfigError("flash crowd end must follow its onset");
		}
		if (flashcrowd->crowd_size < 1 || !(flashcrowd->crowd_rate > 0.0) || flashcrowd->old_user_boost < 0.0) {
			throw ConfigError("flash crowd needs crowd_size >= 1 and a positive rate");
		}
	}
}

std::size_t ScenarioConfig::window_count() const {
	return static_cast<std::size_t>(to_us(duration) / to_us(unit_time));
}

ScenarioConfig preset_scenario(std::string_view name) {
	ScenarioConfig cfg;
	if (name == "normal") {
		return cfg;
	}
	if (name == "flood") {
		cfg.attack.emplace();
		cfg.attack->onset = 288.0;
		return cfg;
	}
	if (name == "flashcrowd") {
		cfg.flashcrowd.emplace();
		cfg.flashcrowd->onset = 288.0;
		return cfg;
	}
	if (name == "mixed") {
		cfg.flashcrowd.emplace();
		cfg.flashcrowd->onset = 160.0;
		cfg.flashcrowd->end = 224.0;
		cfg.attack.emplace();
		cfg.attack->onset = 320.0;
		return cfg;
	}
	throw ConfigError("unknown scenario preset '" + std::string(name) + "' (normal, flood, flashcrowd, mixed)");
}

LabeledDataset gen_scenario(const ScenarioConfig &cfg, std::uint64_t seed) {
	cfg.validate();
	const std::int64_t unit_us = to_us(cfg.unit_time);
	const std::size_t windows = cfg.window_count();
	const IpKey victim = ip_key(cfg.victim);

	AddressPool addresses(victim);
	std::mt19937_64 pop_rng(cfg.population_seed);
	std::vector<IpKey> old_users(cfg.population);
	for (auto &ip : old_users) {
		ip = addresses.fresh(pop_rng);
	}
	std::vector<IpKey> hosts(cfg.background_hosts);
	for (auto &ip : hosts) {
		ip = addresses.fresh(pop_rng);
	}
	std::vector<IpKey> servers(cfg.background_hosts > 0 ? cfg.server_pool : 0);
	for (auto &ip : servers) {
		ip = addresses.fresh(pop_rng);
	}

	std::mt19937_64 rng(seed);
	std::vector<IpKey> bots;
	if (cfg.attack && cfg.attack->pool == SourcePool::FixedPool) {
		bots.resize(cfg.attack->bots);
		for (auto &ip : bots) {
			ip = addresses.fresh(rng);
		}
	}
	std::vector<IpKey> crowd;
	if (cfg.flashcrowd) {
		crowd.resize(cfg.flashcrowd->crowd_size);
		for (auto &ip : crowd) {
			ip = addresses.fresh(rng);
		}
	}

	const Interval attack_span =
	    cfg.attack ? segment_span(cfg.attack->onset, cfg.attack->end, cfg.duration) : Interval{};
	const Interval crowd_span =
	    cfg.flashcrowd ? segment_span(cfg.flashcrowd->onset, cfg.flashcrowd->end, cfg.duration) : Interval{};

	LabeledDataset data;
	data.labels.resize(windows, WindowLabel::Normal);
	data.attack_packets.resize(windows, 0);
	data.crowd_packets.resize(windows, 0);
	std::vector<PacketRecord> window_records;
	Emitter emit(rng, window_records);
	std::uniform_int_distribution<std::size_t> pick_server(0, servers.empty() ? 0 : servers.size() - 1);
	std::uniform_int_distribution<int> pick_port(1024, 65535);

	for (std::size_t k = 0; k < windows; ++k) {
		window_records.clear();
		const Interval span{static_cast<std::int64_t>(k) * unit_us, static_cast<std::int64_t>(k + 1) * unit_us};
		const Interval attack_here = intersect(span, attack_span);
		const Interval crowd_here = intersect(span, crowd_span);

		// Old users: split the window at segment boundaries, each piece at its own rate.
		std::vector<std::int64_t> cuts = {span.lo, span.hi, attack_here.lo, attack_here.hi, crowd_here.lo,
		                                  crowd_here.hi};
		std::erase_if(cuts, [&](std::int64_t t) { return t < span.lo || t > span.hi; });
		std::sort(cuts.begin(), cuts.end());
		cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
		for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
			const Interval piece{cuts[c], cuts[c + 1]};
			const std::int64_t mid = (piece.lo + piece.hi) / 2;
			double factor = 1.0;
			if (!attack_here.empty() && mid >= attack_here.lo && mid < attack_here.hi) {
				factor *= cfg.attack->old_user_activity;
			}
			if (!crowd_here.empty() && mid >= crowd_here.lo && mid < crowd_here.hi) {
				factor *= cfg.flashcrowd->old_user_boost;
			}
			for (IpKey user : old_users) {
				emit.stream(cfg.user_rate * factor, user, victim, cfg.victim_port, piece);
			}
		}

		// Fresh legitimate users; each sends at least one packet, c * unit_time on average.
		const std::uint32_t fresh = emit.poisson(cfg.churn);
		const double per_user = cfg.user_rate * cfg.unit_time;
		for (std::uint32_t i = 0; i < fresh; ++i) {
			emit.packets(1 + emit.poisson(std::max(0.0, per_user - 1.0)), addresses.transient(rng), victim,
			             cfg.victim_port, span);
		}

		for (IpKey host : hosts) {
			const std::uint32_t n = emit.poisson(cfg.background_rate * cfg.unit_time);
			for (std::uint32_t i = 0; i < n; ++i) {
				emit.packets(1, host, servers[pick_server(rng)], 443, span);
			}
		}
		const std::uint32_t pairs = emit.poisson(cfg.peer_pairs);
		for (std::uint32_t i = 0; i < pairs; ++i) {
			const IpKey a = addresses.transient(rng);
			const IpKey b = addresses.transient(rng);
			emit.packets(1 + emit.poisson(1.0), a, b, static_cast<std::uint16_t>(pick_port(rng)), span);
		}

		if (!attack_here.empty()) {
			std::uint32_t sent = 0;
			if (cfg.attack->pool == SourcePool::FixedPool) {
				for (IpKey bot : bots) {
					sent += emit.stream(cfg.attack->bot_rate, bot, victim, cfg.victim_port, attack_here);
				}
			} else {
				const std::uint32_t n = emit.poisson(cfg.attack->bot_rate * cfg.attack->bots *
				                                     static_cast<double>(attack_here.length()) * 1e-6);
				for (std::uint32_t i = 0; i < n; ++i) {
					emit.packets(1, addresses.transient(rng), victim, cfg.victim_port, attack_here);
				}
				sent = n;
			}
			data.attack_packets[k] = sent;
		}
		if (!crowd_here.empty()) {
			std::uint32_t sent = 0;
			for (IpKey member : crowd) {
				sent += emit.stream(cfg.flashcrowd->crowd_rate, member, victim, cfg.victim_port, crowd_here);
			}
			data.crowd_packets[k] = sent;
		}

		if (data.attack_packets[k] > 0) {
			data.labels[k] = WindowLabel::Attack;
		} else if (data.crowd_packets[k] > 0) {
			data.labels[k] = WindowLabel::FlashCrowd;
		}

		std::sort(window_records.begin(), window_records.end(), [](const PacketRecord &a, const PacketRecord &b) {
			return std::tie(a.timestamp_us, a.src, a.dst, a.dst_port) < std::tie(b.timestamp_us, b.src, b.dst, b.dst_port);
		});
		data.records.insert(data.records.end(), window_records.begin(), window_records.end());
	}
	return data;
}

std::string format_labels_csv(const std::vector<WindowLabel> &labels) {
	std::string out = "k,label\n";
	for (std::size_t k = 0; k < labels.size(); ++k) {
		out += std::to_string(k);
		out += ',';
		out += to_string(labels[k]);
		out += '\n';
	}
	return out;
}

std::vector<WindowLabel> parse_labels_csv(std::string_view text) {
	std::vector<WindowLabel> labels;
	std::istringstream in{std::string(text)};
	std::string line;
	std::size_t line_number = 0;
	while (std::getline(in, line)) {
		++line_number;
		if (!line.empty() && line.back() == '\r') {
			line.pop_back();
		}
		if (line.empty() || line == "k,label") {
			continue;
		}
		const auto comma = line.find(',');
		if (comma == std::string::npos) {
			throw ParseError(line_number, 2, "expected k,label");
		}
		std::size_t k = 0;
		try {
			k = std::stoul(line.substr(0, comma));
		} catch (const std::logic_error &) {
			throw ParseError(line_number, 1, "invalid window index");
		}
		if (k != labels.size()) {
			throw ParseError(line_number, 1, "window indices must be consecutive from 0");
		}
		const auto label = parse_label(line.substr(comma + 1));
		if (!label) {
			throw ParseError(line_number, 2, "unknown label '" + line.substr(comma + 1) + "'");
		}
		labels.push_back(*label);
	}
	return labels;
}

std::string format_flow_csv(const std::vector<PacketRecord> &records) {
	std::string out(kFlowCsvHeader);
	out += '\n';
	out.reserve(records.size() * 40);
	for (const auto &r : records) {
		out += format_flow_record(r);
		out += '\n';
	}
	return out;
}

ScenarioConfig scenario_from_json(const nlohmann::json &doc, ScenarioConfig cfg) {
	try {
		cfg.duration = doc.value("duration", cfg.duration);
		cfg.unit_time = doc.value("unit_time", cfg.unit_time);
		cfg.population = doc.value("population", cfg.population);
		cfg.user_rate = doc.value("user_rate", cfg.user_rate);
		cfg.churn = doc.value("churn", cfg.churn);
		if (doc.contains("victim")) {
			IpKey v{};
			if (!parse_address(doc["victim"].get<std::string>(), v)) {
				throw ConfigError("invalid victim address");
			}
			cfg.victim = to_u32(v);
		}
		cfg.victim_port = doc.value("victim_port", cfg.victim_port);
		cfg.population_seed = doc.value("population_seed", cfg.population_seed);
		cfg.background_hosts = doc.value("background_hosts", cfg.background_hosts);
		cfg.background_rate = doc.value("background_rate", cfg.background_rate);
		cfg.server_pool = doc.value("server_pool", cfg.server_pool);
		cfg.peer_pairs = doc.value("peer_pairs", cfg.peer_pairs);
		if (doc.contains("attack")) {
			if (doc["attack"].is_null()) {
				cfg.attack.reset();
			} else {
				const auto &a = doc["attack"];
				AttackConfig ac = cfg.attack.value_or(AttackConfig{});
				ac.onset = a.value("onset", ac.onset);
				if (a.contains("end")) {
					ac.end = a["end"].is_null() ? std::nullopt : std::optional<double>(a["end"].get<double>());
				}
				ac.bots = a.value("bots", ac.bots);
				ac.bot_rate = a.value("bot_rate", ac.bot_rate);
				ac.old_user_activity = a.value("old_user_activity", ac.old_user_activity);
				if (a.contains("pool")) {
					const auto pool = a["pool"].get<std::string>();
					if (pool == "spoofed-random") {
						ac.pool = SourcePool::SpoofedRandom;
					} else if (pool == "fixed-pool") {
						ac.pool = SourcePool::FixedPool;
					} else {
						throw ConfigError("attack.pool must be spoofed-random or fixed-pool");
					}
				}
				cfg.attack = ac;
			}
		}
		if (doc.contains("flashcrowd")) {
			if (doc["flashcrowd"].is_null()) {
				cfg.flashcrowd.reset();
			} else {
				const auto &f = doc["flashcrowd"];
				FlashCrowdConfig fc = cfg.flashcrowd.value_or(FlashCrowdConfig{});
				fc.onset = f.value("onset", fc.onset);
				if (f.contains("end")) {
					fc.end = f["end"].is_null() ? std::nullopt : std::optional<double>(f["end"].get<double>());
				}
				fc.crowd_size = f.value("crowd_size", fc.crowd_size);
				fc.crowd_rate = f.value("crowd_rate", fc.crowd_rate);
				fc.old_user_boost = f.value("old_user_boost", fc.old_user_boost);
				cfg.flashcrowd = fc;
			}
		}
	} catch (const nlohmann::json::exception &e) {
		throw ConfigError(std::string("scenario config: ") + e.what());
	}
	return cfg;
}

nlohmann::json scenario_to_json(const ScenarioConfig &cfg) {
	nlohmann::json doc = {
	    {"duration", cfg.duration},
	    {"unit_time", cfg.unit_time},
	    {"population", cfg.population},
	    {"user_rate", cfg.user_rate},
	    {"churn", cfg.churn},
	    {"victim", format_ipv4(ip_key(cfg.victim))},
	    {"victim_port", cfg.victim_port},
	    {"population_seed", cfg.population_seed},
	    {"background_hosts", cfg.background_hosts},
	    {"background_rate", cfg.background_rate},
	    {"server_pool", cfg.server_pool},
	    {"peer_pairs", cfg.peer_pairs},
	    {"attack", nullptr},
	    {"flashcrowd", nullptr},
	};
	if (cfg.attack) {
		const auto &a = *cfg.attack;
		doc["attack"] = {{"onset", a.onset},
		                 {"end", a.end ? nlohmann::json(*a.end) : nlohmann::json(nullptr)},
		                 {"bots", a.bots},
		                 {"bot_rate", a.bot_rate},
		                 {"pool", a.pool == SourcePool::FixedPool ? "fixed-pool" : "spoofed-random"},
		                 {"old_user_activity", a.old_user_activity}};
	}
	if (cfg.flashcrowd) {
		const auto &f = *cfg.flashcrowd;
		doc["flashcrowd"] = {{"onset", f.onset},
		                     {"end", f.end ? nlohmann::json(*f.end) : nlohmann::json(nullptr)},
		                     {"crowd_size", f.crowd_size},
		                     {"crowd_rate", f.crowd_rate},
		                     {"old_user_boost", f.old_user_boost}};
	}
	return doc;
}

} // namespace floodsense
