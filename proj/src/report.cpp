#include "floodsense/report.hpp"

#include "floodsense/error.hpp"

#include <spdlog/fmt/fmt.h>

#include <charconv>
#include <cmath>

namespace floodsense {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
	std::vector<std::string_view> out;
	std::size_t pos = 0;
	while (true) {
		const auto comma = line.find(',', pos);
		if (comma == std::string_view::npos) {
			out.push_back(line.substr(pos));
			return out;
		}
		out.push_back(line.substr(pos, comma - pos));
		pos = comma + 1;
	}
}

double parse_double(std::string_view text, std::size_t line, int field) {
	double v = 0.0;
	const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
	if (ec != std::errc{} || ptr != text.data() + text.size()) {
		throw ParseError(line, field, "not a number: '" + std::string(text) + "'");
	}
	return v;
}

double json_number(const nlohmann::json &v) {
	return v.is_null() ? std::nan("") : v.get<double>();
}

} // namespace

std::string format_features_csv(std::span<const NafvPoint> points) {
	std::string out = kFeaturesCsvHeader;
	out += '\n';
	for (const auto &p : points) {
		fmt::format_to(std::back_inserter(out), "{},{},{},{},{},{},{},{}\n", p.index, p.start, p.features.n,
		               p.features.a, p.features.f, p.features.v, p.value, p.weighted);
	}
	return out;
}

std::vector<NafvPoint> parse_features_csv(std::string_view text) {
	std::vector<NafvPoint> points;
	std::size_t line_no = 0;
	std::size_t pos = 0;
	while (pos < text.size()) {
		auto end = text.find('\n', pos);
		if (end == std::string_view::npos) {
			end = text.size();
		}
		auto line = text.substr(pos, end - pos);
		pos = end + 1;
		++line_no;
		if (!line.empty() && line.back() == '\r') {
			line.remove_suffix(1);
		}
		if (line.empty() || line.front() == '#' || line == kFeaturesCsvHeader) {
			continue;
		}
		const auto f = split_fields(line);
		if (f.size() < 7) {
			throw ParseError(line_no, static_cast<int>(f.size()) + 1, "expected at least 7 fields");
		}
		NafvPoint p;
		std::uint64_t k = 0;
		const auto [ptr, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), k);
		if (ec != std::errc{} || ptr != f[0].data() + f[0].size()) {
			throw ParseError(line_no, 1, "bad window index");
		}
		p.index = k;
		p.start = parse_double(f[1], line_no, 2);
		p.features = {parse_double(f[2], line_no, 3), parse_double(f[3], line_no, 4), parse_double(f[4], line_no, 5),
		              parse_double(f[5], line_no, 6)};
		p.value = parse_double(f[6], line_no, 7);
		p.weighted = f.size() > 7 ? parse_double(f[7], line_no, 8) : p.value;
		points.push_back(p);
	}
	return points;
}

nlohmann::json event_to_json(const DetectionEvent &e) {
	nlohmann::json doc = {{"k", e.window}, {"kind", std::string(to_string(e.kind))}, {"nafv", e.value},
	                      {"y", e.y},      {"w", e.w}};
	if (!e.forecast.empty()) {
		doc["forecast"] = e.forecast;
	}
	if (!e.message.empty()) {
		doc["message"] = e.message;
	}
	return doc;
}

DetectionEvent event_from_json(const nlohmann::json &doc) {
	DetectionEvent e;
	e.window = doc.at("k").get<std::size_t>();
	const auto kind = parse_event_kind(doc.at("kind").get<std::string>());
	if (!kind) {
		throw DataError("unknown event kind " + doc.at("kind").dump());
	}
	e.kind = *kind;
	e.value = json_number(doc.at("nafv"));
	e.y = doc.value("y", 0);
	e.w = doc.value("w", 0);
	if (doc.contains("forecast")) {
		for (const auto &v : doc["forecast"]) {
			e.forecast.push_back(json_number(v));
		}
	}
	e.message = doc.value("message", std::string{});
	return e;
}

std::string format_events_jsonl(std::span<const DetectionEvent> events, std::size_t windows,
                                const nlohmann::json &extra) {
	nlohmann::json header = extra.is_object() ? extra : nlohmann::json::object();
	header["format"] = kEventsFormat;
	header["windows"] = windows;
	std::string out = header.dump();
	out += '\n';
	for (const auto &e : events) {
		out += event_to_json(e).dump();
		out += '\n';
	}
	return out;
}

EventLog parse_events_jsonl(std::string_view text) {
	EventLog log;
	bool have_header = false;
	std::size_t line_no = 0;
	std::size_t pos = 0;
	while (pos < text.size()) {
		auto end = text.find('\n', pos);
		if (end == std::string_view::npos) {
			end = text.size();
		}
		const auto line = text.substr(pos, end - pos);
		pos = end + 1;
		++line_no;
		if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
			continue;
		}
		nlohmann::json doc;
		try {
			doc = nlohmann::json::parse(line);
		} catch (const nlohmann::json::exception &e) {
			throw ParseError(line_no, 1, e.what());
		}
		if (!have_header) {
			if (!doc.is_object() || doc.value("format", std::string{}) != kEventsFormat) {
				throw VersionError("event log does not start with a " + std::string(kEventsFormat) + " header");
			}
			log.windows = doc.at("windows").get<std::size_t>();
			have_header = true;
			continue;
		}
		try {
			log.events.push_back(event_from_json(doc));
		} catch (const nlohmann::json::exception &e) {
			throw ParseError(line_no, 1, e.what());
		} catch (const DataError &e) {
			throw ParseError(line_no, 1, e.what());
		}
	}
	if (!have_header) {
		throw VersionError("empty event log");
	}
	return log;
}

std::string format_states_jsonl(std::span<const StateRecord> states) {
	std::string out;
	for (const auto &s : states) {
		out += nlohmann::json{{"k", s.window},
		                      {"mode", std::string(to_string(s.mode))},
		                      {"consecutive", s.consecutive},
		                      {"y", s.y}}
		           .dump();
		out += '\n';
	}
	return out;
}

nlohmann::json metrics_to_json(const Metrics &m) {
	auto rate = [](const std::optional<double> &r) { return r ? nlohmann::json(*r) : nlohmann::json(nullptr); };
	return {{"format", kMetricsFormat}, {"dr", rate(m.dr)}, {"mr", rate(m.mr)}, {"fr", rate(m.fr)},
	        {"tp", m.tp},              {"fn", m.fn},       {"fp", m.fp},       {"tn", m.tn},
	        {"windows", m.windows}};
}

} // namespace floodsense
