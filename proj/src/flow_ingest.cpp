#include "floodsense/flow_ingest.hpp"

#include "floodsense/error.hpp"

#include <arpa/inet.h>
#include <spdlog/spdlog.h>
#include <zlib.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace floodsense {

namespace {

bool ends_with_gz(const std::filesystem::path &path) {
	const std::string name = path.filename().string();
	return name.size() > 3 && name.compare(name.size() - 3, 3, ".gz") == 0;
}

bool parse_ipv4(std::string_view text, std::uint32_t &out) noexcept {
	std::uint32_t value = 0;
	const char *p = text.data();
	const char *end = text.data() + text.size();
	for (int octet = 0; octet < 4; ++octet) {
		if (octet > 0) {
			if (p == end || *p != '.') {
				return false;
			}
			++p;
		}
		unsigned part = 0;
		auto [next, ec] = std::from_chars(p, end, part);
		if (ec != std::errc{} || next == p || next - p > 3 || part > 255) {
			return false;
		}
		p = next;
		value = (value << 8) | part;
	}
	if (p != end) {
		return false;
	}
	out = value;
	return true;
}

std::string_view trim(std::string_view s) {
	while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
		s.remove_prefix(1);
	}
	while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
		s.remove_suffix(1);
	}
	return s;
}

} // namespace

std::int64_t SamplingConfig::unit_time_us() const {
	if (!(unit_time > 0.0) || !std::isfinite(unit_time)) {
		throw ConfigError("unit_time must be positive");
	}
	const auto us = static_cast<std::int64_t>(std::llround(unit_time * 1e6));
	if (us < 1) {
		throw ConfigError("unit_time must be at least one microsecond");
	}
	return us;
}

bool parse_address(std::string_view text, IpKey &out) noexcept {
	std::uint32_t v4 = 0;
	if (parse_ipv4(text, v4)) {
		out = ip_key(v4);
		return true;
	}
	if (text.find(':') == std::string_view::npos || text.size() >= INET6_ADDRSTRLEN) {
		return false;
	}
	char buf[INET6_ADDRSTRLEN];
	text.copy(buf, text.size());
	buf[text.size()] = '\0';
	Ipv6Bytes bytes{};
	if (inet_pton(AF_INET6, buf, bytes.data()) != 1) {
		return false;
	}
	out = ip_key(map_ipv6(bytes));
	return true;
}

std::string format_ipv4(IpKey key) {
	const std::uint32_t v = to_u32(key);
	return std::to_string(v >> 24) + '.' + std::to_string((v >> 16) & 0xff) + '.' + std::to_string((v >> 8) & 0xff) +
	       '.' + std::to_string(v & 0xff);
}

PacketRecord parse_flow_record(std::string_view line, std::size_t line_number) {
	std::string_view fields[4];
	std::size_t count = 0;
	std::size_t pos = 0;
	while (true) {
		const std::size_t comma = line.find(',', pos);
		if (count == 4) {
			throw ParseError(line_number, 5, "unexpected extra field");
		}
		fields[count++] = trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
		if (comma == std::string_view::npos) {
			break;
		}
		pos = comma + 1;
	}
	if (count != 4) {
		throw ParseError(line_number, static_cast<int>(count) + 1, "expected 4 fields, found " + std::to_string(count));
	}

	PacketRecord record;
	{
		const auto f = fields[0];
		auto [next, ec] = std::from_chars(f.data(), f.data() + f.size(), record.timestamp_us);
		if (ec != std::errc{} || next != f.data() + f.size() || f.empty() || record.timestamp_us < 0) {
			throw ParseError(line_number, 1, "invalid timestamp '" + std::string(f) + "'");
		}
	}
	if (!parse_address(fields[1], record.src)) {
		throw ParseError(line_number, 2, "invalid source address '" + std::string(fields[1]) + "'");
	}
	if (!parse_address(fields[2], record.dst)) {
		throw ParseError(line_number, 3, "invalid destination address '" + std::string(fields[2]) + "'");
	}
	{
		const auto f = fields[3];
		unsigned long port = 0;
		auto [next, ec] = std::from_chars(f.data(), f.data() + f.size(), port);
		if (ec != std::errc{} || next != f.data() + f.size() || f.empty()) {
			throw ParseError(line_number, 4, "invalid port '" + std::string(f) + "'");
		}
		if (port > 65535) {
			throw ParseError(line_number, 4, "port out of range: " + std::string(f));
		}
		record.dst_port = static_cast<std::uint16_t>(port);
	}
	return record;
}

std::vector<PacketRecord> parse_flow_csv(std::string_view text) {
	std::vector<PacketRecord> records;
	records.reserve(text.size() / 32);
	std::size_t line_number = 0;
	std::size_t pos = 0;
	while (pos < text.size()) {
		std::size_t eol = text.find('\n', pos);
		if (eol == std::string_view::npos) {
			eol = text.size();
		}
		++line_number;
		const std::string_view line = trim(text.substr(pos, eol - pos));
		pos = eol + 1;
		if (line.empty() || line.front() == '#' || line == kFlowCsvHeader) {
			continue;
		}
		records.push_back(parse_flow_record(line, line_number));
	}
	return records;
}

std::string read_text_file(const std::filesystem::path &path) {
	if (ends_with_gz(path)) {
		gzFile gz = gzopen(path.c_str(), "rb");
		if (!gz) {
			throw IoError("cannot open " + path.string());
		}
		std::string text;
		char buf[1 << 16];
		int n = 0;
		while ((n = gzread(gz, buf, sizeof buf)) > 0) {
			text.append(buf, static_cast<std::size_t>(n));
		}
		int errnum = 0;
		const char *msg = gzerror(gz, &errnum);
		gzclose(gz);
		if (n < 0 || (errnum != Z_OK && errnum != Z_STREAM_END)) {
			throw IoError(path.string() + ": " + (msg ? msg : "gzip read failed"));
		}
		return text;
	}
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw IoError("cannot open " + path.string());
	}
	std::ostringstream ss;
	ss << in.rdbuf();
	return std::move(ss).str();
}

void write_text_file(const std::filesystem::path &path, std::string_view text) {
	if (ends_with_gz(path)) {
		gzFile gz = gzopen(path.c_str(), "wb");
		if (!gz) {
			throw IoError("cannot open " + path.string() + " for writing");
		}
		std::size_t done = 0;
		while (done < text.size()) {
			const unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(text.size() - done, 1u << 20));
			if (gzwrite(gz, text.data() + done, chunk) != static_cast<int>(chunk)) {
				gzclose(gz);
				throw IoError("gzip write failed for " + path.string());
			}
			done += chunk;
		}
		gzclose(gz);
		return;
	}
	std::ofstream out(path, std::ios::binary | std::ios::trunc);
	if (!out) {
		throw IoError("cannot open " + path.string() + " for writing");
	}
	out.write(text.data(), static_cast<std::streamsize>(text.size()));
	if (!out) {
		throw IoError("failed writing " + path.string());
	}
}

std::vector<PacketRecord> read_flow_file(const std::filesystem::path &path) {
	return parse_flow_csv(read_text_file(path));
}

std::string format_flow_record(const PacketRecord &record) {
	std::string line = std::to_string(record.timestamp_us);
	line += ',';
	line += format_ipv4(record.src);
	line += ',';
	line += format_ipv4(record.dst);
	line += ',';
	line += std::to_string(record.dst_port);
	return line;
}

std::vector<WindowSample> window_stream(std::span<const PacketRecord> records, const SamplingConfig &cfg) {
	const std::int64_t unit_us = cfg.unit_time_us();
	std::vector<WindowSample> windows;
	if (records.empty()) {
		return windows;
	}

	std::size_t reordered = 0;
	std::int64_t last_ts = 0;
	std::int64_t max_ts = 0;
	for (const auto &r : records) {
		if (r.timestamp_us < last_ts) {
			++reordered;
		}
		last_ts = r.timestamp_us;
		max_ts = std::max(max_ts, r.timestamp_us);
	}
	if (reordered > 0) {
		spdlog::warn("{} record(s) arrived out of timestamp order; bucketing by value", reordered);
	}

	const auto count = static_cast<std::size_t>(max_ts / unit_us) + 1;
	windows.resize(count);
	for (std::size_t k = 0; k < count; ++k) {
		windows[k].index = k;
		windows[k].start = static_cast<double>(static_cast<std::int64_t>(k) * unit_us) * 1e-6;
	}
	for (const auto &r : records) {
		auto &w = windows[static_cast<std::size_t>(r.timestamp_us / unit_us)];
		w.records.push_back(r);
		++w.access_counts[r.src];
	}
	return windows;
}

} // namespace floodsense
