#pragma once

#include "floodsense/ipd.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace floodsense {

/// One packet: capture time, source, destination and destination port.
struct PacketRecord {
	std::int64_t timestamp_us = 0; ///< microseconds since stream start
	IpKey src{};
	IpKey dst{};
	std::uint16_t dst_port = 0;

	double seconds() const noexcept {
		return static_cast<double>(timestamp_us) * 1e-6;
	}

	friend bool operator==(const PacketRecord &, const PacketRecord &) = default;
};

using AccessCounts = std::unordered_map<IpKey, std::uint32_t>;

/// All records of one sampling interval [k * unit, (k + 1) * unit).
struct WindowSample {
	std::size_t index = 0;
	double start = 0.0;
	std::vector<PacketRecord> records;
	AccessCounts access_counts; ///< packets per source address
};

enum class StreamRole { Training, Detection };

struct SamplingConfig {
	double unit_time = 0.8; ///< seconds
	StreamRole role = StreamRole::Detection;

	/// Unit time in whole microseconds; throws ConfigError unless positive.
	std::int64_t unit_time_us() const;
};

/// Parses a dotted-quad IPv4 or colon-hex IPv6 address. IPv6 is folded with
/// map_ipv6(). Returns false on malformed input.
bool parse_address(std::string_view text, IpKey &out) noexcept;

/// Dotted-quad rendering of a 32-bit key.
std::string format_ipv4(IpKey key);

/// Parses `timestamp_us,src_ip,dst_ip,dst_port`. `line_number` is used only
/// for error reporting.
PacketRecord parse_flow_record(std::string_view line, std::size_t line_number = 1);

/// Parses a whole CSV buffer. Blank lines, `#` comments and the header line
/// `timestamp_us,src_ip,dst_ip,dst_port` are skipped.
std::vector<PacketRecord> parse_flow_csv(std::string_view text);

/// Reads a flow CSV from disk; names ending in `.gz` are gunzipped.
std::vector<PacketRecord> read_flow_file(const std::filesystem::path &path);

/// Reads a text file, gunzipping `.gz` names.
std::string read_text_file(const std::filesystem::path &path);

/// Writes text, gzip-compressing when the name ends in `.gz`.
void write_text_file(const std::filesystem::path &path, std::string_view text);

std::string format_flow_record(const PacketRecord &record);

inline constexpr std::string_view kFlowCsvHeader = "timestamp_us,src_ip,dst_ip,dst_port";

/// Buckets records into consecutive windows. Every index from 0 to the last
/// occupied window is emitted, empty or not. Out-of-order records are placed
/// by timestamp value and reported once as a warning.
std::vector<WindowSample> window_stream(std::span<const PacketRecord> records, const SamplingConfig &cfg);

} // namespace floodsense
