#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <vector>

namespace floodsense {

/// 32-bit address key. IPv4 addresses are used verbatim; IPv6 addresses are
/// folded to 32 bits with map_ipv6() at ingestion time.
enum class IpKey : std::uint32_t {};

constexpr std::uint32_t to_u32(IpKey key) noexcept {
	return static_cast<std::uint32_t>(key);
}

constexpr IpKey ip_key(std::uint32_t value) noexcept {
	return static_cast<IpKey>(value);
}

using Ipv6Bytes = std::array<std::uint8_t, 16>;

struct BitLocation {
	std::uint32_t byte_offset;
	std::uint8_t bit_offset; ///< counted from the least-significant bit

	friend bool operator==(const BitLocation &, const BitLocation &) = default;
};

/// Byte and bit position of an address inside a direct-mapped bitmap.
constexpr BitLocation byte_bit_offset(std::uint32_t ip) noexcept {
	return {ip / 8u, static_cast<std::uint8_t>(ip % 8u)};
}

/// 32-bit FNV-1a digest of the 16 address bytes in network order.
/// The all-zero address maps to 0x69691905.
std::uint32_t map_ipv6(const Ipv6Bytes &addr) noexcept;

/// Bit-per-address membership store for the old-user set.
///
/// With `bits == 32` the bitmap is direct-mapped: key k lives at bit k, i.e.
/// byte k / 8, bit k % 8 (LSB first). With `bits < 32` the key is scrambled
/// with the murmur3 finalizer and the top `bits` bits select the slot.
/// Pages of 8 KiB are allocated on first mark; untouched pages read as zero.
///
/// Concurrent readers are safe; writers need exclusive access.
class IpBitmap {
public:
	enum class Mode { Ipv4Direct, Hashed };

	static constexpr unsigned kDefaultBits = 32;

	explicit IpBitmap(unsigned bits = kDefaultBits);

	IpBitmap(const IpBitmap &other);
	IpBitmap &operator=(const IpBitmap &other);
	IpBitmap(IpBitmap &&) noexcept = default;
	IpBitmap &operator=(IpBitmap &&) noexcept = default;
	~IpBitmap() = default;

	void mark(IpKey key);
	void unmark(IpKey key);
	bool is_marked(IpKey key) const noexcept;

	std::uint64_t count_marked() const noexcept {
		return marked_;
	}

	unsigned bits() const noexcept {
		return bits_;
	}
	Mode mode() const noexcept {
		return bits_ == 32 ? Mode::Ipv4Direct : Mode::Hashed;
	}
	/// Size of the logical bit array, 2^bits.
	std::uint64_t capacity() const noexcept {
		return std::uint64_t{1} << bits_;
	}

	/// Slot index that `key` occupies.
	std::uint32_t slot_of(IpKey key) const noexcept;

	/// Population count by full scan of allocated pages.
	std::uint64_t scan_population() const noexcept;

	/// Number of pages currently backed by memory.
	std::size_t allocated_pages() const noexcept;

	/// Writes the `IPD1` snapshot: magic, bits (u32 LE), then the raw bit
	/// array, byte-for-byte. Zero pages are skipped with seeks, so the file is
	/// sparse on filesystems that support holes.
	void save(const std::filesystem::path &path) const;
	static IpBitmap load(const std::filesystem::path &path);

	friend bool operator==(const IpBitmap &lhs, const IpBitmap &rhs) noexcept;

private:
	using Word = std::uint64_t;

	unsigned bits_;
	unsigned page_bits_;
	std::uint64_t marked_ = 0;
	std::vector<std::unique_ptr<Word[]>> pages_;

	std::size_t words_per_page() const noexcept {
		return (std::size_t{1} << page_bits_) / 64 + ((page_bits_ < 6) ? 1 : 0);
	}
	Word *page_for_write(std::uint32_t slot);
};

} // namespace floodsense
