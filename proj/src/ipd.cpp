#include "floodsense/ipd.hpp"

#include "floodsense/error.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

namespace floodsense {

namespace {

constexpr char kMagic[4] = {'I', 'P', 'D', '1'};
constexpr unsigned kMaxPageBits = 16;

constexpr std::uint32_t fmix32(std::uint32_t h) noexcept {
	h ^= h >> 16;
	h *= 0x85ebca6bu;
	h ^= h >> 13;
	h *= 0xc2b2ae35u;
	h ^= h >> 16;
	return h;
}

void put_u32_le(char *out, std::uint32_t v) {
	for (int i = 0; i < 4; ++i) {
		out[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
	}
}

std::uint32_t get_u32_le(const char *in) {
	std::uint32_t v = 0;
	for (int i = 0; i < 4; ++i) {
		v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[i])) << (8 * i);
	}
	return v;
}

std::uint64_t to_le(std::uint64_t w) {
	if constexpr (std::endian::native == std::endian::little) {
		return w;
	} else {
		return __builtin_bswap64(w);
	}
}

} // namespace

std::uint32_t map_ipv6(const Ipv6Bytes &addr) noexcept {
	std::uint32_t h = 0x811c9dc5u;
	for (std::uint8_t b : addr) {
		h ^= b;
		h *= 0x01000193u;
	}
	return h;
}

IpBitmap::IpBitmap(unsigned bits) : bits_(bits), page_bits_(std::min(bits, kMaxPageBits)) {
	if (bits < 1 || bits > 32) {
		throw ConfigError("IpBitmap: bits must be in [1, 32], got " + std::to_string(bits));
	}
	pages_.resize(std::size_t{1} << (bits_ - page_bits_));
}

IpBitmap::IpBitmap(const IpBitmap &other)
    : bits_(other.bits_), page_bits_(other.page_bits_), marked_(other.marked_), pages_(other.pages_.size()) {
	const std::size_t words = words_per_page();
	for (std::size_t i = 0; i < pages_.size(); ++i) {
		if (other.pages_[i]) {
			pages_[i] = std::make_unique<Word[]>(words);
			std::copy_n(other.pages_[i].get(), words, pages_[i].get());
		}
	}
}

IpBitmap &IpBitmap::operator=(const IpBitmap &other) {
	if (this != &other) {
		IpBitmap copy(other);
		*this = std::move(copy);
	}
	return *this;
}

std::uint32_t IpBitmap::slot_of(IpKey key) const noexcept {
	const std::uint32_t raw = to_u32(key);
	if (bits_ == 32) {
		return raw;
	}
	return fmix32(raw) >> (32 - bits_);
}

IpBitmap::Word *IpBitmap::page_for_write(std::uint32_t slot) {
	auto &page = pages_[slot >> page_bits_];
	if (!page) {
		page = std::make_unique<Word[]>(words_per_page());
	}
	return page.get();
}

void IpBitmap::mark(IpKey key) {
	const std::uint32_t slot = slot_of(key);
	const std::uint32_t in_page = slot & ((std::uint32_t{1} << page_bits_) - 1);
	Word &word = page_for_write(slot)[in_page >> 6];
	const Word bit = Word{1} << (in_page & 63);
	if (!(word & bit)) {
		word |= bit;
		++marked_;
	}
}

void IpBitmap::unmark(IpKey key) {
	const std::uint32_t slot = slot_of(key);
	auto &page = pages_[slot >> page_bits_];
	if (!page) {
		return;
	}
	const std::uint32_t in_page = slot & ((std::uint32_t{1} << page_bits_) - 1);
	Word &word = page[in_page >> 6];
	const Word bit = Word{1} << (in_page & 63);
	if (word & bit) {
		word &= ~bit;
		--marked_;
	}
}

bool IpBitmap::is_marked(IpKey key) const noexcept {
	const std::uint32_t slot = slot_of(key);
	const auto &page = pages_[slot >> page_bits_];
	if (!page) {
		return false;
	}
	const std::uint32_t in_page = slot & ((std::uint32_t{1} << page_bits_) - 1);
	return (page[in_page >> 6] >> (in_page & 63)) & 1u;
}

std::uint64_t IpBitmap::scan_population() const noexcept {
	std::uint64_t total = 0;
	const std::size_t words = words_per_page();
	for (const auto &page : pages_) {
		if (!page) {
			continue;
		}
		for (std::size_t i = 0; i < words; ++i) {
			total += static_cast<std::uint64_t>(std::popcount(page[i]));
		}
	}
	return total;
}

std::size_t IpBitmap::allocated_pages() const noexcept {
	return static_cast<std::size_t>(std::count_if(pages_.begin(), pages_.end(), [](const auto &p) { return p != nullptr; }));
}

void IpBitmap::save(const std::filesystem::path &path) const {
	std::ofstream out(path, std::ios::binary | std::ios::trunc);
	if (!out) {
		throw IoError("cannot open " + path.string() + " for writing");
	}
	char header[8];
	std::memcpy(header, kMagic, 4);
	put_u32_le(header + 4, bits_);
	out.write(header, sizeof header);

	// Logical page size in bytes; pages narrower than a word only exist when bits < 6.
	const std::uint64_t page_bytes = std::max<std::uint64_t>(1, (std::uint64_t{1} << page_bits_) / 8);
	const std::size_t words = words_per_page();
	std::vector<char> buffer(words * sizeof(Word));
	for (std::size_t i = 0; i < pages_.size(); ++i) {
		if (!pages_[i]) {
			out.seekp(static_cast<std::streamoff>(page_bytes), std::ios::cur);
			continue;
		}
		for (std::size_t w = 0; w < words; ++w) {
			const Word le = to_le(pages_[i][w]);
			std::memcpy(buffer.data() + w * sizeof(Word), &le, sizeof(Word));
		}
		out.write(buffer.data(), static_cast<std::streamsize>(page_bytes));
	}
	out.close();
	if (!out) {
		throw IoError("failed writing " + path.string());
	}
	// Trailing holes are not materialised by seekp alone.
	const std::uint64_t expected = 8 + page_bytes * pages_.size();
	std::filesystem::resize_file(path, expected);
}

IpBitmap IpBitmap::load(const std::filesystem::path &path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw IoError("cannot open " + path.string());
	}
	char header[8];
	if (!in.read(header, sizeof header)) {
		throw CorruptFileError(path.string() + ": truncated IPD header");
	}
	if (std::memcmp(header, kMagic, 4) != 0) {
		throw VersionError(path.string() + ": not an IPD1 snapshot");
	}
	const std::uint32_t bits = get_u32_le(header + 4);
	if (bits < 1 || bits > 32) {
		throw CorruptFileError(path.string() + ": invalid bit width " + std::to_string(bits));
	}
	IpBitmap bitmap(bits);
	const std::uint64_t page_bytes = std::max<std::uint64_t>(1, (std::uint64_t{1} << bitmap.page_bits_) / 8);
	const std::uint64_t expected = 8 + page_bytes * bitmap.pages_.size();
	std::error_code ec;
	const auto actual = std::filesystem::file_size(path, ec);
	if (ec || actual != expected) {
		throw CorruptFileError(path.string() + ": expected " + std::to_string(expected) + " bytes, found " +
		                       std::to_string(ec ? 0 : actual));
	}

	const std::size_t words = bitmap.words_per_page();
	std::vector<char> buffer(words * sizeof(Word), 0);
	for (std::size_t i = 0; i < bitmap.pages_.size(); ++i) {
		if (!in.read(buffer.data(), static_cast<std::streamsize>(page_bytes))) {
			throw CorruptFileError(path.string() + ": truncated bit array");
		}
		if (std::all_of(buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(page_bytes),
		                [](char c) { return c == 0; })) {
			continue;
		}
		auto page = std::make_unique<Word[]>(words);
		for (std::size_t w = 0; w < words; ++w) {
			Word le;
			std::memcpy(&le, buffer.data() + w * sizeof(Word), sizeof(Word));
			page[w] = to_le(le);
			bitmap.marked_ += static_cast<std::uint64_t>(std::popcount(page[w]));
		}
		bitmap.pages_[i] = std::move(page);
	}
	return bitmap;
}

bool operator==(const IpBitmap &lhs, const IpBitmap &rhs) noexcept {
	if (lhs.bits_ != rhs.bits_ || lhs.marked_ != rhs.marked_) {
		return false;
	}
	const std::size_t words = lhs.words_per_page();
	auto is_zero = [words](const IpBitmap::Word *page) {
		return std::all_of(page, page + words, [](IpBitmap::Word w) { return w == 0; });
	};
	for (std::size_t i = 0; i < lhs.pages_.size(); ++i) {
		const auto *a = lhs.pages_[i].get();
		const auto *b = rhs.pages_[i].get();
		if (a && b) {
			if (!std::equal(a, a + words, b)) {
				return false;
			}
		} else if (a && !is_zero(a)) {
			return false;
		} else if (b && !is_zero(b)) {
			return false;
		}
	}
	return true;
}

} // namespace floodsense
