#include "floodsense/error.hpp"
#include "floodsense/ipd.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <unordered_set>

using namespace floodsense;

namespace {

std::filesystem::path scratch(const char *name) {
	const auto dir = std::filesystem::temp_directory_path() / "floodsense_ipd_test";
	std::filesystem::create_directories(dir);
	return dir / name;
}

} // namespace

TEST_CASE("byte_bit_offset") {
	constexpr auto loc = byte_bit_offset(1232040553u);
	static_assert(loc.byte_offset == 154005069u);
	CHECK(loc.byte_offset == 0x092DEE4Du);
	CHECK(loc.bit_offset == 1);
	CHECK(byte_bit_offset(0) == BitLocation{0, 0});
	CHECK(byte_bit_offset(4294967295u) == BitLocation{536870911u, 7});
}

TEST_CASE("byte_bit_offset recombines") {
	std::mt19937 rng(3);
	for (int i = 0; i < 10000; ++i) {
		const std::uint32_t ip = rng();
		const auto loc = byte_bit_offset(ip);
		CHECK(8ull * loc.byte_offset + loc.bit_offset == ip);
	}
}

TEST_CASE("mark and count") {
	IpBitmap bm;
	CHECK(bm.count_marked() == 0);
	CHECK_FALSE(bm.is_marked(ip_key(1232040553u)));
	bm.mark(ip_key(1232040553u));
	CHECK(bm.is_marked(ip_key(1232040553u)));
	CHECK_FALSE(bm.is_marked(ip_key(1232040552u)));
	bm.mark(ip_key(1232040553u));
	CHECK(bm.count_marked() == 1);
	bm.mark(ip_key(0));
	bm.mark(ip_key(0xFFFFFFFFu));
	CHECK(bm.count_marked() == 3);
	bm.unmark(ip_key(0));
	bm.unmark(ip_key(0));
	CHECK(bm.count_marked() == 2);
	CHECK(bm.scan_population() == 2);
	CHECK(bm.mode() == IpBitmap::Mode::Ipv4Direct);
}

TEST_CASE("random mark/unmark agrees with a hash set") {
	IpBitmap bm;
	std::unordered_set<std::uint32_t> ref;
	std::mt19937_64 rng(99);
	std::vector<std::uint32_t> ips(100000);
	for (auto &ip : ips) {
		ip = static_cast<std::uint32_t>(rng());
		bm.mark(ip_key(ip));
		ref.insert(ip);
	}
	for (std::size_t i = 0; i < ips.size(); i += 2) {
		bm.unmark(ip_key(ips[i]));
		ref.erase(ips[i]);
	}
	CHECK(bm.count_marked() == ref.size());
	CHECK(bm.scan_population() == ref.size());
	for (auto ip : ips) {
		REQUIRE(bm.is_marked(ip_key(ip)) == (ref.count(ip) == 1));
	}
	for (int i = 0; i < 10000; ++i) {
		const auto ip = static_cast<std::uint32_t>(rng());
		REQUIRE(bm.is_marked(ip_key(ip)) == (ref.count(ip) == 1));
	}
}

TEST_CASE("map_ipv6 golden value and determinism") {
	CHECK(map_ipv6(Ipv6Bytes{}) == 0x69691905u);
	Ipv6Bytes a{0x20, 0x01, 0x0d, 0xb8};
	a[15] = 1;
	CHECK(map_ipv6(a) == map_ipv6(a));
	Ipv6Bytes b = a;
	b[15] = 2;
	CHECK(map_ipv6(a) != map_ipv6(b));
}

TEST_CASE("map_ipv6 collision rate near the birthday bound") {
	std::mt19937_64 rng(2024);
	const std::size_t n = 1000000;
	std::vector<std::uint32_t> digests;
	digests.reserve(n);
	for (std::size_t i = 0; i < n; ++i) {
		Ipv6Bytes addr;
		const std::uint64_t hi = rng(), lo = rng();
		for (int k = 0; k < 8; ++k) {
			addr[k] = static_cast<std::uint8_t>(hi >> (8 * k));
			addr[8 + k] = static_cast<std::uint8_t>(lo >> (8 * k));
		}
		digests.push_back(map_ipv6(addr));
	}
	std::sort(digests.begin(), digests.end());
	const auto distinct = static_cast<std::size_t>(std::unique(digests.begin(), digests.end()) - digests.begin());
	const double fraction = static_cast<double>(n - distinct) / static_cast<double>(n);
	// Expected n / 2^33 = 1.16e-4 with a standard deviation near 1.1e-5.
	CHECK(fraction > 0.7e-4);
	CHECK(fraction < 1.6e-4);
}

TEST_CASE("hashed mode keeps membership for marked keys") {
	IpBitmap bm(20);
	CHECK(bm.mode() == IpBitmap::Mode::Hashed);
	CHECK(bm.capacity() == (1u << 20));
	std::mt19937 rng(5);
	std::vector<std::uint32_t> ips(2000);
	for (auto &ip : ips) {
		ip = rng();
		bm.mark(ip_key(ip));
	}
	for (auto ip : ips) {
		CHECK(bm.is_marked(ip_key(ip)));
		CHECK(bm.slot_of(ip_key(ip)) < bm.capacity());
	}
	CHECK(bm.count_marked() == bm.scan_population());
	CHECK(bm.count_marked() <= ips.size());
	CHECK_THROWS_AS(IpBitmap(0), ConfigError);
	CHECK_THROWS_AS(IpBitmap(33), ConfigError);
}

TEST_CASE("copies are deep") {
	IpBitmap a;
	a.mark(ip_key(7));
	IpBitmap b = a;
	b.mark(ip_key(8));
	CHECK_FALSE(a.is_marked(ip_key(8)));
	CHECK(b.is_marked(ip_key(7)));
	CHECK_FALSE(a == b);
	b.unmark(ip_key(8));
	CHECK(a == b);
}

TEST_CASE("snapshot round trip") {
	for (unsigned bits : {32u, 16u}) {
		IpBitmap bm(bits);
		std::mt19937 rng(bits);
		for (int i = 0; i < 5000; ++i) {
			bm.mark(ip_key(rng()));
		}
		const auto path = scratch("snap.ipd");
		bm.save(path);
		const IpBitmap back = IpBitmap::load(path);
		CHECK(back == bm);
		CHECK(back.count_marked() == bm.count_marked());
		CHECK(back.bits() == bits);
	}
}

TEST_CASE("snapshot errors") {
	IpBitmap bm(16);
	bm.mark(ip_key(12345));
	const auto path = scratch("bad.ipd");
	bm.save(path);
	std::filesystem::resize_file(path, std::filesystem::file_size(path) - 100);
	CHECK_THROWS_AS(IpBitmap::load(path), CorruptFileError);

	{
		std::ofstream out(path, std::ios::binary | std::ios::trunc);
		out.write("NOPE\x10\0\0\0", 8);
	}
	CHECK_THROWS_AS(IpBitmap::load(path), VersionError);
	CHECK_THROWS_AS(IpBitmap::load(scratch("absent.ipd")), IoError);
}
