#include "floodsense/prefilter.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace floodsense;

namespace {

constexpr IpKey A = ip_key(1), B = ip_key(2), C = ip_key(3);
constexpr IpKey X = ip_key(100), Y = ip_key(101), Z = ip_key(102);

std::vector<std::pair<IpKey, IpKey>> pairs(const FilteredWindow &w) {
	std::vector<std::pair<IpKey, IpKey>> out;
	for (const auto &c : w.classes) {
		out.emplace_back(c.src, c.dst);
	}
	return out;
}

std::vector<FlowClass> cls(std::initializer_list<std::pair<IpKey, IpKey>> ps) {
	std::vector<FlowClass> out;
	for (const auto &[s, d] : ps) {
		out.push_back({s, d, 1});
	}
	return out;
}

WindowSample window_of(std::initializer_list<std::pair<IpKey, IpKey>> ps) {
	WindowSample w;
	std::int64_t t = 0;
	for (const auto &[s, d] : ps) {
		w.records.push_back({t++, s, d, 80});
		++w.access_counts[s];
	}
	return w;
}

} // namespace

TEST_CASE("classify groups by pair") {
	const auto classes = classify(window_of({{A, X}, {A, X}, {B, X}}));
	REQUIRE(classes.size() == 2);
	CHECK(classes[0] == FlowClass{A, X, 2});
	CHECK(classes[1] == FlowClass{B, X, 1});
	CHECK(classify(WindowSample{}).empty());
}

TEST_CASE("classify matches a naive group-by") {
	std::mt19937_64 rng(8);
	std::uniform_int_distribution<std::uint32_t> ip(1, 30);
	WindowSample w;
	for (int i = 0; i < 1000; ++i) {
		const PacketRecord r{i, ip_key(ip(rng)), ip_key(100 + ip(rng) % 5), 80};
		w.records.push_back(r);
		++w.access_counts[r.src];
	}
	const auto naive = oracle::group_by_pair(w.records);
	const auto classes = classify(w);
	REQUIRE(classes.size() == naive.size());
	std::uint64_t total = 0;
	for (const auto &c : classes) {
		CHECK(naive.at({to_u32(c.src), to_u32(c.dst)}) == c.packet_count);
		total += c.packet_count;
	}
	CHECK(total == w.records.size());
}

TEST_CASE("delete rules: fan-out source removed first") {
	const auto out = apply_delete_rules(cls({{A, X}, {A, Y}, {B, X}, {C, X}}));
	CHECK(pairs(out) == std::vector<std::pair<IpKey, IpKey>>{{B, X}, {C, X}});
	CHECK(out.access_counts.size() == 2);
	CHECK(out.access_counts.at(B) == 1);
}

TEST_CASE("delete rules: one-to-one removed") {
	CHECK(apply_delete_rules(cls({{A, X}})).classes.empty());
}

TEST_CASE("delete rules: orphaned destinations vanish with their source") {
	const auto out = apply_delete_rules(cls({{A, X}, {B, X}, {C, Y}, {C, Z}}));
	CHECK(pairs(out) == std::vector<std::pair<IpKey, IpKey>>{{A, X}, {B, X}});
}

TEST_CASE("delete rules: duplicated pairs are merged before rule 1") {
	std::vector<FlowClass> in{{A, X, 2}, {A, X, 3}, {B, X, 1}};
	const auto out = apply_delete_rules(in);
	REQUIRE(out.classes.size() == 2);
	CHECK(out.classes[0] == FlowClass{A, X, 5});
	CHECK(out.access_counts.at(A) == 5);
}

TEST_CASE("filter_window keeps index, start and survivor counts") {
	auto w = window_of({{A, X}, {A, X}, {B, X}, {C, Y}, {C, Z}});
	w.index = 4;
	w.start = 3.2;
	const auto f = filter_window(w);
	CHECK(f.index == 4);
	CHECK(f.start == 3.2);
	CHECK(f.access_counts.size() == 2);
	CHECK(f.access_counts.at(A) == 2);
	CHECK_FALSE(f.access_counts.contains(C));

	const auto p = passthrough_window(w);
	CHECK(p.classes.size() == 4);
	CHECK(p.access_counts == w.access_counts);
}

TEST_CASE("random windows match the brute-force filter") {
	std::mt19937_64 rng(77);
	for (int trial = 0; trial < 1000; ++trial) {
		const auto in = oracle::random_classes(rng, 20);
		const auto out = apply_delete_rules(in);
		const auto expected = oracle::brute_force_filter(in);
		REQUIRE(out.classes.size() == expected.size());
		for (const auto &c : out.classes) {
			REQUIRE(expected.at({to_u32(c.src), to_u32(c.dst)}) == c.packet_count);
		}
		CHECK(is_many_to_one(out.classes));
		const auto again = apply_delete_rules(out.classes);
		CHECK(again.classes == out.classes);
	}
}
