#include "floodsense/error.hpp"
#include "floodsense/timeseries.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace floodsense;
using Eigen::VectorXd;

TEST_CASE("difference") {
	VectorXd x(4);
	x << 1, 2, 3, 4;
	CHECK(ts::difference(x, 1) == VectorXd::Ones(3));
	VectorXd sq(5);
	sq << 1, 4, 9, 16, 25;
	CHECK(ts::difference(sq, 2) == VectorXd::Constant(3, 2.0));
	CHECK(ts::difference(sq, 0) == sq);
	CHECK_THROWS_AS(ts::difference(x, 4), DataError);
	CHECK_THROWS_AS(ts::difference(x, -1), ConfigError);
}

TEST_CASE("difference accepts expressions") {
	Eigen::MatrixXd m(3, 2);
	m << 1, 10, 3, 20, 6, 40;
	const VectorXd d = ts::difference(m.col(1), 1);
	REQUIRE(d.size() == 2);
	CHECK(d[0] == 10.0);
	CHECK(d[1] == 20.0);
	const Eigen::VectorXf f = ts::difference(Eigen::Vector4f(1, 2, 4, 8), 1);
	CHECK(f[2] == 4.0f);
}

TEST_CASE("integrate") {
	VectorXd sq(5);
	sq << 1, 4, 9, 16, 25;
	CHECK(ts::integrate(ts::difference(sq, 2), sq.head(2)) == sq);
	VectorXd zeros = VectorXd::Zero(4);
	const VectorXd ap = ts::integrate(zeros, Eigen::Vector2d(5, 7));
	VectorXd expected(6);
	expected << 5, 7, 9, 11, 13, 15;
	CHECK(ap == expected);
	CHECK(ts::integrate(sq, VectorXd(0)) == sq);
}

TEST_CASE("integer-valued round trip is exact") {
	std::mt19937_64 rng(1);
	std::uniform_int_distribution<int> v(-1000, 1000);
	for (int trial = 0; trial < 100; ++trial) {
		VectorXd x(50);
		for (auto &e : x) {
			e = v(rng);
		}
		for (int d = 0; d <= 2; ++d) {
			CHECK(ts::integrate(ts::difference(x, d), x.head(d)) == x);
		}
	}
}

TEST_CASE("real-valued round trip") {
	for (int trial = 0; trial < 100; ++trial) {
		const VectorXd x = oracle::white_noise(200, 500 + trial) * 100.0;
		for (int d = 0; d <= 2; ++d) {
			const VectorXd back = ts::integrate(ts::difference(x, d), x.head(d));
			CHECK((back - x).cwiseAbs().maxCoeff() < 1e-9);
		}
	}
}

TEST_CASE("acf basics") {
	const VectorXd x = oracle::white_noise(300, 3);
	const VectorXd r = ts::acf(x, 10);
	CHECK(r[0] == 1.0);
	const VectorXd neg = ts::acf(-x, 10);
	const VectorXd affine = ts::acf((3.0 * x.array() + 7.0).matrix(), 10);
	CHECK((neg - r).cwiseAbs().maxCoeff() < 1e-12);
	CHECK((affine - r).cwiseAbs().maxCoeff() < 1e-12);
	CHECK_THROWS_AS(ts::acf(VectorXd::Constant(20, 4.0), 3), DataError);
	CHECK_THROWS_AS(ts::acf(x, 300), DataError);
}

TEST_CASE("acf of white noise stays in the band") {
	const double band = ts::white_noise_band(1000);
	int inside = 0;
	for (int trial = 0; trial < 20; ++trial) {
		const VectorXd r = ts::acf(oracle::white_noise(1000, 17 + trial), 20);
		for (int h = 1; h <= 20; ++h) {
			inside += std::abs(r[h]) < band;
		}
	}
	CHECK(inside / 400.0 >= 0.93);
}

TEST_CASE("AR(1) acf decays geometrically and pacf cuts off") {
	const VectorXd x = oracle::simulate_arima(VectorXd::Constant(1, 0.8), VectorXd(0), 0, 5000, 1.0, 9);
	const VectorXd r = ts::acf(x, 5);
	for (int h = 1; h <= 5; ++h) {
		CHECK(std::abs(r[h] - std::pow(0.8, h)) < 0.1);
	}
	const VectorXd p = ts::pacf(x, 10);
	CHECK(p[1] == doctest::Approx(r[1]));
	const double band = ts::white_noise_band(5000);
	int inside = 0;
	for (int h = 2; h <= 10; ++h) {
		inside += std::abs(p[h]) < band;
	}
	CHECK(inside >= 8);
}

TEST_CASE("chi-square upper tail") {
	CHECK(ts::chi_square_sf(3.0, 1) == doctest::Approx(0.08326451666355042).epsilon(1e-10));
	CHECK(ts::chi_square_sf(10.0, 5) == doctest::Approx(0.07523524614651217).epsilon(1e-10));
	CHECK(ts::chi_square_sf(31.41, 20) == doctest::Approx(0.05000523920231515).epsilon(1e-10));
	CHECK(ts::chi_square_sf(0.5, 3) == doctest::Approx(0.9188914116546758).epsilon(1e-10));
	CHECK(ts::chi_square_sf(100.0, 18) == doctest::Approx(2.2149956729976326e-13).epsilon(1e-8));
	CHECK(ts::chi_square_sf(18.0, 17) == doctest::Approx(0.388840878567665).epsilon(1e-10));
	CHECK(ts::gamma_q(0.5, 0.1) == doctest::Approx(0.6547208460185768).epsilon(1e-10));
	CHECK(ts::gamma_q(2.5, 7.0) == doctest::Approx(0.01560941610026691).epsilon(1e-10));
	CHECK(ts::gamma_q(10.0, 3.0) == doctest::Approx(0.9988975118698845).epsilon(1e-10));
	CHECK(ts::chi_square_sf(0.0, 4) == 1.0);
}

TEST_CASE("Ljung-Box") {
	int passed = 0;
	for (int trial = 0; trial < 100; ++trial) {
		const auto lb = ts::ljung_box(oracle::white_noise(1000, 1000 + trial), 20);
		CHECK(lb.statistic >= 0.0);
		CHECK(lb.dof == 20);
		passed += lb.p_value > 0.05;
	}
	CHECK(passed >= 88);

	const VectorXd ar = oracle::simulate_arima(VectorXd::Constant(1, 0.9), VectorXd(0), 0, 1000, 1.0, 5);
	CHECK(ts::ljung_box(ar, 20).p_value < 0.01);

	CHECK(ts::ljung_box(oracle::white_noise(100, 1), 20, 3).dof == 17);
	CHECK(ts::ljung_box(oracle::white_noise(100, 1), 2, 3).dof == 1);
	CHECK(ts::default_ljung_box_lags(1000) == 20);
	CHECK(ts::default_ljung_box_lags(50) == 10);
	CHECK(ts::default_ljung_box_lags(3) == 1);
	CHECK_THROWS_AS(ts::ljung_box(oracle::white_noise(10, 1), 10), DataError);
}
