#include "floodsense/timeseries.hpp"

#include <cmath>
#include <limits>

namespace floodsense::ts {

namespace {

constexpr int kMaxTerms = 1000;
constexpr double kEps = 1e-15;

// P(a, x) by its power series; converges quickly for x < a + 1.
double gamma_p_series(double a, double x) {
	double term = 1.0 / a;
	double sum = term;
	double ap = a;
	for (int n = 0; n < kMaxTerms; ++n) {
		ap += 1.0;
		term *= x / ap;
		sum += term;
		if (std::abs(term) < std::abs(sum) * kEps) {
			break;
		}
	}
	return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by Lentz's continued fraction; used for x >= a + 1.
double gamma_q_fraction(double a, double x) {
	constexpr double tiny = std::numeric_limits<double>::min() / kEps;
	double b = x + 1.0 - a;
	double c = 1.0 / tiny;
	double d = 1.0 / b;
	double h = d;
	for (int i = 1; i <= kMaxTerms; ++i) {
		const double an = -i * (i - a);
		b += 2.0;
		d = an * d + b;
		if (std::abs(d) < tiny) {
			d = tiny;
		}
		c = b + an / c;
		if (std::abs(c) < tiny) {
			c = tiny;
		}
		d = 1.0 / d;
		const double delta = d * c;
		h *= delta;
		if (std::abs(delta - 1.0) < kEps) {
			break;
		}
	}
	return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace

double gamma_q(double a, double x) {
	if (!(a > 0.0) || x < 0.0 || std::isnan(x)) {
		return std::numeric_limits<double>::quiet_NaN();
	}
	if (x == 0.0) {
		return 1.0;
	}
	if (std::isinf(x)) {
		return 0.0;
	}
	if (x < a + 1.0) {
		return 1.0 - gamma_p_series(a, x);
	}
	return gamma_q_fraction(a, x);
}

} // namespace floodsense::ts
