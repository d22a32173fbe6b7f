#pragma once

// Differencing, integration and correlation diagnostics on Eigen column
// vectors. Everything here is templated on the expression type, so blocks,
// maps and lazy expressions can be passed without a copy.

#include "floodsense/error.hpp"

#include <Eigen/Core>

#include <cmath>
#include <string>

namespace floodsense::ts {

template <typename Derived>
using ColumnOf = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>;

/// d-fold first differences; the result is `order` elements shorter.
template <typename Derived>
ColumnOf<Derived> difference(const Eigen::MatrixBase<Derived> &series, int order) {
	if (order < 0) {
		throw ConfigError("difference: negative order");
	}
	if (series.size() <= order) {
		throw DataError("difference: series of length " + std::to_string(series.size()) +
		                " is too short for order " + std::to_string(order));
	}
	ColumnOf<Derived> out = series.reshaped();
	for (int i = 0; i < order; ++i) {
		const Eigen::Index n = out.size();
		out = (out.tail(n - 1) - out.head(n - 1)).eval();
	}
	return out;
}

/// Inverse of difference(). `anchors` holds the first d values of the
/// original series, where d = anchors.size(); the result is anchors followed
/// by the reconstructed values, so integrate(difference(x, d), x.head(d)) == x.
template <typename DerivedD, typename DerivedA>
ColumnOf<DerivedD> integrate(const Eigen::MatrixBase<DerivedD> &diffed, const Eigen::MatrixBase<DerivedA> &anchors) {
	using Scalar = typename DerivedD::Scalar;
	const Eigen::Index d = anchors.size();
	const Eigen::Index n = diffed.size();
	ColumnOf<DerivedD> out(d + n);
	for (Eigen::Index i = 0; i < d; ++i) {
		out[i] = static_cast<Scalar>(anchors(i));
	}
	// x_j = w_{j-d} - sum_{i=1..d} (-1)^i C(d, i) x_{j-i}
	Eigen::Matrix<Scalar, Eigen::Dynamic, 1> coeff(d + 1);
	coeff[0] = Scalar(1);
	for (Eigen::Index i = 1; i <= d; ++i) {
		coeff[i] = -coeff[i - 1] * static_cast<Scalar>(d - i + 1) / static_cast<Scalar>(i);
	}
	for (Eigen::Index j = d; j < d + n; ++j) {
		Scalar x = diffed(j - d);
		for (Eigen::Index i = 1; i <= d; ++i) {
			x -= coeff[i] * out[j - i];
		}
		out[j] = x;
	}
	return out;
}

/// Sample autocorrelation for lags 0..max_lag (biased autocovariance, mean
/// removed). acf[0] is exactly one. Throws DataError for a constant series.
template <typename Derived>
ColumnOf<Derived> acf(const Eigen::MatrixBase<Derived> &series, int max_lag) {
	using Scalar = typename Derived::Scalar;
	const Eigen::Index n = series.size();
	if (max_lag < 0 || n <= max_lag) {
		throw DataError("acf: need more than " + std::to_string(max_lag) + " observations, have " + std::to_string(n));
	}
	const ColumnOf<Derived> centered = series.reshaped().array() - series.mean();
	const Scalar c0 = centered.squaredNorm();
	if (!(c0 > Scalar(0))) {
		throw DataError("acf: correlation is undefined for a constant series");
	}
	ColumnOf<Derived> out(max_lag + 1);
	out[0] = Scalar(1);
	for (int h = 1; h <= max_lag; ++h) {
		out[h] = centered.tail(n - h).dot(centered.head(n - h)) / c0;
	}
	return out;
}

/// Partial autocorrelation for lags 0..max_lag via the Durbin-Levinson
/// recursion on the sample acf; pacf[0] is one by convention.
template <typename Derived>
ColumnOf<Derived> pacf(const Eigen::MatrixBase<Derived> &series, int max_lag) {
	using Scalar = typename Derived::Scalar;
	const ColumnOf<Derived> rho = acf(series, max_lag);
	ColumnOf<Derived> out(max_lag + 1);
	out[0] = Scalar(1);
	ColumnOf<Derived> phi = ColumnOf<Derived>::Zero(max_lag + 1);
	ColumnOf<Derived> prev = phi;
	Scalar v = Scalar(1);
	for (int k = 1; k <= max_lag; ++k) {
		Scalar num = rho[k];
		for (int j = 1; j < k; ++j) {
			num -= prev[j] * rho[k - j];
		}
		const Scalar kk = v > Scalar(0) ? num / v : Scalar(0);
		phi[k] = kk;
		for (int j = 1; j < k; ++j) {
			phi[j] = prev[j] - kk * prev[k - j];
		}
		v *= (Scalar(1) - kk * kk);
		out[k] = kk;
		prev = phi;
	}
	return out;
}

/// Two-sided 95% band for the acf of white noise of length n.
inline double white_noise_band(Eigen::Index n) {
	return 1.96 / std::sqrt(static_cast<double>(n));
}

/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

/// Upper tail of the chi-square distribution.
inline double chi_square_sf(double x, double dof) {
	return x <= 0.0 ? 1.0 : gamma_q(0.5 * dof, 0.5 * x);
}

struct LjungBoxResult {
	double statistic = 0.0;
	int lags = 0;
	int dof = 0;
	double p_value = 1.0;
};

/// Default number of lags: min(20, n / 5), at least 1.
inline int default_ljung_box_lags(Eigen::Index n) {
	return static_cast<int>(std::max<Eigen::Index>(1, std::min<Eigen::Index>(20, n / 5)));
}

/// Q = n(n+2) sum_{h=1..lags} acf[h]^2 / (n-h), compared against a
/// chi-square with max(1, lags - fitted_params) degrees of freedom.
template <typename Derived>
LjungBoxResult ljung_box(const Eigen::MatrixBase<Derived> &residuals, int lags, int fitted_params = 0) {
	const Eigen::Index n = residuals.size();
	if (lags < 1 || n <= lags) {
		throw DataError("ljung_box: need more than " + std::to_string(lags) + " residuals, have " + std::to_string(n));
	}
	const auto rho = acf(residuals.template cast<double>(), lags);
	const double nd = static_cast<double>(n);
	double q = 0.0;
	for (int h = 1; h <= lags; ++h) {
		q += rho[h] * rho[h] / (nd - h);
	}
	LjungBoxResult r;
	r.statistic = nd * (nd + 2.0) * q;
	r.lags = lags;
	r.dof = std::max(1, lags - fitted_params);
	r.p_value = chi_square_sf(r.statistic, r.dof);
	return r;
}

} // namespace floodsense::ts
