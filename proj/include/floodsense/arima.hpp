#pragma once

#include "floodsense/error.hpp"
#include "floodsense/timeseries.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace floodsense::ts {

/// ARIMA(p, d, q) orders. The default is (2, 2, 1).
struct ArimaSpec {
	int p = 2;
	int d = 2;
	int q = 1;
	/// Estimate a mean for the differenced series; off by default since d >= 1.
	bool include_intercept = false;

	void validate() const;
	/// Shortest series fit_arima accepts: 10 (p + q + 1) + d.
	int min_length() const noexcept {
		return 10 * (p + q + 1) + d;
	}

	friend bool operator==(const ArimaSpec &, const ArimaSpec &) = default;
};

struct FitOptions {
	int max_iterations = 20000; ///< objective evaluations per simplex run
	double tolerance = 1e-10;   ///< relative spread of the simplex values
};

/// Estimation failed. Carries the best objective reached, if any.
class FitError : public Error {
public:
	explicit FitError(const std::string &what, double best_css = -1.0, int evaluations = 0)
	    : Error(what), best_css_(best_css), evaluations_(evaluations) {
	}
	double best_css() const noexcept {
		return best_css_;
	}
	int evaluations() const noexcept {
		return evaluations_;
	}

private:
	double best_css_;
	int evaluations_;
};

/// Smallest root modulus of 1 - c_1 z - ... - c_k z^k; +inf when k = 0.
/// For MA polynomials 1 + t_1 z + ..., pass -t.
double min_root_modulus(const Eigen::VectorXd &coeffs);

/// A fitted or hand-built ARIMA model together with the tail of its data,
/// which is all that forecasting and incremental updates need.
///
/// The differenced process w_t follows
///   w_t - mu = sum_i ar_i (w_{t-i} - mu) + e_t + sum_j ma_j e_{t-j}.
class ArimaModel {
public:
	/// Runs the conditional innovations recursion of fixed coefficients over
	/// `series` to fill residuals, CSS, sigma2 and the forecasting tail.
	static ArimaModel from_coefficients(const ArimaSpec &spec, const Eigen::VectorXd &ar, const Eigen::VectorXd &ma,
	                                    double intercept, const Eigen::VectorXd &series);

	const ArimaSpec &spec() const noexcept {
		return spec_;
	}
	const Eigen::VectorXd &ar() const noexcept {
		return ar_;
	}
	const Eigen::VectorXd &ma() const noexcept {
		return ma_;
	}
	double intercept() const noexcept {
		return intercept_;
	}
	double sigma2() const noexcept {
		return sigma2_;
	}
	double css() const noexcept {
		return css_;
	}
	/// Innovations on the differenced scale; the first p are conditioning zeros.
	const Eigen::VectorXd &residuals() const noexcept {
		return residuals_;
	}
	/// Innovations that enter the objective (residuals minus the first p).
	Eigen::VectorXd effective_residuals() const {
		return residuals_.tail(residuals_.size() - spec_.p);
	}
	int evaluations() const noexcept {
		return evaluations_;
	}

	/// h-step forecast on the original (undifferenced) scale, future
	/// innovations set to zero. Throws ConfigError when h < 1.
	Eigen::VectorXd forecast(int h) const;

	/// Extends the data by one observation with coefficients frozen.
	void append(double observation);

	/// AIC from the conditional sum of squares.
	double aic() const;

	double min_ar_root_modulus() const {
		return min_root_modulus(ar_);
	}
	double min_ma_root_modulus() const {
		return min_root_modulus(-ma_);
	}

private:
	friend ArimaModel fit_arima(const Eigen::VectorXd &, const ArimaSpec &, const FitOptions &);

	ArimaSpec spec_;
	Eigen::VectorXd ar_;
	Eigen::VectorXd ma_;
	double intercept_ = 0.0;
	double sigma2_ = 0.0;
	double css_ = 0.0;
	Eigen::VectorXd residuals_;
	int evaluations_ = 0;

	std::vector<double> anchors_; ///< last d original observations
	std::vector<double> w_tail_;  ///< last p differenced values
	std::vector<double> e_tail_;  ///< last q innovations

	double innovation(double w) const;
	void push_tail(double w, double e);
};

/// Conditional-sum-of-squares fit. Starting values come from a
/// Hannan-Rissanen two-stage regression; the objective is minimised with
/// Nelder-Mead over partial-autocorrelation coordinates, which keeps every
/// candidate stationary and invertible.
///
/// Throws FitError for a series shorter than spec.min_length(), a constant
/// series, or a simplex that does not converge within the evaluation cap.
ArimaModel fit_arima(const Eigen::VectorXd &series, const ArimaSpec &spec = {}, const FitOptions &options = {});

struct OrderSelection {
	ArimaSpec spec;
	double aic = 0.0;
};

/// Grid search over p, q <= max_order (p + q >= 1) by CSS-based AIC.
OrderSelection select_order_aic(const Eigen::VectorXd &series, int d, int max_order = 3);

/// Coefficients of a stationary AR polynomial from partial autocorrelations
/// in (-1, 1), and the inverse map. Exposed for tests.
Eigen::VectorXd ar_from_partials(const Eigen::VectorXd &partials);
Eigen::VectorXd partials_from_ar(const Eigen::VectorXd &ar);

} // namespace floodsense::ts
