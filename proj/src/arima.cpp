#include "floodsense/arima.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace floodsense::ts {

namespace {

// Partial autocorrelations are kept inside tanh(6) ~ 0.99999 so that every
// candidate model stays strictly stationary/invertible.
constexpr double kMaxUnconstrained = 6.0;
constexpr double kMaxStartPartial = 0.95;
constexpr double kRootMargin = 1e-6;

struct SimplexResult {
	Eigen::VectorXd x;
	double f = std::numeric_limits<double>::infinity();
	int evaluations = 0;
	bool converged = false;
};

SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd &)> &objective, const Eigen::VectorXd &start,
                          const Eigen::VectorXd &step, int max_evaluations, double tolerance) {
	const Eigen::Index n = start.size();
	std::vector<Eigen::VectorXd> x(static_cast<std::size_t>(n + 1), start);
	std::vector<double> f(static_cast<std::size_t>(n + 1));
	SimplexResult result;
	auto eval = [&](const Eigen::VectorXd &p) {
		++result.evaluations;
		const double v = objective(p);
		return std::isfinite(v) ? v : std::numeric_limits<double>::max();
	};
	for (Eigen::Index i = 0; i < n; ++i) {
		x[static_cast<std::size_t>(i + 1)][i] += step[i];
	}
	for (std::size_t i = 0; i < x.size(); ++i) {
		f[i] = eval(x[i]);
	}

	std::vector<std::size_t> order(x.size());
	while (true) {
		std::iota(order.begin(), order.end(), 0);
		std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
		const std::size_t best = order.front();
		const std::size_t worst = order.back();
		const std::size_t second = order[order.size() - 2];

		double size = 0.0;
		for (const auto &v : x) {
			size = std::max(size, (v - x[best]).lpNorm<Eigen::Infinity>());
		}
		if (f[worst] - f[best] <= tolerance * std::abs(f[best]) || size < 1e-10) {
			result.converged = true;
			break;
		}
		if (result.evaluations >= max_evaluations) {
			break;
		}

		Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
		for (std::size_t i = 0; i + 1 < order.size(); ++i) {
			centroid += x[order[i]];
		}
		centroid /= static_cast<double>(n);

		const Eigen::VectorXd reflected = centroid + (centroid - x[worst]);
		const double fr = eval(reflected);
		if (fr < f[best]) {
			const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - x[worst]);
			const double fe = eval(expanded);
			if (fe < fr) {
				x[worst] = expanded;
				f[worst] = fe;
			} else {
				x[worst] = reflected;
				f[worst] = fr;
			}
			continue;
		}
		if (fr < f[second]) {
			x[worst] = reflected;
			f[worst] = fr;
			continue;
		}
		const bool outside = fr < f[worst];
		const Eigen::VectorXd contracted =
		    outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid)) : Eigen::VectorXd(centroid + 0.5 * (x[worst] - centroid));
		const double fc = eval(contracted);
		if (fc < (outside ? fr : f[worst])) {
			x[worst] = contracted;
			f[worst] = fc;
			continue;
		}
		for (std::size_t i = 0; i < x.size(); ++i) {
			if (i != best) {
				x[i] = x[best] + 0.5 * (x[i] - x[best]);
				f[i] = eval(x[i]);
			}
		}
	}
	const auto best = static_cast<std::size_t>(std::min_element(f.begin(), f.end()) - f.begin());
	result.x = x[best];
	result.f = f[best];
	return result;
}

// Conditional innovations of the differenced series; e_t = 0 for t < p.
double conditional_css(const Eigen::VectorXd &w, const Eigen::VectorXd &ar, const Eigen::VectorXd &ma, double mu,
                       Eigen::VectorXd *residuals) {
	const Eigen::Index n = w.size();
	const Eigen::Index p = ar.size();
	const Eigen::Index q = ma.size();
	Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
	double css = 0.0;
	for (Eigen::Index t = p; t < n; ++t) {
		double v = w[t] - mu;
		for (Eigen::Index i = 1; i <= p; ++i) {
			v -= ar[i - 1] * (w[t - i] - mu);
		}
		for (Eigen::Index j = 1; j <= q && j <= t; ++j) {
			v -= ma[j - 1] * e[t - j];
		}
		e[t] = v;
		css += v * v;
	}
	if (residuals) {
		*residuals = std::move(e);
	}
	return css;
}

// Least squares of y[t] on lagged y (p lags) and lagged e (q lags) for t >= start.
Eigen::VectorXd lagged_regression(const Eigen::VectorXd &y, const Eigen::VectorXd &e, int p, int q, Eigen::Index start) {
	const Eigen::Index rows = y.size() - start;
	Eigen::MatrixXd design(rows, p + q);
	for (Eigen::Index r = 0; r < rows; ++r) {
		const Eigen::Index t = start + r;
		for (int i = 1; i <= p; ++i) {
			design(r, i - 1) = y[t - i];
		}
		for (int j = 1; j <= q; ++j) {
			design(r, p + j - 1) = e[t - j];
		}
	}
	return design.colPivHouseholderQr().solve(y.tail(rows));
}

// Hannan-Rissanen starting values for (ar, ma) on a centred series.
std::pair<Eigen::VectorXd, Eigen::VectorXd> hannan_rissanen(const Eigen::VectorXd &y, int p, int q) {
	const auto n = static_cast<int>(y.size());
	if (q == 0) {
		return {lagged_regression(y, Eigen::VectorXd::Zero(n), p, 0, p), Eigen::VectorXd()};
	}
	const int m = std::clamp(std::max(p + q + 5, static_cast<int>(10.0 * std::log10(n))), 1, std::max(1, n / 4));
	const Eigen::VectorXd long_ar = lagged_regression(y, Eigen::VectorXd::Zero(n), m, 0, m);
	Eigen::VectorXd ehat = Eigen::VectorXd::Zero(n);
	for (int t = m; t < n; ++t) {
		double v = y[t];
		for (int i = 1; i <= m; ++i) {
			v -= long_ar[i - 1] * y[t - i];
		}
		ehat[t] = v;
	}
	const Eigen::VectorXd beta = lagged_regression(y, ehat, p, q, m + std::max(p, q));
	return {beta.head(p), beta.tail(q)};
}

Eigen::VectorXd safe_partials(const Eigen::VectorXd &coeffs) {
	Eigen::VectorXd r = partials_from_ar(coeffs);
	if (!r.allFinite()) {
		r.setZero();
	}
	return r.cwiseMax(-kMaxStartPartial).cwiseMin(kMaxStartPartial);
}

} // namespace

void ArimaSpec::validate() const {
	if (p < 0 || d < 0 || q < 0) {
		throw ConfigError("ARIMA orders must be non-negative");
	}
}

Eigen::VectorXd ar_from_partials(const Eigen::VectorXd &partials) {
	const Eigen::Index p = partials.size();
	Eigen::VectorXd phi = Eigen::VectorXd::Zero(p);
	for (Eigen::Index k = 0; k < p; ++k) {
		const double r = partials[k];
		const Eigen::VectorXd prev = phi;
		for (Eigen::Index j = 0; j < k; ++j) {
			phi[j] = prev[j] - r * prev[k - 1 - j];
		}
		phi[k] = r;
	}
	return phi;
}

Eigen::VectorXd partials_from_ar(const Eigen::VectorXd &ar) {
	const Eigen::Index p = ar.size();
	Eigen::VectorXd a = ar;
	Eigen::VectorXd r(p);
	for (Eigen::Index k = p - 1; k >= 0; --k) {
		const double rk = a[k];
		r[k] = rk;
		const double denom = 1.0 - rk * rk;
		if (!(std::abs(rk) < 1.0)) {
			r.setConstant(std::numeric_limits<double>::quiet_NaN());
			return r;
		}
		const Eigen::VectorXd prev = a;
		for (Eigen::Index j = 0; j < k; ++j) {
			a[j] = (prev[j] + rk * prev[k - 1 - j]) / denom;
		}
	}
	return r;
}

double min_root_modulus(const Eigen::VectorXd &coeffs) {
	const Eigen::Index k = coeffs.size();
	if (k == 0) {
		return std::numeric_limits<double>::infinity();
	}
	Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(k, k);
	companion.row(0) = coeffs.transpose();
	if (k > 1) {
		companion.bottomLeftCorner(k - 1, k - 1).setIdentity();
	}
	const double spectral = companion.eigenvalues().cwiseAbs().maxCoeff();
	return spectral > 0.0 ? 1.0 / spectral : std::numeric_limits<double>::infinity();
}

ArimaModel ArimaModel::from_coefficients(const ArimaSpec &spec, const Eigen::VectorXd &ar, const Eigen::VectorXd &ma,
                                         double intercept, const Eigen::VectorXd &series) {
	spec.validate();
	if (ar.size() != spec.p || ma.size() != spec.q) {
		throw ConfigError("coefficient counts do not match the ARIMA orders");
	}
	if (series.size() < spec.d + spec.p + 1) {
		throw DataError("series too short for ARIMA(" + std::to_string(spec.p) + "," + std::to_string(spec.d) + "," +
		                std::to_string(spec.q) + ")");
	}
	ArimaModel m;
	m.spec_ = spec;
	m.ar_ = ar;
	m.ma_ = ma;
	m.intercept_ = intercept;

	const Eigen::VectorXd w = difference(series, spec.d);
	m.css_ = conditional_css(w, ar, ma, intercept, &m.residuals_);
	m.sigma2_ = m.css_ / static_cast<double>(w.size() - spec.p);

	m.anchors_.assign(series.data() + series.size() - spec.d, series.data() + series.size());
	m.w_tail_.assign(w.data() + w.size() - spec.p, w.data() + w.size());
	m.e_tail_.assign(static_cast<std::size_t>(spec.q), 0.0);
	for (int j = 0; j < spec.q && j < m.residuals_.size(); ++j) {
		m.e_tail_[static_cast<std::size_t>(spec.q - 1 - j)] = m.residuals_[m.residuals_.size() - 1 - j];
	}
	return m;
}

double ArimaModel::innovation(double w) const {
	double v = w - intercept_;
	const auto p = static_cast<std::size_t>(spec_.p);
	const auto q = static_cast<std::size_t>(spec_.q);
	for (std::size_t i = 1; i <= p; ++i) {
		v -= ar_[static_cast<Eigen::Index>(i - 1)] * (w_tail_[p - i] - intercept_);
	}
	for (std::size_t j = 1; j <= q; ++j) {
		v -= ma_[static_cast<Eigen::Index>(j - 1)] * e_tail_[q - j];
	}
	return v;
}

void ArimaModel::push_tail(double w, double e) {
	if (!w_tail_.empty()) {
		std::rotate(w_tail_.begin(), w_tail_.begin() + 1, w_tail_.end());
		w_tail_.back() = w;
	}
	if (!e_tail_.empty()) {
		std::rotate(e_tail_.begin(), e_tail_.begin() + 1, e_tail_.end());
		e_tail_.back() = e;
	}
}

void ArimaModel::append(double observation) {
	double w = observation;
	if (spec_.d > 0) {
		Eigen::VectorXd window(spec_.d + 1);
		for (int i = 0; i < spec_.d; ++i) {
			window[i] = anchors_[static_cast<std::size_t>(i)];
		}
		window[spec_.d] = observation;
		w = difference(window, spec_.d)[0];
		std::rotate(anchors_.begin(), anchors_.begin() + 1, anchors_.end());
		anchors_.back() = observation;
	}
	push_tail(w, innovation(w));
}

Eigen::VectorXd ArimaModel::forecast(int h) const {
	if (h < 1) {
		throw ConfigError("forecast horizon must be at least 1");
	}
	ArimaModel scratch = *this;
	Eigen::VectorXd diffed(h);
	for (int step = 0; step < h; ++step) {
		// With a zero future innovation, w equals its one-step prediction.
		const double w_hat = scratch.intercept_ + (0.0 - scratch.innovation(scratch.intercept_));
		diffed[step] = w_hat;
		scratch.push_tail(w_hat, 0.0);
	}
	const Eigen::Map<const Eigen::VectorXd> anchors(anchors_.data(), static_cast<Eigen::Index>(anchors_.size()));
	return integrate(diffed, anchors).tail(h);
}

double ArimaModel::aic() const {
	const double n = static_cast<double>(residuals_.size() - spec_.p);
	const int k = spec_.p + spec_.q + 1 + (spec_.include_intercept ? 1 : 0);
	return n * std::log(css_ / n) + 2.0 * k;
}

ArimaModel fit_arima(const Eigen::VectorXd &series, const ArimaSpec &spec, const FitOptions &options) {
	spec.validate();
	if (series.size() < spec.min_length()) {
		throw FitError("series of length " + std::to_string(series.size()) + " is too short; need " +
		               std::to_string(spec.min_length()));
	}
	if (!series.allFinite()) {
		throw FitError("series contains non-finite values");
	}
	if (series.maxCoeff() == series.minCoeff()) {
		throw FitError("constant series: variance is degenerate");
	}

	const int p = spec.p;
	const int q = spec.q;
	const Eigen::VectorXd w = difference(series, spec.d);
	const double mean = w.mean();
	const double spread = std::sqrt((w.array() - mean).square().mean());
	const double mu0 = spec.include_intercept ? mean : 0.0;
	if (p + q == 0) {
		// Pure (integrated) mean model: the CSS minimiser is the sample mean.
		return ArimaModel::from_coefficients(spec, Eigen::VectorXd(0), Eigen::VectorXd(0), mu0, series);
	}

	Eigen::VectorXd ar0 = Eigen::VectorXd::Zero(p);
	Eigen::VectorXd ma0 = Eigen::VectorXd::Zero(q);
	if (spread > 0.0) {
		auto [ar_hr, ma_hr] = hannan_rissanen((w.array() - mu0).matrix(), p, q);
		if (ar_hr.allFinite() && ma_hr.allFinite()) {
			ar0 = ar_hr;
			ma0 = ma_hr;
		}
	}

	const int dim = p + q + (spec.include_intercept ? 1 : 0);
	Eigen::VectorXd u0(dim);
	u0.head(p) = safe_partials(ar0).array().atanh().matrix();
	u0.segment(p, q) = safe_partials(-ma0).array().atanh().matrix();
	if (spec.include_intercept) {
		u0[dim - 1] = mu0;
	}
	Eigen::VectorXd step = Eigen::VectorXd::Constant(dim, 0.1);
	if (spec.include_intercept) {
		step[dim - 1] = 0.1 * spread + 1e-8 * (1.0 + std::abs(mean));
	}

	struct Decoded {
		Eigen::VectorXd ar, ma;
		double mu;
	};
	auto decode = [&](const Eigen::VectorXd &u) {
		const Eigen::VectorXd clamped = u.cwiseMax(-kMaxUnconstrained).cwiseMin(kMaxUnconstrained);
		Decoded dec;
		dec.ar = ar_from_partials(clamped.head(p).array().tanh().matrix());
		dec.ma = -ar_from_partials(clamped.segment(p, q).array().tanh().matrix());
		dec.mu = spec.include_intercept ? u[dim - 1] : 0.0;
		return dec;
	};
	auto objective = [&](const Eigen::VectorXd &u) {
		const Decoded dec = decode(u);
		return conditional_css(w, dec.ar, dec.ma, dec.mu, nullptr);
	};

	SimplexResult best = nelder_mead(objective, u0, step, options.max_iterations, options.tolerance);
	int evaluations = best.evaluations;
	// Restart from the optimum to guard against a collapsed simplex.
	for (int restart = 0; restart < 2 && best.converged; ++restart) {
		SimplexResult again = nelder_mead(objective, best.x, step, options.max_iterations, options.tolerance);
		evaluations += again.evaluations;
		const bool improved = again.f < best.f - options.tolerance * std::abs(best.f);
		if (again.f <= best.f) {
			best = again;
		}
		if (!improved) {
			break;
		}
	}
	if (!best.converged || !std::isfinite(best.f)) {
		throw FitError("CSS optimisation did not converge within " + std::to_string(options.max_iterations) +
		                   " evaluations",
		               best.f, evaluations);
	}

	Decoded dec = decode(best.x);
	// tanh saturation can leave a root a hair outside the margin; shrink until clear.
	for (int i = 0; i < 200 && min_root_modulus(dec.ar) <= 1.0 + kRootMargin; ++i) {
		for (int j = 0; j < p; ++j) {
			dec.ar[j] *= std::pow(0.999, j + 1);
		}
	}
	for (int i = 0; i < 200 && min_root_modulus(-dec.ma) <= 1.0 + kRootMargin; ++i) {
		for (int j = 0; j < q; ++j) {
			dec.ma[j] *= std::pow(0.999, j + 1);
		}
	}
	ArimaModel model = ArimaModel::from_coefficients(spec, dec.ar, dec.ma, dec.mu, series);
	model.evaluations_ = evaluations;
	return model;
}

OrderSelection select_order_aic(const Eigen::VectorXd &series, int d, int max_order) {
	OrderSelection best;
	best.aic = std::numeric_limits<double>::infinity();
	bool found = false;
	for (int p = 0; p <= max_order; ++p) {
		for (int q = 0; q <= max_order; ++q) {
			if (p + q == 0) {
				continue;
			}
			ArimaSpec spec{p, d, q, false};
			try {
				const double aic = fit_arima(series, spec).aic();
				if (aic < best.aic) {
					best = {spec, aic};
					found = true;
				}
			} catch (const FitError &) {
				continue;
			}
		}
	}
	if (!found) {
		throw FitError("no candidate order could be fitted");
	}
	return best;
}

} // namespace floodsense::ts
