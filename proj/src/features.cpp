#include "floodsense/features.hpp"

#include "floodsense/error.hpp"

#include <Eigen/Eigenvalues>
#include <spdlog/spdlog.h>

#include <cmath>
#include <sstream>

namespace floodsense {

WeightVector WeightVector::make(const Eigen::Vector4d &w, bool strict) {
	if (!w.allFinite() || (w.array() < 0.0).any()) {
		throw ConfigError("weights must be finite and non-negative");
	}
	if (std::abs(w.sum() - 1.0) > 1e-9) {
		throw ConfigError("weights must sum to 1 (got " + std::to_string(w.sum()) + ")");
	}
	if ((w.array() == 0.0).any()) {
		if (strict) {
			throw ConfigError("a zero weight forces every weighted score to zero");
		}
		spdlog::warn("a zero weight forces every weighted score to zero");
	}
	return WeightVector(w);
}

WeightVector WeightVector::parse(const std::string &text, bool strict) {
	if (text == "equal") {
		return WeightVector();
	}
	Eigen::Vector4d w;
	std::istringstream in(text);
	std::string item;
	int i = 0;
	while (std::getline(in, item, ',')) {
		if (i == 4) {
			throw ConfigError("expected four weights in '" + text + "'");
		}
		try {
			std::size_t used = 0;
			w[i] = std::stod(item, &used);
			if (used != item.size()) {
				throw std::invalid_argument(item);
			}
		} catch (const std::logic_error &) {
			throw ConfigError("invalid weight '" + item + "'");
		}
		++i;
	}
	if (i != 4) {
		throw ConfigError("expected four weights in '" + text + "'");
	}
	return make(w, strict);
}

UserCounts count_users(const FilteredWindow &window, const Baseline &baseline) {
	UserCounts c;
	for (const auto &[src, packets] : window.access_counts) {
		if (baseline.old_users.is_marked(src)) {
			++c.old_users;
		} else {
			++c.new_users;
			c.new_packets += packets;
		}
	}
	return c;
}

double feature_n(std::uint64_t old_users, std::uint64_t max_old_users) {
	return static_cast<double>(old_users) / (static_cast<double>(max_old_users) + 1.0) - 1.0;
}

double feature_a(std::uint64_t new_users, double mean_new_users, double a_cap) {
	if (mean_new_users > 0.0) {
		return (static_cast<double>(new_users) - mean_new_users) / mean_new_users;
	}
	return new_users == 0 ? 0.0 : a_cap;
}

double feature_f(std::uint64_t new_users, std::uint64_t max_old_users) {
	const double denom = static_cast<double>(max_old_users) + 1.0;
	if (new_users != 0) {
		return static_cast<double>(new_users) / denom;
	}
	return -1.0 / denom;
}

double feature_v(std::uint64_t new_packets, std::uint64_t new_users, double unit_time) {
	if (new_users == 0) {
		return 0.0;
	}
	return static_cast<double>(new_packets) / (static_cast<double>(new_users) * unit_time);
}

double feature_n(const FilteredWindow &window, const Baseline &baseline) {
	return feature_n(count_users(window, baseline).old_users, baseline.max_old_users);
}

double feature_a(const FilteredWindow &window, const Baseline &baseline, const FeatureOptions &options) {
	return feature_a(count_users(window, baseline).new_users, baseline.mean_new_users, options.a_cap);
}

double feature_f(const FilteredWindow &window, const Baseline &baseline) {
	return feature_f(count_users(window, baseline).new_users, baseline.max_old_users);
}

double feature_v(const FilteredWindow &window, const Baseline &baseline) {
	const auto c = count_users(window, baseline);
	return feature_v(c.new_packets, c.new_users, baseline.unit_time);
}

FeatureVector extract_features(const FilteredWindow &window, const Baseline &baseline, const FeatureOptions &options) {
	const auto c = count_users(window, baseline);
	return {
	    feature_n(c.old_users, baseline.max_old_users),
	    feature_a(c.new_users, baseline.mean_new_users, options.a_cap),
	    feature_f(c.new_users, baseline.max_old_users),
	    feature_v(c.new_packets, c.new_users, baseline.unit_time),
	};
}

double nafv(const FeatureVector &x) noexcept {
	return -(x.n * x.a * x.f * x.v);
}

double nafv_weighted(const FeatureVector &x, const WeightVector &w) noexcept {
	return -((w[0] * x.n) * (w[1] * x.a) * (w[2] * x.f) * (w[3] * x.v));
}

NafvPoint score_window(const FilteredWindow &window, const Baseline &baseline, const FeatureOptions &options) {
	NafvPoint p;
	p.index = window.index;
	p.start = window.start;
	p.features = extract_features(window, baseline, options);
	p.value = nafv(p.features);
	p.weighted = nafv_weighted(p.features, baseline.weights);
	return p;
}

WeightVector pca_weights(std::span<const FeatureVector> rows) {
	if (rows.size() < 4) {
		spdlog::warn("pca_weights: {} rows is too few, using equal weights", rows.size());
		return WeightVector();
	}
	Eigen::MatrixX4d x(static_cast<Eigen::Index>(rows.size()), 4);
	for (Eigen::Index i = 0; i < x.rows(); ++i) {
		x.row(i) = rows[static_cast<std::size_t>(i)].as_vector().transpose();
	}
	if (!x.allFinite()) {
		spdlog::warn("pca_weights: non-finite features, using equal weights");
		return WeightVector();
	}
	x.rowwise() -= x.colwise().mean();
	const Eigen::RowVector4d sd = (x.colwise().squaredNorm() / static_cast<double>(x.rows() - 1)).cwiseSqrt();
	if ((sd.array() <= 1e-12 * (1.0 + sd.maxCoeff())).any()) {
		spdlog::warn("pca_weights: constant feature column, using equal weights");
		return WeightVector();
	}
	x.array().rowwise() /= sd.array();
	const Eigen::Matrix4d corr = (x.transpose() * x) / static_cast<double>(x.rows() - 1);

	Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(corr);
	if (eig.info() != Eigen::Success || eig.eigenvalues()(0) < 1e-10) {
		spdlog::warn("pca_weights: rank-deficient feature matrix, using equal weights");
		return WeightVector();
	}
	// Eigenvalues ascend, so the last column is the first component. A tied
	// leading eigenvalue leaves that direction arbitrary.
	const auto &lambda = eig.eigenvalues();
	if (lambda(3) - lambda(2) < 1e-8 * lambda(3)) {
		spdlog::warn("pca_weights: leading component is not unique, using equal weights");
		return WeightVector();
	}
	const Eigen::Vector4d loadings = eig.eigenvectors().col(3).cwiseAbs();
	return WeightVector::make(loadings / loadings.sum(), false);
}

} // namespace floodsense
