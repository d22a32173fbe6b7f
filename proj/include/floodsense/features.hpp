#pragma once

#include "floodsense/baseline.hpp"
#include "floodsense/prefilter.hpp"
#include "floodsense/weights.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace floodsense {

/// Per-window behaviour features.
///   n: old-user count relative to the trained maximum, minus one
///   a: new-user count relative to the trained mean
///   f: new users per (O'_max + 1)
///   v: packets per second per new source
struct FeatureVector {
	double n = 0.0;
	double a = 0.0;
	double f = 0.0;
	double v = 0.0;

	Eigen::Vector4d as_vector() const {
		return {n, a, f, v};
	}

	friend bool operator==(const FeatureVector &, const FeatureVector &) = default;
};

struct NafvPoint {
	std::size_t index = 0;
	double start = 0.0;
	double value = 0.0;    ///< -n*a*f*v
	double weighted = 0.0; ///< -(w1 n)(w2 a)(w3 f)(w4 v)
	FeatureVector features;
};

struct FeatureOptions {
	/// Value of `a` when the trained mean is zero but new users appear.
	double a_cap = 1e6;
};

/// Old and new distinct-source counts of a window against O'.
struct UserCounts {
	std::uint64_t old_users = 0;
	std::uint64_t new_users = 0;
	std::uint64_t new_packets = 0; ///< packets sent by new sources
};

UserCounts count_users(const FilteredWindow &window, const Baseline &baseline);

double feature_n(const FilteredWindow &window, const Baseline &baseline);
double feature_a(const FilteredWindow &window, const Baseline &baseline, const FeatureOptions &options = {});
double feature_f(const FilteredWindow &window, const Baseline &baseline);
double feature_v(const FilteredWindow &window, const Baseline &baseline);

// Count-level forms shared by the window overloads.
double feature_n(std::uint64_t old_users, std::uint64_t max_old_users);
double feature_a(std::uint64_t new_users, double mean_new_users, double a_cap = 1e6);
double feature_f(std::uint64_t new_users, std::uint64_t max_old_users);
double feature_v(std::uint64_t new_packets, std::uint64_t new_users, double unit_time);

FeatureVector extract_features(const FilteredWindow &window, const Baseline &baseline,
                               const FeatureOptions &options = {});

/// -n * a * f * v
double nafv(const FeatureVector &x) noexcept;

/// -(w1 n)(w2 a)(w3 f)(w4 v)
double nafv_weighted(const FeatureVector &x, const WeightVector &w) noexcept;

NafvPoint score_window(const FilteredWindow &window, const Baseline &baseline, const FeatureOptions &options = {});

/// First principal component of the standardised feature matrix, as absolute
/// loadings normalised to sum to one. Falls back to equal weights (with a
/// warning) on fewer than four rows, a constant column, a singular
/// correlation matrix, or a tied leading eigenvalue.
WeightVector pca_weights(std::span<const FeatureVector> rows);

} // namespace floodsense
