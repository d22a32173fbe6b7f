#pragma once

#include <Eigen/Core>

#include <string>

namespace floodsense {

/// Non-negative fusion weights for (N, A, F, V) summing to one.
class WeightVector {
public:
	/// Equal weights, 0.25 each.
	WeightVector() : w_(Eigen::Vector4d::Constant(0.25)) {
	}

	/// Validates and builds a weight vector. Negative entries or a sum off by
	/// more than 1e-9 raise ConfigError. A zero entry annihilates the weighted
	/// score; with `strict` it is rejected, otherwise accepted with a warning.
	static WeightVector make(const Eigen::Vector4d &w, bool strict = true);

	/// Parses `equal` or `w1,w2,w3,w4`.
	static WeightVector parse(const std::string &text, bool strict = true);

	const Eigen::Vector4d &values() const noexcept {
		return w_;
	}
	double operator[](int i) const noexcept {
		return w_[i];
	}
	/// w1 * w2 * w3 * w4, the factor relating weighted and plain scores.
	double product() const noexcept {
		return w_.prod();
	}

	friend bool operator==(const WeightVector &a, const WeightVector &b) noexcept {
		return a.w_ == b.w_;
	}

private:
	explicit WeightVector(const Eigen::Vector4d &w) : w_(w) {
	}

	Eigen::Vector4d w_;
};

} // namespace floodsense
