#include "floodsense/baseline.hpp"

#include "floodsense/error.hpp"
#include "floodsense/flow_ingest.hpp"

#include <json.hpp>

#include <algorithm>

namespace floodsense {

Baseline train(std::span<const FilteredWindow> windows, const TrainOptions &options) {
	if (windows.empty()) {
		throw TrainingError("training requires at least one window");
	}
	Baseline b;
	b.old_users = IpBitmap(options.ipd_bits);
	b.unit_time = options.unit_time;
	b.weights = options.weights;
	b.filtered = options.filtered;
	b.window_count = windows.size();

	double new_total = 0.0;
	for (std::size_t k = 0; k < windows.size(); ++k) {
		const auto &sources = windows[k].access_counts;
		if (k == 0) {
			b.max_old_users = sources.size();
		} else {
			std::uint64_t old_count = 0;
			for (const auto &[src, count] : sources) {
				old_count += b.old_users.is_marked(src) ? 1 : 0;
			}
			b.max_old_users = std::max(b.max_old_users, old_count);
			new_total += static_cast<double>(sources.size() - old_count);
		}
		for (const auto &[src, count] : sources) {
			b.old_users.mark(src);
		}
	}
	b.mean_new_users = windows.size() > 1 ? new_total / static_cast<double>(windows.size() - 1) : 0.0;
	return b;
}

void save_baseline(const Baseline &baseline, const std::filesystem::path &path) {
	std::filesystem::path ipd_path = path;
	ipd_path.replace_extension(".ipd");
	const auto &w = baseline.weights.values();
	nlohmann::json doc = {
	    {"format", kBaselineFormat},
	    {"unit_time", baseline.unit_time},
	    {"max_old_users", baseline.max_old_users},
	    {"mean_new_users", baseline.mean_new_users},
	    {"weights", {w[0], w[1], w[2], w[3]}},
	    {"window_count", baseline.window_count},
	    {"filtered", baseline.filtered},
	    {"ipd", {{"file", ipd_path.filename().string()}, {"bits", baseline.old_users.bits()}}},
	};
	baseline.old_users.save(ipd_path);
	write_text_file(path, doc.dump(2) + "\n");
}

Baseline load_baseline(const std::filesystem::path &path) {
	const std::string text = read_text_file(path);
	nlohmann::json doc;
	try {
		doc = nlohmann::json::parse(text);
	} catch (const nlohmann::json::parse_error &e) {
		throw CorruptFileError(path.string() + ": " + e.what());
	}
	if (!doc.is_object() || !doc.contains("format") || !doc["format"].is_string()) {
		throw VersionError(path.string() + ": missing format tag");
	}
	if (doc["format"].get<std::string>() != kBaselineFormat) {
		throw VersionError(path.string() + ": unsupported format " + doc["format"].get<std::string>());
	}
	Baseline b;
	try {
		b.unit_time = doc.at("unit_time").get<double>();
		b.max_old_users = doc.at("max_old_users").get<std::uint64_t>();
		b.mean_new_users = doc.at("mean_new_users").get<double>();
		b.window_count = doc.at("window_count").get<std::uint64_t>();
		b.filtered = doc.at("filtered").get<bool>();
		const auto &w = doc.at("weights");
		if (!w.is_array() || w.size() != 4) {
			throw CorruptFileError(path.string() + ": weights must have 4 entries");
		}
		b.weights = WeightVector::make({w[0].get<double>(), w[1].get<double>(), w[2].get<double>(), w[3].get<double>()},
		                               false);
		const auto ipd_name = doc.at("ipd").at("file").get<std::string>();
		const auto bits = doc.at("ipd").at("bits").get<unsigned>();
		b.old_users = IpBitmap::load(path.parent_path() / ipd_name);
		if (b.old_users.bits() != bits) {
			throw CorruptFileError(path.string() + ": bit width disagrees with snapshot");
		}
	} catch (const nlohmann::json::exception &e) {
		throw CorruptFileError(path.string() + ": " + e.what());
	} catch (const ConfigError &e) {
		throw CorruptFileError(path.string() + ": " + e.what());
	}
	if (b.mean_new_users < 0 || b.window_count < 1 ||
	    !(b.unit_time > 0)) {
		throw CorruptFileError(path.string() + ": inconsistent baseline fields");
	}
	return b;
}

} // namespace floodsense
