#pragma once

#include "despeckle/metrics.hpp"
#include "despeckle/wnnm.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

namespace despeckle {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct BenchmarkConfig {
    std::filesystem::path dataset_dir;
    std::vector<double> sigmas{0.05, 0.1, 0.2, 0.3};
    std::vector<Method> methods{Method::wnnm, Method::tuned_wnnm};
    std::uint64_t seed = 0;
    int threads = 0;
    std::filesystem::path report_path = "benchmark.csv";
    Reducer aggregate = Reducer::mean;
    /// Fixed nsig for every cell; when unset, nsig = nsig_gain * 255 * the
    /// speckle standard deviation implied by the synthesised noise.
    std::optional<double> nsig;
    double nsig_gain = 1.1;
    /// Only the first N images (sorted by name) are used; 0 means all.
    std::size_t max_images = 0;
    WnnmParams wnnm = baseline_params();
    WnnmParams tuned_wnnm = tuned_params();

    const WnnmParams& params(Method method) const { return method == Method::tuned_wnnm ? tuned_wnnm : wnnm; }
    WnnmParams& params(Method method) { return method == Method::tuned_wnnm ? tuned_wnnm : wnnm; }

    void validate() const;
};

/// Reads a JSON config file. Throws ConfigError on I/O or parse failure.
nlohmann::json read_config_file(const std::filesystem::path& path);

/// Applies the keys present in `section` onto `params`. Unknown keys throw.
///
/// Keys: patch_size, step, window, stack_size, iterations, delta, c, eps,
/// nsig, gamma, match_every, weight_rule.
void apply_overrides(const nlohmann::json& section, WnnmParams& params);

/// Applies a whole config document: optional "wnnm" and "tuned-wnnm" sections
/// for the two methods and an optional "benchmark" section with keys
/// dataset_dir, sigmas, methods, seed, threads, report_path, aggregate, nsig,
/// nsig_gain, max_images.
void apply_overrides(const nlohmann::json& document, BenchmarkConfig& config);

/// Section of `document` holding overrides for `method`, or null.
const nlohmann::json* method_section(const nlohmann::json& document, Method method);

nlohmann::json to_json(const WnnmParams& params);

} // namespace despeckle
