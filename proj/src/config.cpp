#include "despeckle/config.hpp"

#include <fstream>
#include <set>
#include <string>

namespace despeckle {

namespace fs = std::filesystem;
using nlohmann::json;

void BenchmarkConfig::validate() const
{
    if (sigmas.empty()) {
        throw ConfigError("benchmark needs at least one sigma");
    }
    for (double sigma : sigmas) {
        if (!(sigma >= 0.0)) {
            throw ConfigError("benchmark sigmas must be non-negative");
        }
    }
    if (methods.empty()) {
        throw ConfigError("benchmark needs at least one method");
    }
    if (nsig && !(*nsig >= 0.0)) {
        throw ConfigError("nsig must be non-negative");
    }
    if (!(nsig_gain > 0.0)) {
        throw ConfigError("nsig_gain must be positive");
    }
    if (threads < 0) {
        throw ConfigError("threads must be non-negative");
    }
    wnnm.validate();
    tuned_wnnm.validate();
}

json read_config_file(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string() + ": cannot open config file");
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

namespace {

void require_object(const json& value, const std::string& what)
{
    if (!value.is_object()) {
        throw ConfigError(what + " must be a JSON object");
    }
}

template <typename T>
T get_as(const json& value, const std::string& key)
{
    try {
        return value.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

} // namespace

void apply_overrides(const json& section, WnnmParams& params)
{
    require_object(section, "method section");
    for (const auto& [key, value] : section.items()) {
        if (key == "patch_size") {
            params.geo.patch_size = get_as<Index>(value, key);
        } else if (key == "step") {
            params.geo.step = get_as<Index>(value, key);
        } else if (key == "window") {
            params.geo.window = get_as<Index>(value, key);
        } else if (key == "stack_size") {
            params.geo.stack_size = get_as<Index>(value, key);
        } else if (key == "iterations") {
            params.iterations = get_as<int>(value, key);
        } else if (key == "delta") {
            params.delta = get_as<double>(value, key);
        } else if (key == "c") {
            params.c = get_as<double>(value, key);
        } else if (key == "eps") {
            params.eps = get_as<double>(value, key);
        } else if (key == "nsig") {
            params.nsig = get_as<double>(value, key);
        } else if (key == "gamma") {
            params.gamma = get_as<double>(value, key);
        } else if (key == "match_every") {
            params.match_every = get_as<int>(value, key);
        } else if (key == "weight_rule") {
            params.weight_rule = parse_weight_rule(get_as<std::string>(value, key));
        } else {
            throw ConfigError("unknown denoiser config key '" + key + "'");
        }
    }
    try {
        params.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid denoiser config: ") + e.what());
    }
}

const json* method_section(const json& document, Method method)
{
    require_object(document, "config document");
    const auto it = document.find(to_string(method));
    return it == document.end() ? nullptr : &*it;
}

void apply_overrides(const json& document, BenchmarkConfig& config)
{
    require_object(document, "config document");
    for (const auto& [key, value] : document.items()) {
        if (key != "wnnm" && key != "tuned-wnnm" && key != "benchmark") {
            throw ConfigError("unknown config section '" + key + "'");
        }
    }
    for (Method method : {Method::wnnm, Method::tuned_wnnm}) {
        if (const json* section = method_section(document, method)) {
            apply_overrides(*section, config.params(method));
        }
    }
    const auto bench = document.find("benchmark");
    if (bench == document.end()) {
        return;
    }
    require_object(*bench, "benchmark section");
    for (const auto& [key, value] : bench->items()) {
        if (key == "dataset_dir") {
            config.dataset_dir = get_as<std::string>(value, key);
        } else if (key == "sigmas") {
            config.sigmas = get_as<std::vector<double>>(value, key);
        } else if (key == "methods") {
            config.methods.clear();
            for (const auto& name : get_as<std::vector<std::string>>(value, key)) {
                config.methods.push_back(parse_method(name));
            }
        } else if (key == "seed") {
            config.seed = get_as<std::uint64_t>(value, key);
        } else if (key == "threads") {
            config.threads = get_as<int>(value, key);
        } else if (key == "report_path") {
            config.report_path = get_as<std::string>(value, key);
        } else if (key == "aggregate") {
            config.aggregate = parse_reducer(get_as<std::string>(value, key));
        } else if (key == "nsig") {
            if (value.is_string() && value.get<std::string>() == "auto") {
                config.nsig.reset();
            } else {
                config.nsig = get_as<double>(value, key);
            }
        } else if (key == "nsig_gain") {
            config.nsig_gain = get_as<double>(value, key);
        } else if (key == "max_images") {
            config.max_images = get_as<std::size_t>(value, key);
        } else {
            throw ConfigError("unknown benchmark config key '" + key + "'");
        }
    }
}

json to_json(const WnnmParams& params)
{
    return {
        {"patch_size", params.geo.patch_size},
        {"step", params.geo.step},
        {"window", params.geo.window},
        {"stack_size", params.geo.stack_size},
        {"iterations", params.iterations},
        {"delta", params.delta},
        {"c", params.c},
        {"eps", params.eps},
        {"nsig", params.nsig},
        {"gamma", params.gamma},
        {"match_every", params.match_every},
        {"weight_rule", to_string(params.weight_rule)},
    };
}

} // namespace despeckle
