#include "despeckle/cli.hpp"

#include "despeckle/bench.hpp"
#include "despeckle/config.hpp"
#include "despeckle/image_io.hpp"
#include "despeckle/metrics.hpp"
#include "despeckle/noise.hpp"
#include "despeckle/pairs.hpp"
#include "despeckle/wnnm.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace despeckle {

namespace fs = std::filesystem;

namespace {

// Usage problems detected after parsing (bad values, missing inputs).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GlobalOptions {
    int threads = 0;
    std::uint64_t seed = 0;
    std::string config;
    CLI::Option* seed_option = nullptr;
    CLI::Option* threads_option = nullptr;
};

nlohmann::json load_document(const GlobalOptions& global)
{
    if (global.config.empty()) {
        return nlohmann::json::object();
    }
    return read_config_file(global.config);
}

void require_input(const fs::path& path)
{
    std::error_code ec;
    if (!fs::exists(path, ec)) {
        throw UsageError(path.string() + ": input does not exist");
    }
}

std::string describe(const WnnmParams& params)
{
    std::ostringstream os;
    bool first = true;
    const nlohmann::json fields = to_json(params);
    for (const auto& [key, value] : fields.items()) {
        os << (first ? "" : " ") << key << '=' << (value.is_string() ? value.get<std::string>() : value.dump());
        first = false;
    }
    return os.str();
}

struct DenoiseArgs {
    std::string input;
    std::string output;
    std::string method = "tuned-wnnm";
    std::string intensity = "mid";
    std::optional<double> nsig;
    CLI::Option* intensity_option = nullptr;
};

WnnmParams resolve_params(Method method, const std::string& intensity_name, bool intensity_given,
                          std::optional<double> nsig, const nlohmann::json& document)
{
    const Intensity intensity = parse_intensity(intensity_name);
    WnnmParams params = method_preset(method, intensity);
    if (const nlohmann::json* section = method_section(document, method)) {
        apply_overrides(*section, params);
    }
    if (intensity_given) {
        params.nsig = intensity_nsig(intensity);
    }
    if (nsig) {
        params.nsig = *nsig;
    }
    params.validate();
    return params;
}

int cmd_denoise(const DenoiseArgs& a, const GlobalOptions& global, std::ostream& out)
{
    require_input(a.input);
    const Method method = parse_method(a.method);
    const WnnmParams params = resolve_params(method, a.intensity, a.intensity_option->count() > 0, a.nsig,
                                             load_document(global));
    const Image noisy = load_image(a.input);
    const auto start = std::chrono::steady_clock::now();
    const Image denoised = wnnm_denoise(noisy, params, {.threads = global.threads, .on_iteration = {}});
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    save_image(denoised, a.output);
    out << "method=" << to_string(method) << ' ' << describe(params) << '\n';
    out << "wall_time_s=" << std::fixed << std::setprecision(3) << elapsed << '\n';
    return kExitOk;
}

struct AddNoiseArgs {
    std::string input;
    std::string output;
    double sigma = 0.0;
};

int cmd_add_noise(const AddNoiseArgs& a, const GlobalOptions& global, std::ostream& out)
{
    if (!(a.sigma >= 0.0)) {
        throw UsageError("--sigma must be non-negative");
    }
    require_input(a.input);
    const Image clean = load_image(a.input);
    save_image(add_speckle(clean, {a.sigma, global.seed}), a.output);
    out << "sigma=" << a.sigma << " seed=" << global.seed << '\n';
    return kExitOk;
}

struct BenchmarkArgs {
    std::string dataset;
    std::vector<double> sigmas;
    std::vector<std::string> methods;
    std::string report;
    std::string aggregate;
    std::optional<double> nsig;
    bool quick = false;
};

int cmd_benchmark(const BenchmarkArgs& a, const GlobalOptions& global, std::ostream& out, std::ostream& err)
{
    BenchmarkConfig config;
    apply_overrides(load_document(global), config);
    if (!a.dataset.empty()) {
        config.dataset_dir = a.dataset;
    }
    if (config.dataset_dir.empty()) {
        throw UsageError("benchmark needs --dataset or benchmark.dataset_dir in the config");
    }
    if (!a.sigmas.empty()) {
        config.sigmas = a.sigmas;
    }
    if (!a.methods.empty()) {
        config.methods.clear();
        for (const auto& name : a.methods) {
            config.methods.push_back(parse_method(name));
        }
    }
    if (!a.report.empty()) {
        config.report_path = a.report;
    }
    if (!a.aggregate.empty()) {
        config.aggregate = parse_reducer(a.aggregate);
    }
    if (a.nsig) {
        config.nsig = a.nsig;
    }
    if (a.quick) {
        config.max_images = 6;
    }
    if (global.seed_option->count() > 0) {
        config.seed = global.seed;
    }
    if (global.threads_option->count() > 0) {
        config.threads = global.threads;
    }
    for (double sigma : config.sigmas) {
        if (!(sigma >= 0.0)) {
            throw UsageError("sigmas must be non-negative");
        }
    }

    const MetricReport report = run_benchmark(config, [&](const MetricRow& row) {
        if (row.status != "ok") {
            err << "warning: " << row.image_id << ": " << row.status << '\n';
            return;
        }
        out << row.image_id << ' ' << row.method << " sigma=" << format_metric(row.sigma)
            << " psnr=" << format_metric(row.psnr_db) << " ssim=" << format_metric(row.ssim) << '\n';
    });
    write_report_csv(report, config.report_path);
    for (const AggregateRow& agg : report.aggregates) {
        out << agg.reducer << ' ' << agg.method << " sigma=" << format_metric(agg.sigma)
            << " psnr=" << format_metric(agg.psnr_db) << " ssim=" << format_metric(agg.ssim) << " images=" << agg.images
            << '\n';
    }
    out << "report=" << config.report_path.string() << '\n';
    return kExitOk;
}

struct PairArgs {
    std::string input_dir;
    std::string output_dir;
    std::string method = "tuned-wnnm";
    std::string intensity = "mid";
    std::optional<double> nsig;
    std::optional<double> sigma;
    bool force = false;
    bool resume = false;
    CLI::Option* intensity_option = nullptr;
};

int cmd_gen_pairs(const PairArgs& a, const GlobalOptions& global, std::ostream& out)
{
    if (a.sigma && !(*a.sigma >= 0.0)) {
        throw UsageError("--sigma must be non-negative");
    }
    require_input(a.input_dir);
    PairOptions options;
    options.input_dir = a.input_dir;
    options.output_dir = a.output_dir;
    options.method = parse_method(a.method);
    options.intensity = parse_intensity(a.intensity);
    options.params = resolve_params(options.method, a.intensity, a.intensity_option->count() > 0, a.nsig,
                                    load_document(global));
    options.sigma = a.sigma;
    options.seed = global.seed;
    options.threads = global.threads;
    options.force = a.force;
    options.resume = a.resume;
    const PairSummary summary = generate_pairs(options);
    out << "pairs=" << summary.rows.size() << " written=" << summary.written << " resumed=" << summary.resumed
        << " manifest=" << (options.output_dir / "manifest.csv").string() << '\n';
    return kExitOk;
}

struct MetricsArgs {
    std::string ref;
    std::string test;
};

int cmd_metrics(const MetricsArgs& a, std::ostream& out)
{
    require_input(a.ref);
    require_input(a.test);
    const Image ref = load_image(a.ref);
    const Image test = load_image(a.test);
    out << "psnr=" << format_metric(psnr(ref, test)) << " ssim=" << format_metric(ssim(ref, test)) << '\n';
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Patch-based low-rank despeckling"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions global;
    global.threads_option =
        app.add_option("--threads", global.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    global.seed_option = app.add_option("--seed", global.seed, "Base RNG seed");
    app.add_option("--config", global.config, "JSON config file; command-line flags win")->check(CLI::ExistingFile);

    DenoiseArgs denoise;
    auto* denoise_cmd = app.add_subcommand("denoise", "Denoise one image");
    denoise_cmd->add_option("--input,-i", denoise.input, "Input image (PGM/PNG)")->required();
    denoise_cmd->add_option("--output,-o", denoise.output, "Output image")->required();
    denoise_cmd->add_option("--method", denoise.method, "wnnm or tuned-wnnm")->capture_default_str();
    denoise.intensity_option =
        denoise_cmd->add_option("--intensity", denoise.intensity, "low, mid or high")->capture_default_str();
    denoise_cmd->add_option("--nsig", denoise.nsig, "Explicit nsig (overrides --intensity)");

    AddNoiseArgs noise;
    auto* noise_cmd = app.add_subcommand("add-noise", "Add synthetic speckle noise");
    noise_cmd->add_option("--input,-i", noise.input, "Input image")->required();
    noise_cmd->add_option("--output,-o", noise.output, "Output image")->required();
    noise_cmd->add_option("--sigma", noise.sigma, "Speckle intensity (variance of the noise field)")->required();

    BenchmarkArgs bench;
    auto* bench_cmd = app.add_subcommand("benchmark", "Score the denoisers on a ground-truth dataset");
    bench_cmd->add_option("--dataset", bench.dataset, "Directory of ground-truth images");
    bench_cmd->add_option("--sigmas", bench.sigmas, "Speckle intensities")->delimiter(',');
    bench_cmd->add_option("--methods", bench.methods, "Methods to run")->delimiter(',');
    bench_cmd->add_option("--report", bench.report, "CSV report path");
    bench_cmd->add_option("--aggregate", bench.aggregate, "mean or median");
    bench_cmd->add_option("--nsig", bench.nsig, "Fixed nsig instead of the noise-matched value");
    bench_cmd->add_flag("--quick", bench.quick, "Only the first 6 images");

    PairArgs pairs;
    auto* pairs_cmd = app.add_subcommand("gen-pairs", "Export raw/denoised training pairs");
    pairs_cmd->add_option("--input-dir", pairs.input_dir, "Directory of raw images")->required();
    pairs_cmd->add_option("--output-dir", pairs.output_dir, "Output directory")->required();
    pairs_cmd->add_option("--method", pairs.method, "wnnm or tuned-wnnm")->capture_default_str();
    pairs.intensity_option =
        pairs_cmd->add_option("--intensity", pairs.intensity, "low, mid or high")->capture_default_str();
    pairs_cmd->add_option("--nsig", pairs.nsig, "Explicit nsig (overrides --intensity)");
    pairs_cmd->add_option("--sigma", pairs.sigma, "Synthesise raw images with this speckle intensity");
    pairs_cmd->add_flag("--force", pairs.force, "Overwrite existing outputs");
    pairs_cmd->add_flag("--resume", pairs.resume, "Skip pairs whose manifest checksums verify");

    MetricsArgs metrics;
    auto* metrics_cmd = app.add_subcommand("metrics", "PSNR and SSIM between two images");
    metrics_cmd->add_option("--ref", metrics.ref, "Reference image")->required();
    metrics_cmd->add_option("--test", metrics.test, "Test image")->required();

    std::vector<std::string> argv_storage{"despeckle"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) {
        argv.push_back(a.c_str());
    }

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n' << "run with --help for usage\n";
        return kExitUsage;
    }

    try {
        if (*denoise_cmd) {
            return cmd_denoise(denoise, global, out);
        }
        if (*noise_cmd) {
            return cmd_add_noise(noise, global, out);
        }
        if (*bench_cmd) {
            return cmd_benchmark(bench, global, out, err);
        }
        if (*pairs_cmd) {
            return cmd_gen_pairs(pairs, global, out);
        }
        if (*metrics_cmd) {
            return cmd_metrics(metrics, out);
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

} // namespace despeckle
