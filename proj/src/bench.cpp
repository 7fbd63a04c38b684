#include "despeckle/bench.hpp"

#include "despeckle/image_io.hpp"
#include "despeckle/noise.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <system_error>

namespace despeckle {

namespace fs = std::filesystem;

double round4(double value)
{
    if (!std::isfinite(value)) {
        return value;
    }
    return std::round(value * 1e4) / 1e4;
}

std::string format_metric(double value)
{
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    if (std::isnan(value)) {
        return "nan";
    }
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.4f", value);
    return buffer;
}

std::vector<fs::path> list_dataset(const fs::path& dir)
{
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) {
        throw ConfigError("dataset directory '" + dir.string() + "' does not exist");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && !name.empty() && name.front() != '.') {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<AggregateRow> aggregate_rows(const std::vector<MetricRow>& rows, Reducer reducer)
{
    struct Cell {
        std::string method;
        double sigma;
        std::vector<double> psnr, ssim, time;
    };
    std::vector<Cell> cells;
    for (const MetricRow& row : rows) {
        if (row.status != "ok") {
            continue;
        }
        auto it = std::find_if(cells.begin(), cells.end(),
                               [&](const Cell& c) { return c.method == row.method && c.sigma == row.sigma; });
        if (it == cells.end()) {
            cells.push_back({row.method, row.sigma, {}, {}, {}});
            it = std::prev(cells.end());
        }
        it->psnr.push_back(row.psnr_db);
        it->ssim.push_back(row.ssim);
        it->time.push_back(row.wall_time_s);
    }
    std::vector<AggregateRow> out;
    for (const Cell& cell : cells) {
        out.push_back({to_string(reducer), cell.method, cell.sigma, round4(reduce(cell.psnr, reducer)),
                       round4(reduce(cell.ssim, reducer)), round4(reduce(cell.time, reducer)), cell.psnr.size()});
    }
    return out;
}

MetricReport run_benchmark(const BenchmarkConfig& config, const ProgressFn& progress)
{
    config.validate();
    std::vector<fs::path> files = list_dataset(config.dataset_dir);
    if (config.max_images > 0 && files.size() > config.max_images) {
        files.resize(config.max_images);
    }
    if (files.empty()) {
        throw ConfigError("dataset directory '" + config.dataset_dir.string() + "' is empty");
    }

    MetricReport report;
    std::size_t loaded = 0;
    for (std::size_t image_index = 0; image_index < files.size(); ++image_index) {
        const fs::path& file = files[image_index];
        const std::string image_id = file.filename().string();
        Image truth;
        try {
            truth = load_image(file);
        } catch (const ImageIoError& e) {
            MetricRow row;
            row.image_id = image_id;
            row.status = std::string("skipped: ") + e.what();
            std::replace(row.status.begin(), row.status.end(), ',', ';');
            report.rows.push_back(row);
            if (progress) {
                progress(row);
            }
            continue;
        }
        ++loaded;
        for (std::size_t sigma_index = 0; sigma_index < config.sigmas.size(); ++sigma_index) {
            const double sigma = config.sigmas[sigma_index];
            const Image noisy = add_speckle(truth, {sigma, derive_seed(config.seed, image_index, sigma_index)});
            const double nsig = config.nsig ? *config.nsig : config.nsig_gain * 255.0 * speckle_noise_std(noisy, sigma);
            for (Method method : config.methods) {
                WnnmParams params = config.params(method);
                params.nsig = nsig;
                const auto start = std::chrono::steady_clock::now();
                const Image denoised = wnnm_denoise(noisy, params, {.threads = config.threads, .on_iteration = {}});
                const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

                MetricRow row;
                row.image_id = image_id;
                row.method = to_string(method);
                row.sigma = sigma;
                row.psnr_db = round4(psnr(truth, denoised));
                row.ssim = round4(ssim(truth, denoised));
                row.wall_time_s = round4(elapsed);
                report.rows.push_back(row);
                if (progress) {
                    progress(row);
                }
            }
        }
    }
    if (loaded == 0) {
        throw ConfigError("dataset directory '" + config.dataset_dir.string() + "' has no readable image");
    }
    report.aggregates = aggregate_rows(report.rows, config.aggregate);
    return report;
}

void write_report_csv(const MetricReport& report, std::ostream& out)
{
    out << "image_id,method,sigma,psnr_db,ssim,wall_time_s,status\n";
    for (const MetricRow& row : report.rows) {
        if (row.status != "ok") {
            out << row.image_id << ",,,,,," << row.status << '\n';
            continue;
        }
        out << row.image_id << ',' << row.method << ',' << format_metric(row.sigma) << ','
            << format_metric(row.psnr_db) << ',' << format_metric(row.ssim) << ','
            << format_metric(row.wall_time_s) << ",ok\n";
    }
    for (const AggregateRow& agg : report.aggregates) {
        out << agg.reducer << ',' << agg.method << ',' << format_metric(agg.sigma) << ','
            << format_metric(agg.psnr_db) << ',' << format_metric(agg.ssim) << ','
            << format_metric(agg.wall_time_s) << ",aggregate:" << agg.images << '\n';
    }
}

void write_report_csv(const MetricReport& report, const fs::path& path)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw ImageIoError(IoErrorKind::unwritable_path, path, "cannot write report");
    }
    write_report_csv(report, out);
}

} // namespace despeckle
