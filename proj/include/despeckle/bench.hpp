#pragma once

#include "despeckle/config.hpp"
#include "despeckle/image.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace despeckle {

/// One benchmark cell. Metric values are rounded to 4 decimals when the row
/// is created so that aggregates are recomputable from the CSV text.
struct MetricRow {
    std::string image_id;
    std::string method;  // empty for skipped images
    double sigma = 0.0;
    double psnr_db = 0.0;
    double ssim = 0.0;
    double wall_time_s = 0.0;
    std::string status = "ok";
};

struct AggregateRow {
    std::string reducer;
    std::string method;
    double sigma = 0.0;
    double psnr_db = 0.0;
    double ssim = 0.0;
    double wall_time_s = 0.0;
    std::size_t images = 0;
};

struct MetricReport {
    std::vector<MetricRow> rows;
    std::vector<AggregateRow> aggregates;
};

double round4(double value);

/// Files considered by the benchmark: regular, non-hidden, sorted by name.
std::vector<std::filesystem::path> list_dataset(const std::filesystem::path& dir);

/// Aggregate rows per (method, sigma), in first-appearance order.
std::vector<AggregateRow> aggregate_rows(const std::vector<MetricRow>& rows, Reducer reducer);

using ProgressFn = std::function<void(const MetricRow&)>;

/// Noise synthesis, denoising and scoring for every image x sigma x method.
/// Throws ConfigError when the dataset holds no readable image.
MetricReport run_benchmark(const BenchmarkConfig& config, const ProgressFn& progress = {});

/// Header `image_id,method,sigma,psnr_db,ssim,wall_time_s,status`, then one
/// row per cell and one per aggregate. Fixed 4-decimal values; `inf` for an
/// infinite PSNR.
void write_report_csv(const MetricReport& report, std::ostream& out);
void write_report_csv(const MetricReport& report, const std::filesystem::path& path);

std::string format_metric(double value);

} // namespace despeckle
