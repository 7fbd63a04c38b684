#include "despeckle/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace despeckle {

void SsimParams::validate() const
{
    if (window < 3 || window % 2 == 0) {
        throw MetricError("SSIM window must be odd and at least 3");
    }
    if (!(window_sigma > 0.0) || !(k1 > 0.0) || !(k2 > 0.0) || !(peak > 0.0)) {
        throw MetricError("SSIM window_sigma, k1, k2 and peak must be positive");
    }
}

Eigen::VectorXd gaussian_taps(const SsimParams& params)
{
    const Index half = params.window / 2;
    Eigen::VectorXd taps(params.window);
    for (Index i = 0; i < params.window; ++i) {
        const double d = static_cast<double>(i - half);
        taps(i) = std::exp(-d * d / (2.0 * params.window_sigma * params.window_sigma));
    }
    return taps / taps.sum();
}

namespace {

// Separable 'valid' filtering: output is (h - n + 1) x (w - n + 1).
Raster<double> filter_valid(const Raster<double>& src, const Eigen::VectorXd& taps)
{
    const Index n = taps.size();
    const Index out_w = src.cols() - n + 1;
    const Index out_h = src.rows() - n + 1;
    Raster<double> horizontal = Raster<double>::Zero(src.rows(), out_w);
    for (Index t = 0; t < n; ++t) {
        horizontal += taps(t) * src.middleCols(t, out_w);
    }
    Raster<double> out = Raster<double>::Zero(out_h, out_w);
    for (Index t = 0; t < n; ++t) {
        out += taps(t) * horizontal.middleRows(t, out_h);
    }
    return out;
}

} // namespace

double ssim(const Raster<double>& ref, const Raster<double>& test, const SsimParams& params)
{
    params.validate();
    require_same_shape(ref, test);
    if (ref.rows() < params.window || ref.cols() < params.window) {
        throw MetricError("image is smaller than the SSIM window");
    }
    const Eigen::VectorXd taps = gaussian_taps(params);
    const Raster<double> x = ref * kPeak;
    const Raster<double> y = test * kPeak;

    const Raster<double> mu_x = filter_valid(x, taps);
    const Raster<double> mu_y = filter_valid(y, taps);
    const Raster<double> var_x = filter_valid(x * x, taps) - mu_x * mu_x;
    const Raster<double> var_y = filter_valid(y * y, taps) - mu_y * mu_y;
    const Raster<double> cov = filter_valid(x * y, taps) - mu_x * mu_y;

    const double c1 = (params.k1 * params.peak) * (params.k1 * params.peak);
    const double c2 = (params.k2 * params.peak) * (params.k2 * params.peak);
    const Raster<double> score = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2))
                                 / ((mu_x.square() + mu_y.square() + c1) * (var_x + var_y + c2));
    return score.mean();
}

double reduce(std::span<const double> values, Reducer reducer)
{
    if (values.empty()) {
        throw MetricError("cannot reduce an empty set of values");
    }
    if (reducer == Reducer::mean) {
        return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    if (sorted.size() % 2 == 1) {
        return sorted[mid];
    }
    return 0.5 * (sorted[mid - 1] + sorted[mid]);
}

Reducer parse_reducer(const std::string& name)
{
    if (name == "mean") {
        return Reducer::mean;
    }
    if (name == "median") {
        return Reducer::median;
    }
    throw MetricError("unknown aggregate '" + name + "' (expected mean or median)");
}

std::string to_string(Reducer reducer)
{
    return reducer == Reducer::median ? "median" : "mean";
}

double total_variation(const Image& img)
{
    const Raster<double> v = img.cast<double>();
    double tv = 0.0;
    if (v.cols() > 1) {
        tv += (v.rightCols(v.cols() - 1) - v.leftCols(v.cols() - 1)).abs().sum();
    }
    if (v.rows() > 1) {
        tv += (v.bottomRows(v.rows() - 1) - v.topRows(v.rows() - 1)).abs().sum();
    }
    return tv;
}

} // namespace despeckle
