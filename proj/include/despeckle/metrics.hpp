#pragma once

#include "despeckle/image.hpp"

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace despeckle {

/// Peak of the byte scale used by both metrics. Images are compared on
/// v * 255 without quantisation.
inline constexpr double kPeak = 255.0;

class MetricError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

template <typename A, typename B>
void require_same_shape(const Eigen::DenseBase<A>& ref, const Eigen::DenseBase<B>& test)
{
    if (ref.rows() != test.rows() || ref.cols() != test.cols()) {
        throw MetricError("image dimensions differ: " + std::to_string(ref.rows()) + "x" + std::to_string(ref.cols())
                          + " vs " + std::to_string(test.rows()) + "x" + std::to_string(test.cols()));
    }
}

template <typename A, typename B>
double mse(const Eigen::ArrayBase<A>& ref, const Eigen::ArrayBase<B>& test)
{
    require_same_shape(ref, test);
    return ((ref.template cast<double>() - test.template cast<double>()) * kPeak).square().mean();
}

/// 10 log10(255^2 / MSE); +infinity when the images are identical.
template <typename A, typename B>
double psnr(const Eigen::ArrayBase<A>& ref, const Eigen::ArrayBase<B>& test)
{
    const double err = mse(ref, test);
    if (err == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(kPeak * kPeak / err);
}

struct SsimParams {
    Index window = 11;
    double window_sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double peak = kPeak;

    void validate() const;
};

/// Mean SSIM over every fully-contained Gaussian window (no border padding).
double ssim(const Raster<double>& ref, const Raster<double>& test, const SsimParams& params = {});

template <typename A, typename B>
double ssim(const Eigen::ArrayBase<A>& ref, const Eigen::ArrayBase<B>& test, const SsimParams& params = {})
{
    return ssim(Raster<double>(ref.template cast<double>()), Raster<double>(test.template cast<double>()), params);
}

/// Normalised 1D Gaussian taps of length params.window.
Eigen::VectorXd gaussian_taps(const SsimParams& params);

enum class Reducer { mean, median };

double reduce(std::span<const double> values, Reducer reducer);
Reducer parse_reducer(const std::string& name);
std::string to_string(Reducer reducer);

/// Sum of absolute forward differences along rows and columns.
double total_variation(const Image& img);

} // namespace despeckle
