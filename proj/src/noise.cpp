#include "despeckle/noise.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace despeckle {

Raster<double> speckle_field(Index height, Index width, const NoiseSpec& spec)
{
    if (!(spec.sigma >= 0.0)) {
        throw std::invalid_argument("speckle sigma must be non-negative");
    }
    const double amplitude = std::sqrt(12.0 * spec.sigma);
    std::mt19937_64 engine(spec.seed);
    Raster<double> field(height, width);
    for (Index i = 0; i < field.size(); ++i) {
        const double unit = static_cast<double>(engine() >> 11) * 0x1.0p-53;
        field.data()[i] = amplitude * (unit - 0.5);
    }
    return field;
}

Image add_speckle(const Image& img, const NoiseSpec& spec, Clamp clamp)
{
    validate(img);
    if (!(spec.sigma >= 0.0)) {
        throw std::invalid_argument("speckle sigma must be non-negative");
    }
    if (spec.sigma == 0.0) {
        return img;
    }
    const Raster<double> field = speckle_field(img.rows(), img.cols(), spec);
    const Raster<double> x = img.cast<double>();
    Raster<double> y = x + field * x;
    if (clamp == Clamp::yes) {
        y = clamp_unit(y);
    }
    return y.cast<float>();
}

double speckle_noise_std(const Image& noisy, double sigma)
{
    if (!(sigma >= 0.0)) {
        throw std::invalid_argument("speckle sigma must be non-negative");
    }
    const double energy = noisy.cast<double>().square().mean();
    return std::sqrt(sigma * energy / (1.0 + sigma));
}

std::uint64_t mix_seed(std::uint64_t value) noexcept
{
    value += 0x9e3779b97f4a7c15ULL;
    value = (value ^ (value >> 30)) * 0xbf58476d1ce4e5b9ULL;
    value = (value ^ (value >> 27)) * 0x94d049bb133111ebULL;
    return value ^ (value >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t image_index, std::uint64_t sigma_index) noexcept
{
    return mix_seed(base ^ mix_seed(image_index ^ mix_seed(sigma_index)));
}

} // namespace despeckle
