#pragma once

#include "despeckle/image.hpp"

#include <cstdint>

namespace despeckle {

/// Multiplicative speckle: y = x + sqrt(12 sigma) u x with u ~ U(-0.5, 0.5),
/// so the noise field has variance sigma.
struct NoiseSpec {
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

enum class Clamp { yes, no };

/// The field N = sqrt(12 sigma) u, one draw per pixel in row-major order.
///
/// Draws come from std::mt19937_64 seeded with spec.seed; each 64-bit output
/// is mapped to [0,1) by taking its top 53 bits, so the stream is bitwise
/// reproducible on every platform.
Raster<double> speckle_field(Index height, Index width, const NoiseSpec& spec);

Image add_speckle(const Image& img, const NoiseSpec& spec, Clamp clamp = Clamp::yes);

/// Standard deviation of the additive term N x implied by a speckled image:
/// sqrt(sigma * E[y^2] / (1 + sigma)), on the [0,1] intensity scale.
double speckle_noise_std(const Image& noisy, double sigma);

/// SplitMix64 finaliser, used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t value) noexcept;

/// Seed for one (image, sigma) cell of a benchmark run.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t image_index, std::uint64_t sigma_index) noexcept;

} // namespace despeckle
