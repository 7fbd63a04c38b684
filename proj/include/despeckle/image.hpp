#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace despeckle {

/// Row-major 2D raster. Rows index image rows, columns index image columns.
template <typename Scalar>
using Raster = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Grayscale image, intensities nominally in [0,1].
using Image = Raster<float>;

/// true = valid content, false = padding.
using Mask = Raster<bool>;

using Index = Eigen::Index;

struct Position {
    Index row = 0;
    Index col = 0;

    friend bool operator==(const Position&, const Position&) = default;
};

class ImageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws ImageError unless the image is non-empty and every intensity is finite.
void validate(const Image& img);

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& values)
{
    return values.derived().allFinite();
}

/// Zero-pads on the right and bottom. The mask is true exactly on the source extent.
struct Padded {
    Image image;
    Mask mask;
};

Padded pad_to(const Image& img, Index target_h, Index target_w);

/// Valid rectangle of a pad_to mask, anchored at (0,0). Throws if the mask is not such a rectangle.
struct ValidExtent {
    Index height = 0;
    Index width = 0;
};

ValidExtent valid_extent(const Mask& mask);

Image crop_masked(const Image& img, const Mask& mask);

template <typename Derived>
auto clamp_unit(const Eigen::ArrayBase<Derived>& values)
{
    using Scalar = typename Derived::Scalar;
    return values.max(Scalar(0)).min(Scalar(1));
}

} // namespace despeckle
