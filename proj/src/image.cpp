#include "despeckle/image.hpp"

#include <sstream>

namespace despeckle {

void validate(const Image& img)
{
    if (img.rows() < 1 || img.cols() < 1) {
        throw ImageError("image must be at least 1x1");
    }
    if (!img.allFinite()) {
        throw ImageError("image contains non-finite intensities");
    }
}

Padded pad_to(const Image& img, Index target_h, Index target_w)
{
    if (target_h < img.rows() || target_w < img.cols()) {
        std::ostringstream msg;
        msg << "pad target " << target_h << "x" << target_w << " is smaller than source " << img.rows() << "x"
            << img.cols();
        throw ImageError(msg.str());
    }
    Padded out{Image::Zero(target_h, target_w), Mask::Constant(target_h, target_w, false)};
    out.image.topLeftCorner(img.rows(), img.cols()) = img;
    out.mask.topLeftCorner(img.rows(), img.cols()).setConstant(true);
    return out;
}

ValidExtent valid_extent(const Mask& mask)
{
    // Extent of the first row and first column, then check the whole mask agrees.
    ValidExtent ext;
    while (ext.width < mask.cols() && mask(0, ext.width)) {
        ++ext.width;
    }
    while (ext.height < mask.rows() && mask(ext.height, 0)) {
        ++ext.height;
    }
    for (Index r = 0; r < mask.rows(); ++r) {
        for (Index c = 0; c < mask.cols(); ++c) {
            const bool expected = r < ext.height && c < ext.width;
            if (mask(r, c) != expected) {
                throw ImageError("mask valid region is not a top-left anchored rectangle");
            }
        }
    }
    return ext;
}

Image crop_masked(const Image& img, const Mask& mask)
{
    if (img.rows() != mask.rows() || img.cols() != mask.cols()) {
        throw ImageError("mask dimensions do not match the image");
    }
    const ValidExtent ext = valid_extent(mask);
    if (ext.height == 0 || ext.width == 0) {
        throw ImageError("mask has an empty valid region");
    }
    return img.topLeftCorner(ext.height, ext.width);
}

} // namespace despeckle
