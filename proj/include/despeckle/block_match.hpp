#pragma once

#include "despeckle/image.hpp"

#include <Eigen/Core>

#include <vector>

namespace despeckle {

/// Patch geometry shared by block matching and the low-rank step.
///
/// `window` is the side of the square search region centred on the reference
/// patch; candidates are patches lying entirely inside that region and inside
/// the image, so windows are clipped at borders rather than padded.
struct PatchGeometry {
    Index patch_size = 7;
    Index step = 2;
    Index window = 30;
    Index stack_size = 70;

    void validate() const;
};

PatchGeometry baseline_geometry();
PatchGeometry tuned_geometry();

template <typename Scalar>
using PatchMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// A reference patch and its nearest neighbours, one vectorised patch per column.
template <typename Scalar>
struct PatchStack {
    Position ref;
    std::vector<Position> members;  // members[0] == ref
    std::vector<double> distances;  // non-decreasing, distances[0] == 0
    PatchMatrix<Scalar> matrix;     // patch_size^2 x members.size()
};

/// Inclusive ranges of candidate top-left corners for one reference patch.
struct SearchRange {
    Index row_first = 0;
    Index row_last = 0;
    Index col_first = 0;
    Index col_last = 0;
};

SearchRange search_range(Index height, Index width, Position ref, const PatchGeometry& geo);

/// Stride-`step` grid of top-left offsets along one axis; the last offset is
/// clamped to extent - patch so the whole axis is covered.
std::vector<Index> grid_offsets(Index extent, Index patch, Index step);

std::vector<Position> reference_positions(Index height, Index width, const PatchGeometry& geo);

template <typename Scalar>
std::vector<Position> reference_positions(const Raster<Scalar>& img, const PatchGeometry& geo)
{
    return reference_positions(img.rows(), img.cols(), geo);
}

/// Mean squared difference between two p x p patches, accumulated in row-major order.
template <typename Scalar>
double patch_distance(const Raster<Scalar>& img, Position a, Position b, Index patch_size);

/// Keeps the `stack_size` candidates closest to the reference. The reference
/// is always first; remaining ties resolve in row-major candidate order.
template <typename Scalar>
PatchStack<Scalar> match_block(const Raster<Scalar>& img, Position ref, const PatchGeometry& geo);

/// Refills stack.matrix from `img` at the stack's existing member positions.
template <typename Scalar>
void extract_stack(const Raster<Scalar>& img, Index patch_size, PatchStack<Scalar>& stack);

} // namespace despeckle
