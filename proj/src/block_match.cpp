#include "despeckle/block_match.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace despeckle {

void PatchGeometry::validate() const
{
    if (patch_size < 2) {
        throw std::invalid_argument("patch_size must be at least 2");
    }
    if (step < 1) {
        throw std::invalid_argument("step must be at least 1");
    }
    if (window < patch_size) {
        throw std::invalid_argument("window must be at least patch_size");
    }
    if (stack_size < 1) {
        throw std::invalid_argument("stack_size must be at least 1");
    }
}

PatchGeometry baseline_geometry()
{
    return {.patch_size = 7, .step = 2, .window = 30, .stack_size = 70};
}

PatchGeometry tuned_geometry()
{
    return {.patch_size = 7, .step = 1, .window = 40, .stack_size = 90};
}

SearchRange search_range(Index height, Index width, Position ref, const PatchGeometry& geo)
{
    const Index before = (geo.window - geo.patch_size) / 2;
    const Index after = geo.window - geo.patch_size - before;
    return {
        .row_first = std::max<Index>(0, ref.row - before),
        .row_last = std::min(height - geo.patch_size, ref.row + after),
        .col_first = std::max<Index>(0, ref.col - before),
        .col_last = std::min(width - geo.patch_size, ref.col + after),
    };
}

std::vector<Index> grid_offsets(Index extent, Index patch, Index step)
{
    std::vector<Index> offsets;
    const Index last = extent - patch;
    for (Index o = 0; o <= last; o += step) {
        offsets.push_back(o);
    }
    if (offsets.back() != last) {
        offsets.push_back(last);
    }
    return offsets;
}

std::vector<Position> reference_positions(Index height, Index width, const PatchGeometry& geo)
{
    geo.validate();
    if (height < geo.patch_size || width < geo.patch_size) {
        throw std::invalid_argument("image " + std::to_string(height) + "x" + std::to_string(width)
                                    + " is smaller than the patch size " + std::to_string(geo.patch_size));
    }
    const std::vector<Index> rows = grid_offsets(height, geo.patch_size, geo.step);
    const std::vector<Index> cols = grid_offsets(width, geo.patch_size, geo.step);
    std::vector<Position> positions;
    positions.reserve(rows.size() * cols.size());
    for (Index r : rows) {
        for (Index c : cols) {
            positions.push_back({r, c});
        }
    }
    return positions;
}

template <typename Scalar>
double patch_distance(const Raster<Scalar>& img, Position a, Position b, Index patch_size)
{
    double sum = 0.0;
    for (Index i = 0; i < patch_size; ++i) {
        const Scalar* pa = img.data() + (a.row + i) * img.cols() + a.col;
        const Scalar* pb = img.data() + (b.row + i) * img.cols() + b.col;
        for (Index j = 0; j < patch_size; ++j) {
            const double d = static_cast<double>(pa[j]) - static_cast<double>(pb[j]);
            sum += d * d;
        }
    }
    return sum / static_cast<double>(patch_size * patch_size);
}

template <typename Scalar>
PatchStack<Scalar> match_block(const Raster<Scalar>& img, Position ref, const PatchGeometry& geo)
{
    const SearchRange range = search_range(img.rows(), img.cols(), ref, geo);
    if (ref.row < 0 || ref.col < 0 || ref.row > img.rows() - geo.patch_size || ref.col > img.cols() - geo.patch_size) {
        throw std::out_of_range("reference patch lies outside the image");
    }

    struct Candidate {
        double distance;
        Index order;
        Position pos;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(static_cast<std::size_t>((range.row_last - range.row_first + 1)
                                                * (range.col_last - range.col_first + 1)));
    Index order = 0;
    for (Index r = range.row_first; r <= range.row_last; ++r) {
        for (Index c = range.col_first; c <= range.col_last; ++c, ++order) {
            const Position pos{r, c};
            if (pos == ref) {
                continue;
            }
            candidates.push_back({patch_distance(img, ref, pos, geo.patch_size), order, pos});
        }
    }

    const auto keep = std::min<std::size_t>(static_cast<std::size_t>(geo.stack_size - 1), candidates.size());
    const auto closer = [](const Candidate& a, const Candidate& b) {
        return a.distance < b.distance || (a.distance == b.distance && a.order < b.order);
    };
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      closer);

    PatchStack<Scalar> stack;
    stack.ref = ref;
    stack.members.reserve(keep + 1);
    stack.distances.reserve(keep + 1);
    stack.members.push_back(ref);
    stack.distances.push_back(0.0);
    for (std::size_t i = 0; i < keep; ++i) {
        stack.members.push_back(candidates[i].pos);
        stack.distances.push_back(candidates[i].distance);
    }
    extract_stack(img, geo.patch_size, stack);
    return stack;
}

template <typename Scalar>
void extract_stack(const Raster<Scalar>& img, Index patch_size, PatchStack<Scalar>& stack)
{
    stack.matrix.resize(patch_size * patch_size, static_cast<Index>(stack.members.size()));
    for (Index k = 0; k < stack.matrix.cols(); ++k) {
        const Position pos = stack.members[static_cast<std::size_t>(k)];
        Scalar* column = stack.matrix.col(k).data();
        for (Index i = 0; i < patch_size; ++i) {
            const Scalar* row = img.data() + (pos.row + i) * img.cols() + pos.col;
            std::copy(row, row + patch_size, column + i * patch_size);
        }
    }
}

#define DESPECKLE_INSTANTIATE_BLOCK_MATCH(Scalar)                                                       \
    template double patch_distance<Scalar>(const Raster<Scalar>&, Position, Position, Index);           \
    template PatchStack<Scalar> match_block<Scalar>(const Raster<Scalar>&, Position, const PatchGeometry&); \
    template void extract_stack<Scalar>(const Raster<Scalar>&, Index, PatchStack<Scalar>&);

DESPECKLE_INSTANTIATE_BLOCK_MATCH(float)
DESPECKLE_INSTANTIATE_BLOCK_MATCH(double)

#undef DESPECKLE_INSTANTIATE_BLOCK_MATCH

} // namespace despeckle
