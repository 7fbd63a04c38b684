#include "despeckle/block_match.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace despeckle;
using despeckle::testing::exhaustive_match;

namespace {

Raster<double> random_image(Index h, Index w, std::mt19937& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Raster<double> img(h, w);
    for (Index i = 0; i < img.size(); ++i) {
        img.data()[i] = unit(rng);
    }
    return img;
}

std::vector<Index> rows_of(const std::vector<Position>& ps)
{
    std::vector<Index> out;
    for (const auto& p : ps) {
        out.push_back(p.row);
    }
    return out;
}

} // namespace

TEST_CASE("reference grid")
{
    PatchGeometry geo{.patch_size = 4, .step = 4, .window = 8, .stack_size = 4};
    SUBCASE("exact tiling")
    {
        const auto refs = reference_positions(8, 8, geo);
        REQUIRE(refs.size() == 4);
        CHECK(refs[0] == Position{0, 0});
        CHECK(refs[1] == Position{0, 4});
        CHECK(refs[2] == Position{4, 0});
        CHECK(refs[3] == Position{4, 4});
    }
    SUBCASE("clamped last offset")
    {
        CHECK(grid_offsets(9, 4, 4) == std::vector<Index>{0, 4, 5});
        CHECK(reference_positions(9, 9, geo).size() == 9);
    }
    SUBCASE("dense grid")
    {
        geo.step = 1;
        CHECK(reference_positions(13, 10, geo).size() == static_cast<std::size_t>((13 - 4 + 1) * (10 - 4 + 1)));
    }
    SUBCASE("image smaller than patch")
    {
        CHECK_THROWS_AS(reference_positions(3, 9, geo), std::invalid_argument);
    }
}

TEST_CASE("every pixel is covered when the step does not exceed the patch")
{
    std::mt19937 rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        const Index p = 2 + rng() % 6;
        PatchGeometry geo{.patch_size = p, .step = 1 + static_cast<Index>(rng() % p), .window = p + 4, .stack_size = 3};
        const Index h = p + rng() % 20;
        const Index w = p + rng() % 20;
        Raster<int> hits = Raster<int>::Zero(h, w);
        for (const Position& pos : reference_positions(h, w, geo)) {
            hits.block(pos.row, pos.col, p, p) += 1;
        }
        CHECK((hits > 0).all());
    }
}

TEST_CASE("geometry validation")
{
    CHECK_THROWS(PatchGeometry{.patch_size = 1, .step = 1, .window = 4, .stack_size = 2}.validate());
    CHECK_THROWS(PatchGeometry{.patch_size = 4, .step = 0, .window = 4, .stack_size = 2}.validate());
    CHECK_THROWS(PatchGeometry{.patch_size = 4, .step = 1, .window = 3, .stack_size = 2}.validate());
    CHECK_THROWS(PatchGeometry{.patch_size = 4, .step = 1, .window = 4, .stack_size = 0}.validate());
    const PatchGeometry base = baseline_geometry();
    const PatchGeometry tuned = tuned_geometry();
    CHECK(tuned.step == 1);
    CHECK(tuned.window > base.window);
    CHECK(tuned.stack_size > base.stack_size);
}

TEST_CASE("constant image keeps the first candidates in window order")
{
    const Raster<double> img = Raster<double>::Constant(20, 20, 0.4);
    const PatchGeometry geo{.patch_size = 3, .step = 1, .window = 9, .stack_size = 5};
    const Position ref{6, 6};
    const PatchStack<double> stack = match_block(img, ref, geo);
    REQUIRE(stack.members.size() == 5);
    CHECK(stack.members[0] == ref);
    // window top-left is (3,3); ref excluded from the rest
    CHECK(stack.members[1] == Position{3, 3});
    CHECK(stack.members[2] == Position{3, 4});
    CHECK(stack.members[4] == Position{3, 6});
    for (Index k = 1; k < stack.matrix.cols(); ++k) {
        CHECK(stack.matrix.col(k) == stack.matrix.col(0));
    }
}

TEST_CASE("identical patch wins over a distinct one")
{
    std::mt19937 rng(8);
    Raster<double> img = Raster<double>::Zero(16, 16);
    const Raster<double> motif = random_image(3, 3, rng);
    img.block(2, 2, 3, 3) = motif;
    img.block(9, 10, 3, 3) = motif;
    img.block(5, 12, 3, 3) = motif + 0.3;
    const PatchGeometry geo{.patch_size = 3, .step = 1, .window = 32, .stack_size = 2};
    const PatchStack<double> stack = match_block(img, {2, 2}, geo);
    REQUIRE(stack.members.size() == 2);
    CHECK(stack.members[1] == Position{9, 10});
    CHECK(stack.distances[1] == 0.0);
}

TEST_CASE("clipped corner window returns fewer members")
{
    const Raster<double> img = Raster<double>::Constant(8, 8, 0.1);
    const PatchGeometry geo{.patch_size = 4, .step = 1, .window = 6, .stack_size = 50};
    const PatchStack<double> stack = match_block(img, {0, 0}, geo);
    // window spans offsets -1..1; clipping keeps 0..1 in each axis
    CHECK(stack.members.size() == 4);
    CHECK(stack.matrix.cols() == 4);
}

TEST_CASE("stack matrix columns are row-major patches")
{
    std::mt19937 rng(2);
    const Raster<double> img = random_image(12, 12, rng);
    const PatchGeometry geo{.patch_size = 3, .step = 1, .window = 7, .stack_size = 6};
    const PatchStack<double> stack = match_block(img, {4, 5}, geo);
    for (std::size_t k = 0; k < stack.members.size(); ++k) {
        const Position pos = stack.members[k];
        for (Index i = 0; i < 3; ++i) {
            for (Index j = 0; j < 3; ++j) {
                CHECK(stack.matrix(i * 3 + j, static_cast<Index>(k)) == img(pos.row + i, pos.col + j));
            }
        }
    }
}

TEST_CASE("match_block agrees with exhaustive search")
{
    std::mt19937 rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        const Index p = 2 + rng() % 5;
        const Index h = p + rng() % (33 - p);
        const Index w = p + rng() % (33 - p);
        Raster<double> img = random_image(h, w, rng);
        if (trial % 4 == 0) {
            img = (img * 3.0).floor() / 3.0;  // many exact ties
        }
        const PatchGeometry geo{.patch_size = p,
                                .step = 1,
                                .window = p + static_cast<Index>(rng() % 12),
                                .stack_size = 1 + static_cast<Index>(rng() % 30)};
        const Position ref{static_cast<Index>(rng() % (h - p + 1)), static_cast<Index>(rng() % (w - p + 1))};
        const PatchStack<double> stack = match_block(img, ref, geo);
        const auto oracle = exhaustive_match(img, ref, geo.patch_size, geo.window, geo.stack_size);
        CHECK(rows_of(stack.members) == rows_of(oracle.members));
        CHECK(stack.members == oracle.members);
        CHECK(stack.distances == oracle.distances);
        for (std::size_t i = 1; i < stack.distances.size(); ++i) {
            CHECK(stack.distances[i - 1] <= stack.distances[i]);
        }
    }
}

TEST_CASE("float and double rasters match the same way")
{
    std::mt19937 rng(5);
    const Raster<double> img = random_image(20, 20, rng);
    const Raster<float> imgf = img.cast<float>();
    const PatchGeometry geo{.patch_size = 4, .step = 1, .window = 12, .stack_size = 8};
    const auto a = match_block(imgf, {7, 7}, geo);
    const auto b = exhaustive_match(imgf, {7, 7}, 4, 12, 8);
    CHECK(a.members == b.members);
}
