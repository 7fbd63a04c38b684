#include "despeckle/wnnm.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <exception>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace despeckle {

void WnnmParams::validate() const
{
    geo.validate();
    if (iterations < 1) {
        throw std::invalid_argument("iterations must be at least 1");
    }
    if (!(delta >= 0.0 && delta <= 1.0)) {
        throw std::invalid_argument("delta must lie in [0,1]");
    }
    if (!(c > 0.0)) {
        throw std::invalid_argument("c must be positive");
    }
    if (!(eps > 0.0)) {
        throw std::invalid_argument("eps must be positive");
    }
    if (!(nsig >= 0.0)) {
        throw std::invalid_argument("nsig must be non-negative");
    }
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("gamma must lie in (0,1]");
    }
    if (match_every < 1) {
        throw std::invalid_argument("match_every must be at least 1");
    }
}

WnnmParams baseline_params()
{
    WnnmParams params;
    params.geo = baseline_geometry();
    params.iterations = 8;
    params.match_every = 2;
    return params;
}

WnnmParams tuned_params()
{
    WnnmParams params;
    params.geo = tuned_geometry();
    params.iterations = 10;
    params.match_every = 1;
    return params;
}

double intensity_nsig(Intensity level)
{
    switch (level) {
    case Intensity::low: return 15.0;
    case Intensity::mid: return 30.0;
    case Intensity::high: return 50.0;
    }
    throw std::invalid_argument("unknown intensity level");
}

WnnmParams denoising_intensity_preset(Intensity level)
{
    return method_preset(Method::tuned_wnnm, level);
}

WnnmParams method_preset(Method method, Intensity level)
{
    WnnmParams params = method == Method::tuned_wnnm ? tuned_params() : baseline_params();
    params.nsig = intensity_nsig(level);
    return params;
}

std::string to_string(Method method)
{
    return method == Method::tuned_wnnm ? "tuned-wnnm" : "wnnm";
}

std::string to_string(Intensity level)
{
    switch (level) {
    case Intensity::low: return "low";
    case Intensity::mid: return "mid";
    case Intensity::high: return "high";
    }
    return "mid";
}

std::string to_string(WeightRule rule)
{
    return rule == WeightRule::plain ? "plain" : "noise-scaled";
}

WeightRule parse_weight_rule(const std::string& name)
{
    if (name == "noise-scaled") {
        return WeightRule::noise_scaled;
    }
    if (name == "plain") {
        return WeightRule::plain;
    }
    throw std::invalid_argument("unknown weight rule '" + name + "' (expected noise-scaled or plain)");
}

Method parse_method(const std::string& name)
{
    if (name == "wnnm") {
        return Method::wnnm;
    }
    if (name == "tuned-wnnm") {
        return Method::tuned_wnnm;
    }
    throw std::invalid_argument("unknown method '" + name + "' (expected wnnm or tuned-wnnm)");
}

Intensity parse_intensity(const std::string& name)
{
    if (name == "low") {
        return Intensity::low;
    }
    if (name == "mid") {
        return Intensity::mid;
    }
    if (name == "high") {
        return Intensity::high;
    }
    throw std::invalid_argument("unknown intensity '" + name + "' (expected low, mid or high)");
}

template <typename Scalar>
SvtResult<Scalar> weighted_svt(const PatchMatrix<Scalar>& centered, Index stack_size, double local_sigma, double c,
                               double eps, WeightRule rule)
{
    // Singular pairs come from the eigendecomposition of the smaller Gram
    // matrix (lower triangle only). Eigenvectors are only formed when some
    // component survives the shrinkage.
    const bool tall = centered.rows() > centered.cols();
    const Index n = std::min(centered.rows(), centered.cols());
    PatchMatrix<Scalar> gram = PatchMatrix<Scalar>::Zero(n, n);
    if (tall) {
        gram.template selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
    } else {
        gram.template selfadjointView<Eigen::Lower>().rankUpdate(centered);
    }
    const Eigen::Tridiagonalization<PatchMatrix<Scalar>> tri(gram);
    const Vector<Scalar> diagonal = tri.diagonal();
    const Vector<Scalar> sub_diagonal = tri.subDiagonal();
    Eigen::SelfAdjointEigenSolver<PatchMatrix<Scalar>> eig;
    eig.computeFromTridiagonal(diagonal, sub_diagonal, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) {
        throw std::runtime_error("eigendecomposition of a patch stack failed");
    }

    SvtResult<Scalar> result;
    result.singular_values = eig.eigenvalues().reverse().cwiseMax(Scalar(0)).cwiseSqrt();
    result.shrunk = weighted_shrinkage(result.singular_values, stack_size, local_sigma, c, eps, rule);
    result.retained = (result.shrunk.array() > Scalar(0)).count();

    const Index keep = result.retained;
    if (keep == 0) {
        result.matrix = PatchMatrix<Scalar>::Zero(centered.rows(), centered.cols());
        return result;
    }
    eig.computeFromTridiagonal(diagonal, sub_diagonal, Eigen::ComputeEigenvectors);
    if (eig.info() != Eigen::Success) {
        throw std::runtime_error("eigendecomposition of a patch stack failed");
    }
    const PatchMatrix<Scalar> basis = tri.matrixQ() * eig.eigenvectors().rightCols(keep).rowwise().reverse();
    const Vector<Scalar> gain = result.shrunk.head(keep).cwiseQuotient(result.singular_values.head(keep));
    if (tall) {
        result.matrix = (centered * basis) * gain.asDiagonal() * basis.transpose();
    } else {
        result.matrix = basis * gain.asDiagonal() * (basis.transpose() * centered);
    }
    return result;
}

template <typename Scalar>
StackEstimate<Scalar> shrink_stack(const PatchStack<Scalar>& stack, double local_sigma, const WnnmParams& params)
{
    if (!(local_sigma >= 0.0)) {
        throw std::invalid_argument("local_sigma must be non-negative");
    }
    const Vector<Scalar> mean = stack.matrix.rowwise().mean();
    const PatchMatrix<Scalar> centered = stack.matrix.colwise() - mean;
    const SvtResult<Scalar> svt = weighted_svt(centered, stack.matrix.cols(), local_sigma, params.c, params.eps, params.weight_rule);

    StackEstimate<Scalar> estimate;
    estimate.positions = stack.members;
    estimate.denoised = svt.matrix.colwise() + mean;
    estimate.weight = 1.0 / (1.0 + static_cast<double>(svt.retained));
    return estimate;
}

Aggregator::Aggregator(Index height, Index width)
    : numerator_(Raster<double>::Zero(height, width))
    , denominator_(Raster<double>::Zero(height, width))
{
}

namespace {

Index patch_side(Index rows)
{
    auto side = static_cast<Index>(std::lround(std::sqrt(static_cast<double>(rows))));
    if (side * side != rows) {
        throw std::invalid_argument("estimate rows are not a square patch size");
    }
    return side;
}

} // namespace

template <typename Scalar>
void Aggregator::add(const StackEstimate<Scalar>& estimate)
{
    const Index side = patch_side(estimate.denoised.rows());
    if (static_cast<Index>(estimate.positions.size()) != estimate.denoised.cols()) {
        throw std::invalid_argument("estimate has mismatched positions and columns");
    }
    const double weight = estimate.weight;
    for (Index k = 0; k < estimate.denoised.cols(); ++k) {
        const Position pos = estimate.positions[static_cast<std::size_t>(k)];
        if (pos.row < 0 || pos.col < 0 || pos.row + side > numerator_.rows() || pos.col + side > numerator_.cols()) {
            throw std::out_of_range("estimate position lies outside the image");
        }
        const Scalar* column = estimate.denoised.col(k).data();
        for (Index i = 0; i < side; ++i) {
            double* num = numerator_.data() + (pos.row + i) * numerator_.cols() + pos.col;
            double* den = denominator_.data() + (pos.row + i) * denominator_.cols() + pos.col;
            for (Index j = 0; j < side; ++j) {
                num[j] += weight * static_cast<double>(column[i * side + j]);
                den[j] += weight;
            }
        }
    }
}

Raster<double> Aggregator::finish() const
{
    if ((denominator_ <= 0.0).any()) {
        throw std::logic_error("aggregation left a pixel without any patch weight");
    }
    return numerator_ / denominator_;
}

template <typename Scalar>
Image aggregate(std::span<const StackEstimate<Scalar>> estimates, Index height, Index width)
{
    Aggregator acc(height, width);
    for (const auto& estimate : estimates) {
        acc.add(estimate);
    }
    return acc.finish().cast<float>();
}

namespace {

// Stacks are shrunk in parallel one batch at a time and then accumulated in
// reference order, so the result does not depend on the worker count.
constexpr std::size_t kBatchSize = 1024;

int resolve_threads(int requested)
{
#ifdef _OPENMP
    return requested > 0 ? requested : omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

} // namespace

Image wnnm_denoise(const Image& noisy, const WnnmParams& params, const DenoiseOptions& options)
{
    validate(noisy);
    params.validate();
    const Index h = noisy.rows();
    const Index w = noisy.cols();
    const std::vector<Position> refs = reference_positions(h, w, params.geo);
    const int threads = resolve_threads(options.threads);

    const Raster<double> y = noisy.cast<double>();
    Raster<double> x = y;
    std::vector<std::vector<Position>> groups(refs.size());
    std::vector<StackEstimate<double>> batch(kBatchSize);
    const double target_var = (params.nsig / 255.0) * (params.nsig / 255.0);

    for (int k = 1; k <= params.iterations; ++k) {
        const Raster<double> working = x + params.delta * (y - x);
        const bool rematch = (k - 1) % params.match_every == 0;
        const double residual_var = (y - working).square().mean();
        const double local_sigma = params.gamma * std::sqrt(std::max(target_var - residual_var, 0.0));

        Aggregator acc(h, w);
        for (std::size_t first = 0; first < refs.size(); first += kBatchSize) {
            const auto count = static_cast<std::ptrdiff_t>(std::min(kBatchSize, refs.size() - first));
            std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads)
            for (std::ptrdiff_t i = 0; i < count; ++i) {
                try {
                    const std::size_t r = first + static_cast<std::size_t>(i);
                    PatchStack<double> stack;
                    if (rematch) {
                        stack = match_block(working, refs[r], params.geo);
                        groups[r] = stack.members;
                    } else {
                        stack.ref = refs[r];
                        stack.members = groups[r];
                        extract_stack(working, params.geo.patch_size, stack);
                    }
                    batch[static_cast<std::size_t>(i)] = shrink_stack(stack, local_sigma, params);
                } catch (...) {
#pragma omp critical(despeckle_wnnm_failure)
                    failure = std::current_exception();
                }
            }
            if (failure) {
                std::rethrow_exception(failure);
            }
            for (std::ptrdiff_t i = 0; i < count; ++i) {
                acc.add(batch[static_cast<std::size_t>(i)]);
            }
        }
        x = acc.finish();

        if (options.on_iteration) {
            options.on_iteration({k, rematch, local_sigma, &working, &x});
        }
    }
    return clamp_unit(x).cast<float>();
}

template SvtResult<float> weighted_svt<float>(const PatchMatrix<float>&, Index, double, double, double, WeightRule);
template SvtResult<double> weighted_svt<double>(const PatchMatrix<double>&, Index, double, double, double, WeightRule);
template StackEstimate<float> shrink_stack<float>(const PatchStack<float>&, double, const WnnmParams&);
template StackEstimate<double> shrink_stack<double>(const PatchStack<double>&, double, const WnnmParams&);
template void Aggregator::add<float>(const StackEstimate<float>&);
template void Aggregator::add<double>(const StackEstimate<double>&);
template Image aggregate<float>(std::span<const StackEstimate<float>>, Index, Index);
template Image aggregate<double>(std::span<const StackEstimate<double>>, Index, Index);

} // namespace despeckle
