#pragma once

#include "despeckle/block_match.hpp"
#include "despeckle/image.hpp"

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace despeckle {

/// How singular-value weights scale with the noise level.
///
/// noise_scaled: w_i = c sqrt(K) local_sigma^2 / (s_i + eps), the weighting of the
///               original weighted-nuclear-norm denoiser.
/// plain:        w_i = c sqrt(K) / (s_i + eps), independent of local_sigma apart
///               from the signal estimate s_i.
enum class WeightRule { noise_scaled, plain };

/// Knobs of the iterative low-rank denoiser.
///
/// `nsig` is the assumed noise standard deviation on the [0,255] scale; it is
/// the single denoising-intensity control. `delta` re-injects a fraction of the
/// noisy input at each iteration, `gamma` scales the re-estimated residual
/// noise level, and `c`/`eps` shape the singular-value weights.
struct WnnmParams {
    PatchGeometry geo = baseline_geometry();
    int iterations = 8;
    double delta = 0.1;
    double c = 2.0 * std::sqrt(2.0);
    double eps = 1e-16;
    double nsig = 30.0;
    double gamma = 0.7;
    int match_every = 2;
    WeightRule weight_rule = WeightRule::noise_scaled;

    void validate() const;
};

WnnmParams baseline_params();
WnnmParams tuned_params();

enum class Method { wnnm, tuned_wnnm };
enum class Intensity { low, mid, high };

double intensity_nsig(Intensity level);

/// Tuned preset with nsig 15 / 30 / 50.
WnnmParams denoising_intensity_preset(Intensity level);

/// Preset for `method` with nsig taken from `level`.
WnnmParams method_preset(Method method, Intensity level = Intensity::mid);

std::string to_string(Method method);
std::string to_string(WeightRule rule);
WeightRule parse_weight_rule(const std::string& name);
std::string to_string(Intensity level);
Method parse_method(const std::string& name);
Intensity parse_intensity(const std::string& name);

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Weighted singular-value shrinkage for a stack of `stack_size` patches.
///
///   signal estimate  s_i = sqrt(max(sv_i^2 - stack_size * local_sigma^2, 0))
///   weight           w_i = c * sqrt(stack_size) * g / (s_i + eps)
///   shrunk           sv'_i = max(sv_i - w_i, 0)
///
/// with g = local_sigma^2 under WeightRule::noise_scaled and g = 1 under
/// WeightRule::plain. Small singular values get large weights, so they are
/// removed first and the shrunk values stay sorted.
template <typename Derived>
Vector<typename Derived::Scalar> weighted_shrinkage(const Eigen::MatrixBase<Derived>& singular_values,
                                                    Index stack_size, double local_sigma, double c, double eps,
                                                    WeightRule rule = WeightRule::noise_scaled)
{
    using Scalar = typename Derived::Scalar;
    const double noise_energy = static_cast<double>(stack_size) * local_sigma * local_sigma;
    const double gain = rule == WeightRule::noise_scaled ? local_sigma * local_sigma : 1.0;
    const double scale = c * std::sqrt(static_cast<double>(stack_size)) * gain;
    return singular_values.derived().unaryExpr([=](Scalar sv) {
        const double value = static_cast<double>(sv);
        const double signal = std::sqrt(std::max(value * value - noise_energy, 0.0));
        const double weight = scale / (signal + eps);
        return static_cast<Scalar>(std::max(value - weight, 0.0));
    });
}

template <typename Scalar>
struct SvtResult {
    PatchMatrix<Scalar> matrix;
    Vector<Scalar> singular_values;  // descending
    Vector<Scalar> shrunk;           // descending, shrunk <= singular_values
    Index retained = 0;              // nonzero entries of `shrunk`
};

/// Shrinks the singular values of `centered` with weighted_shrinkage and
/// rebuilds the matrix from the retained components.
template <typename Scalar>
SvtResult<Scalar> weighted_svt(const PatchMatrix<Scalar>& centered, Index stack_size, double local_sigma, double c,
                               double eps, WeightRule rule = WeightRule::noise_scaled);

template <typename Scalar>
struct StackEstimate {
    std::vector<Position> positions;
    PatchMatrix<Scalar> denoised;  // patch_size^2 x positions.size()
    double weight = 0.0;
};

/// Low-rank estimate of one stack: the column-mean patch is removed, the
/// residual is shrunk by weighted_svt, and the mean is added back. The
/// aggregation weight is 1 / (1 + retained rank).
template <typename Scalar>
StackEstimate<Scalar> shrink_stack(const PatchStack<Scalar>& stack, double local_sigma, const WnnmParams& params);

/// Weighted accumulation of overlapping patch estimates.
class Aggregator {
public:
    Aggregator(Index height, Index width);

    template <typename Scalar>
    void add(const StackEstimate<Scalar>& estimate);

    /// Throws std::logic_error if some pixel received no weight.
    Raster<double> finish() const;

private:
    Raster<double> numerator_;
    Raster<double> denominator_;
};

template <typename Scalar>
Image aggregate(std::span<const StackEstimate<Scalar>> estimates, Index height, Index width);

struct IterationInfo {
    int iteration = 0;  // 1-based
    bool rematched = false;
    double local_sigma = 0.0;
    const Raster<double>* working = nullptr;   // y^(k)
    const Raster<double>* estimate = nullptr;  // x^(k)
};

struct DenoiseOptions {
    int threads = 0;  // 0 = OpenMP default
    std::function<void(const IterationInfo&)> on_iteration;
};

Image wnnm_denoise(const Image& noisy, const WnnmParams& params, const DenoiseOptions& options = {});

} // namespace despeckle
