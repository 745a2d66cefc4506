#ifndef SIGVAR_AUGMENT_FEATURE_HPP
#define SIGVAR_AUGMENT_FEATURE_HPP

// Feature-space augmentation with a 1-D Gaussian filter whose sigma is
// drawn uniformly from [sigma_min, sigma_max] for every synthetic sample.

#include "sigvar/metrics.hpp"
#include "sigvar/parameters.hpp"
#include "sigvar/random.hpp"

#include <vector>

namespace sigvar {

enum class PerturbMode
{
    smooth, ///< convolve the vector with the kernel
    noise   ///< add sigma-scaled, kernel-filtered white noise
};

std::string_view to_string(PerturbMode mode);
PerturbMode parse_perturb_mode(std::string_view text);

/// Unnormalized Gaussian density 1 / (sqrt(2 pi) sigma) * exp(-x^2 / (2 sigma^2)).
double gaussian_density(double x, double sigma);

/// Truncation radius ceil(4 sigma), at least 1.
int kernel_radius(double sigma);

/// Density sampled at x = -radius..radius; renormalized to sum 1 when `normalize`.
Eigen::VectorXd gaussian_kernel(double sigma, int radius, bool normalize = true);

/// Same-size convolution with reflect padding (edge sample repeated: c b a | a b c).
FeatureVector convolve_reflect(const FeatureVector &values, const Eigen::VectorXd &kernel);

/// Perturbs one vector at a fixed sigma.
FeatureVector perturb_once(const FeatureVector &values, double sigma, PerturbMode mode, Rng &rng);

/// n synthetic vectors, each with its own sigma ~ U[sigma_min, sigma_max].
std::vector<FeatureVector> perturb_features(const FeatureVector &values, const ParameterVector &params, int n,
                                            Rng &rng, PerturbMode mode = PerturbMode::smooth);

/// Builds n_per synthetic vectors per genuine column and returns the
/// absolute silhouette index between the genuine and synthetic clusters.
double eval_params_feature(const ParameterVector &params, const FeatureMatrix &genuine, int n_per, Rng &rng,
                           PerturbMode mode = PerturbMode::smooth);

} // namespace sigvar

#endif // SIGVAR_AUGMENT_FEATURE_HPP
