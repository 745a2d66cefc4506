#include "sigvar/augment_feature.hpp"

#include "sigvar/error.hpp"

#include <cmath>
#include <numbers>

namespace sigvar {

std::string_view to_string(PerturbMode mode)
{
    return mode == PerturbMode::smooth ? "smooth" : "noise";
}

PerturbMode parse_perturb_mode(std::string_view text)
{
    if (text == "smooth")
        return PerturbMode::smooth;
    if (text == "noise")
        return PerturbMode::noise;
    throw ConfigError("unknown perturbation mode '" + std::string(text) + "'");
}

double gaussian_density(double x, double sigma)
{
    if (!(sigma > 0.0))
        throw ConfigError("gaussian filter: sigma must be positive");
    return std::exp(-x * x / (2.0 * sigma * sigma)) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
}

int kernel_radius(double sigma)
{
    if (!(sigma > 0.0))
        throw ConfigError("gaussian filter: sigma must be positive");
    return std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
}

Eigen::VectorXd gaussian_kernel(double sigma, int radius, bool normalize)
{
    if (!(sigma > 0.0))
        throw ConfigError("gaussian filter: sigma must be positive");
    if (radius < 1)
        throw ConfigError("gaussian filter: radius must be at least 1");
    Eigen::VectorXd kernel(2 * radius + 1);
    for (int x = -radius; x <= radius; ++x)
        kernel[x + radius] = gaussian_density(static_cast<double>(x), sigma);
    if (normalize)
        kernel /= kernel.sum();
    return kernel;
}

namespace {

Eigen::Index reflect_index(Eigen::Index i, Eigen::Index n)
{
    // Period 2n: 0..n-1 forward, then n-1..0 backward.
    const Eigen::Index period = 2 * n;
    i %= period;
    if (i < 0)
        i += period;
    return i < n ? i : period - 1 - i;
}

} // namespace

FeatureVector convolve_reflect(const FeatureVector &values, const Eigen::VectorXd &kernel)
{
    const Eigen::Index n = values.size();
    const Eigen::Index radius = kernel.size() / 2;
    FeatureVector out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index k = -radius; k <= radius; ++k)
            acc += kernel[k + radius] * values[reflect_index(i - k, n)];
        out[i] = acc;
    }
    return out;
}

FeatureVector perturb_once(const FeatureVector &values, double sigma, PerturbMode mode, Rng &rng)
{
    const Eigen::VectorXd kernel = gaussian_kernel(sigma, kernel_radius(sigma));
    if (mode == PerturbMode::smooth)
        return convolve_reflect(values, kernel);
    FeatureVector noise(values.size());
    for (Eigen::Index i = 0; i < noise.size(); ++i)
        noise[i] = rng.normal();
    return values + sigma * convolve_reflect(noise, kernel);
}

std::vector<FeatureVector> perturb_features(const FeatureVector &values, const ParameterVector &params, int n,
                                            Rng &rng, PerturbMode mode)
{
    if (params.kind != ParameterKind::gaussian)
        throw ConfigError("perturb_features: gaussian parameters required");
    validate(params);
    if (n < 1)
        throw ConfigError("perturb_features: sample count must be at least 1");
    if (values.size() == 0)
        throw DataError("perturb_features: empty feature vector");

    std::vector<FeatureVector> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double sigma = rng.uniform(params[0], params[1]);
        out.push_back(perturb_once(values, sigma, mode, rng));
    }
    return out;
}

double eval_params_feature(const ParameterVector &params, const FeatureMatrix &genuine, int n_per, Rng &rng,
                           PerturbMode mode)
{
    if (genuine.cols() < 2)
        throw ConfigError("eval_params_feature: at least two genuine vectors are required");
    FeatureMatrix synthetic(genuine.rows(), genuine.cols() * n_per);
    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < genuine.cols(); ++i)
        for (auto &v : perturb_features(genuine.col(i), params, n_per, rng, mode))
            synthetic.col(at++) = v;
    return abs_silhouette<double>(genuine, synthetic);
}

} // namespace sigvar
