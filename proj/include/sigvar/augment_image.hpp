#ifndef SIGVAR_AUGMENT_IMAGE_HPP
#define SIGVAR_AUGMENT_IMAGE_HPP

// Image-space duplication. The native path deforms the writing surface with
// two sinusoidal displacement fields driven by the six variability
// parameters; the remaining duplicator parameters only reach an external
// duplicator executable.
//
// For a draw (A, P, S) per axis, with W x H the image size:
//   dx(x, y) = (W / A_x) * sin(2 pi y / (P_x H) + 2 pi S_x)
//   dy(x, y) = (H / A_y) * sin(2 pi x / (P_y W) + 2 pi S_y)
// and out(x, y) = in(x - dx, y - dy), bilinear, background outside.

#include "sigvar/features.hpp"
#include "sigvar/image.hpp"
#include "sigvar/parameters.hpp"
#include "sigvar/preprocess.hpp"
#include "sigvar/random.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sigvar {

/// Periods below this fraction of the image are floored to keep the field sampled.
inline constexpr double minimum_period = 0.01;

/// The remaining duplicator parameters with their default values, by name.
std::map<std::string, double> default_passthrough_parameters();

struct DuplicatorConfig
{
    ParameterVector variability = default_duplicator_parameters();
    std::map<std::string, double> passthrough = default_passthrough_parameters();
    /// When set, duplicates come from this executable instead of the native warp.
    std::optional<std::filesystem::path> external_executable;
};

/// One realized surface deformation.
struct SineWarp
{
    double amplitude_x = 1.0, period_x = 1.0, phase_x = 0.0;
    double amplitude_y = 1.0, period_y = 1.0, phase_y = 0.0;
};

/// Draws (A, P, S) for the x field, then for the y field.
SineWarp draw_warp(const ParameterVector &variability, Rng &rng);

/// Displacement (dx, dy) at pixel (x, y) for an image of the given size.
Eigen::Vector2d displacement(const SineWarp &warp, double x, double y, Eigen::Index width, Eigen::Index height);

/// Mean displacement magnitude over all pixel centres.
double mean_displacement(const SineWarp &warp, Eigen::Index width, Eigen::Index height);

SignatureImage apply_warp(const SignatureImage &image, const SineWarp &warp);

/// draw_warp + apply_warp.
SignatureImage sinusoidal_deform(const SignatureImage &image, const ParameterVector &variability, Rng &rng);

/// n duplicates of one image, sequentially from `rng` (native) or from the
/// external executable seeded with one draw of `rng`.
std::vector<SignatureImage> duplicate(const SignatureImage &image, const DuplicatorConfig &config, int n, Rng &rng);

/// key=value lines for every duplicator parameter (variability first).
std::string format_duplicator_parameters(const DuplicatorConfig &config);

/// Duplicates every genuine image n_per times, normalizes and extracts the
/// duplicates, and returns |silhouette| between genuine and duplicate features.
/// `genuine_features` are the already-extracted normalized genuine images.
double eval_params_image(const DuplicatorConfig &config, std::span<const SignatureImage> genuine,
                         const FeatureMatrix &genuine_features, int n_per, const Extractor &extractor,
                         CanvasSize canvas, Rng &rng);

/// Overload that normalizes and extracts the genuine images itself.
double eval_params_image(const ParameterVector &variability, std::span<const SignatureImage> genuine, int n_per,
                         const Extractor &extractor, CanvasSize canvas, Rng &rng);

/// Normalizes and extracts a batch of images into columns.
FeatureMatrix extract_all(std::span<const SignatureImage> images, const Extractor &extractor, CanvasSize canvas);

} // namespace sigvar

#endif // SIGVAR_AUGMENT_IMAGE_HPP
