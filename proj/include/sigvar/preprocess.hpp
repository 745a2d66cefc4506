#ifndef SIGVAR_PREPROCESS_HPP
#define SIGVAR_PREPROCESS_HPP

// Signature normalization: Otsu segmentation, centre-of-mass placement on a
// dataset canvas, inversion, resize to 170x242 and a central 150x220 crop.

#include "sigvar/image.hpp"

#include <array>
#include <cstdint>

namespace sigvar {

inline constexpr Eigen::Index resized_height = 170;
inline constexpr Eigen::Index resized_width = 242;
inline constexpr Eigen::Index normalized_height = 150;
inline constexpr Eigen::Index normalized_width = 220;

struct CanvasSize
{
    Eigen::Index height = 0;
    Eigen::Index width = 0;

    friend bool operator==(const CanvasSize &, const CanvasSize &) = default;
};

/// Window sizes per dataset (height x width).
inline constexpr CanvasSize gpds_canvas{952, 1360};
inline constexpr CanvasSize cedar_canvas{730, 1042};
inline constexpr CanvasSize mcyt_canvas{600, 850};

using Histogram = std::array<std::uint64_t, 256>;

Histogram intensity_histogram(const SignatureImage &image);

struct OtsuResult
{
    int threshold = 0;
    bool degenerate = false; ///< fewer than two occupied intensity levels
};

/// Threshold t in [0, 255] maximizing the between-class variance of the
/// split {< t} / {>= t}; ties resolve to the lowest t.
OtsuResult otsu_threshold(const Histogram &histogram);
OtsuResult otsu_threshold(const SignatureImage &image);

/// Between-class variance (up to a positive constant factor shared by all t)
/// of the split at t. Exposed for diagnostics and tests.
long double otsu_between_class_score(std::uint64_t below_count, std::uint64_t below_sum, std::uint64_t total_count,
                                     std::uint64_t total_sum);

/// 255 - v on every pixel; flips polarity.
SignatureImage invert(const SignatureImage &image);

/// Bilinear resize with pixel-centre alignment.
SignatureImage resize_bilinear(const SignatureImage &image, Eigen::Index height, Eigen::Index width);

/// Central height x width window. Odd margins put the extra pixel after the crop.
SignatureImage center_crop(const SignatureImage &image, Eigen::Index height, Eigen::Index width);

/// Ink-weighted centre of mass (row, col); weights are 255 - v for ink-dark
/// images and v for ink-light ones.
Eigen::Vector2d center_of_mass(const SignatureImage &image);

struct NormalizeInfo
{
    int threshold = 0;
    Eigen::Vector2d center_of_mass = Eigen::Vector2d::Zero();
    Eigen::Index offset_row = 0; ///< canvas position of input row 0
    Eigen::Index offset_col = 0;
    bool clipped = false; ///< ink fell outside the canvas
};

/// Segments, centres on the canvas by centre of mass, inverts and resizes.
/// Output is always 150x220 with ink bright on a black background.
SignatureImage normalize_signature(const SignatureImage &image, CanvasSize canvas, NormalizeInfo *info = nullptr);

} // namespace sigvar

#endif // SIGVAR_PREPROCESS_HPP
