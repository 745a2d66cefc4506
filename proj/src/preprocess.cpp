#include "sigvar/preprocess.hpp"

#include "sigvar/error.hpp"

#include <algorithm>
#include <cmath>

namespace sigvar {

Histogram intensity_histogram(const SignatureImage &image)
{
    Histogram hist{};
    for (Eigen::Index i = 0; i < image.pixels.size(); ++i)
        ++hist[image.pixels.data()[i]];
    return hist;
}

long double otsu_between_class_score(std::uint64_t below_count, std::uint64_t below_sum, std::uint64_t total_count,
                                     std::uint64_t total_sum)
{
    const std::uint64_t above_count = total_count - below_count;
    if (below_count == 0 || above_count == 0)
        return 0.0L;
    // N^2 w0 w1 (mu0 - mu1)^2 = (N S0 - n0 S)^2 / (n0 n1); the numerator is exact in 64-bit integers.
    const auto lhs = static_cast<__int128>(total_count) * static_cast<__int128>(below_sum);
    const auto rhs = static_cast<__int128>(below_count) * static_cast<__int128>(total_sum);
    const auto gap = static_cast<long double>(lhs - rhs);
    return gap * gap / (static_cast<long double>(below_count) * static_cast<long double>(above_count));
}

namespace {

using u128 = unsigned __int128;

/// Between-class score as the exact fraction gap^2 / (n0 n1).
struct OtsuScore
{
    u128 gap_squared = 0;
    u128 denominator = 1;
    long double approx = 0.0L;
};

OtsuScore exact_score(std::uint64_t below_count, std::uint64_t below_sum, std::uint64_t total_count,
                      std::uint64_t total_sum)
{
    OtsuScore score;
    const std::uint64_t above_count = total_count - below_count;
    if (below_count == 0 || above_count == 0)
        return score;
    const u128 lhs = static_cast<u128>(total_count) * below_sum;
    const u128 rhs = static_cast<u128>(below_count) * total_sum;
    const u128 gap = lhs > rhs ? lhs - rhs : rhs - lhs;
    score.gap_squared = gap * gap;
    score.denominator = static_cast<u128>(below_count) * above_count;
    score.approx = otsu_between_class_score(below_count, below_sum, total_count, total_sum);
    return score;
}

/// a > b, exactly when the cross products fit in 128 bits.
bool greater(const OtsuScore &a, const OtsuScore &b)
{
    u128 left = 0, right = 0;
    if (!__builtin_mul_overflow(a.gap_squared, b.denominator, &left)
        && !__builtin_mul_overflow(b.gap_squared, a.denominator, &right))
        return left > right;
    return a.approx > b.approx;
}

} // namespace

OtsuResult otsu_threshold(const Histogram &histogram)
{
    std::uint64_t total_count = 0, total_sum = 0;
    int occupied = 0;
    for (int v = 0; v < 256; ++v) {
        total_count += histogram[v];
        total_sum += histogram[v] * static_cast<std::uint64_t>(v);
        occupied += histogram[v] > 0;
    }
    if (total_count == 0)
        throw DataError("otsu: empty image");
    if (occupied < 2)
        return {0, true};

    OtsuResult best{0, false};
    OtsuScore best_score;
    std::uint64_t below_count = 0, below_sum = 0;
    for (int t = 0; t < 256; ++t) {
        const OtsuScore score = exact_score(below_count, below_sum, total_count, total_sum);
        if (t == 0 || greater(score, best_score)) {
            best_score = score;
            best.threshold = t;
        }
        below_count += histogram[t];
        below_sum += histogram[t] * static_cast<std::uint64_t>(t);
    }
    return best;
}

OtsuResult otsu_threshold(const SignatureImage &image)
{
    if (image.empty())
        throw DataError("otsu: empty image");
    return otsu_threshold(intensity_histogram(image));
}

SignatureImage invert(const SignatureImage &image)
{
    SignatureImage out;
    out.pixels = 255 - image.pixels;
    out.polarity = image.polarity == Polarity::ink_dark ? Polarity::ink_light : Polarity::ink_dark;
    return out;
}

SignatureImage resize_bilinear(const SignatureImage &image, Eigen::Index height, Eigen::Index width)
{
    if (image.empty() || height <= 0 || width <= 0)
        throw DataError("resize: zero-area image");
    SignatureImage out(height, width, image.polarity);
    const double scale_r = static_cast<double>(image.height()) / static_cast<double>(height);
    const double scale_c = static_cast<double>(image.width()) / static_cast<double>(width);
    const Eigen::Index max_r = image.height() - 1;
    const Eigen::Index max_c = image.width() - 1;
    for (Eigen::Index r = 0; r < height; ++r) {
        const double src_r = std::clamp((static_cast<double>(r) + 0.5) * scale_r - 0.5, 0.0, static_cast<double>(max_r));
        const auto r0 = static_cast<Eigen::Index>(src_r);
        const Eigen::Index r1 = std::min(r0 + 1, max_r);
        const double fr = src_r - static_cast<double>(r0);
        for (Eigen::Index c = 0; c < width; ++c) {
            const double src_c =
                std::clamp((static_cast<double>(c) + 0.5) * scale_c - 0.5, 0.0, static_cast<double>(max_c));
            const auto c0 = static_cast<Eigen::Index>(src_c);
            const Eigen::Index c1 = std::min(c0 + 1, max_c);
            const double fc = src_c - static_cast<double>(c0);
            const double top = (1.0 - fc) * image.pixels(r0, c0) + fc * image.pixels(r0, c1);
            const double bottom = (1.0 - fc) * image.pixels(r1, c0) + fc * image.pixels(r1, c1);
            const double value = (1.0 - fr) * top + fr * bottom;
            out.pixels(r, c) = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
        }
    }
    return out;
}

SignatureImage center_crop(const SignatureImage &image, Eigen::Index height, Eigen::Index width)
{
    if (height > image.height() || width > image.width())
        throw DataError("crop: window larger than image");
    const Eigen::Index top = (image.height() - height) / 2;
    const Eigen::Index left = (image.width() - width) / 2;
    SignatureImage out;
    out.pixels = image.pixels.block(top, left, height, width);
    out.polarity = image.polarity;
    return out;
}

Eigen::Vector2d center_of_mass(const SignatureImage &image)
{
    double mass = 0.0, sum_r = 0.0, sum_c = 0.0;
    const bool dark = image.polarity == Polarity::ink_dark;
    for (Eigen::Index r = 0; r < image.height(); ++r)
        for (Eigen::Index c = 0; c < image.width(); ++c) {
            const double w = dark ? 255.0 - image.pixels(r, c) : static_cast<double>(image.pixels(r, c));
            mass += w;
            sum_r += w * static_cast<double>(r);
            sum_c += w * static_cast<double>(c);
        }
    if (mass <= 0.0)
        throw DataError("center of mass: image has no ink");
    return {sum_r / mass, sum_c / mass};
}

SignatureImage normalize_signature(const SignatureImage &image, CanvasSize canvas, NormalizeInfo *info)
{
    if (image.empty())
        throw DataError("normalize: zero-area image");
    if (canvas.height <= 0 || canvas.width <= 0)
        throw ConfigError("normalize: canvas must have positive size");

    // Work in ink-dark convention; the pipeline inverts exactly once below.
    const SignatureImage source = image.polarity == Polarity::ink_dark ? image : invert(image);

    const OtsuResult otsu = otsu_threshold(source);
    SignatureImage segmented = source;
    bool any_ink = false;
    if (!otsu.degenerate) {
        for (Eigen::Index i = 0; i < segmented.pixels.size(); ++i) {
            auto &v = segmented.pixels.data()[i];
            if (v < otsu.threshold)
                any_ink = any_ink || v < 255;
            else
                v = 255;
        }
    }
    if (!any_ink)
        throw DataError("normalize: no foreground after segmentation");

    const Eigen::Vector2d com = center_of_mass(segmented);
    const auto offset_r = static_cast<Eigen::Index>(std::floor(static_cast<double>(canvas.height / 2) - com[0]));
    const auto offset_c = static_cast<Eigen::Index>(std::floor(static_cast<double>(canvas.width / 2) - com[1]));

    SignatureImage placed(canvas.height, canvas.width, Polarity::ink_dark);
    bool clipped = false;
    for (Eigen::Index r = 0; r < segmented.height(); ++r)
        for (Eigen::Index c = 0; c < segmented.width(); ++c) {
            const std::uint8_t v = segmented.pixels(r, c);
            const Eigen::Index rr = r + offset_r, cc = c + offset_c;
            if (rr < 0 || cc < 0 || rr >= canvas.height || cc >= canvas.width) {
                clipped = clipped || v != 255;
                continue;
            }
            placed.pixels(rr, cc) = v;
        }

    if (info) {
        info->threshold = otsu.threshold;
        info->center_of_mass = com;
        info->offset_row = offset_r;
        info->offset_col = offset_c;
        info->clipped = clipped;
    }

    const SignatureImage inverted = invert(placed);
    const SignatureImage resized = resize_bilinear(inverted, resized_height, resized_width);
    return center_crop(resized, normalized_height, normalized_width);
}

} // namespace sigvar
