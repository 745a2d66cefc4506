#ifndef SIGVAR_IMAGE_HPP
#define SIGVAR_IMAGE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>

namespace sigvar {

enum class Polarity
{
    ink_dark,  ///< dark strokes on a light background (scanned form)
    ink_light  ///< bright strokes on a black background (after inversion)
};

/// 8-bit grayscale raster, row-major, rows = height.
struct SignatureImage
{
    using Pixels = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    Pixels pixels;
    Polarity polarity = Polarity::ink_dark;

    SignatureImage() = default;
    SignatureImage(Eigen::Index height, Eigen::Index width, Polarity p = Polarity::ink_dark)
        : pixels(Pixels::Constant(height, width, p == Polarity::ink_dark ? 255 : 0)), polarity(p)
    {
    }

    Eigen::Index height() const { return pixels.rows(); }
    Eigen::Index width() const { return pixels.cols(); }
    bool empty() const { return pixels.size() == 0; }

    /// Intensity of the paper for this polarity.
    std::uint8_t background() const { return polarity == Polarity::ink_dark ? 255 : 0; }

    friend bool operator==(const SignatureImage &a, const SignatureImage &b)
    {
        return a.polarity == b.polarity && a.height() == b.height() && a.width() == b.width()
               && (a.pixels == b.pixels).all();
    }
};

/// Reads any PNG as 8-bit grayscale (alpha composited onto white). The
/// result is tagged ink_dark.
SignatureImage read_png(const std::filesystem::path &path);

/// Writes an 8-bit grayscale PNG. Polarity is not stored in the file.
void write_png(const SignatureImage &image, const std::filesystem::path &path);

} // namespace sigvar

#endif // SIGVAR_IMAGE_HPP
