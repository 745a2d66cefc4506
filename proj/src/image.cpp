#include "sigvar/image.hpp"

#include "sigvar/error.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <vector>

namespace sigvar {

namespace {

struct FileCloser
{
    void operator()(std::FILE *f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path &path, const char *mode)
{
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f)
        throw DataError("cannot open '" + path.string() + "'");
    return f;
}

[[noreturn]] void png_error_handler(png_structp png, png_const_charp message)
{
    auto *text = static_cast<std::string *>(png_get_error_ptr(png));
    if (text)
        *text = message;
    png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

} // namespace

SignatureImage read_png(const std::filesystem::path &path)
{
    FilePtr file = open_file(path, "rb");
    unsigned char signature[8];
    if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0)
        throw DataError("'" + path.string() + "' is not a PNG file");

    std::string message;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler, png_warning_handler);
    if (!png)
        throw DataError("libpng: cannot create read struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DataError("libpng: cannot create info struct");
    }

    SignatureImage image;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("'" + path.string() + "': " + message);
    }

    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);
    if (depth == 16)
        png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_PALETTE)
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    png_color_16 white{};
    white.gray = 255;
    white.red = white.green = white.blue = 255;
    png_set_background(png, &white, PNG_BACKGROUND_GAMMA_SCREEN, 0, 1.0);
    png_read_update_info(png, info);

    const auto width = static_cast<Eigen::Index>(png_get_image_width(png, info));
    const auto height = static_cast<Eigen::Index>(png_get_image_height(png, info));
    if (png_get_channels(png, info) != 1) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("'" + path.string() + "': unsupported channel layout");
    }
    image.pixels.resize(height, width);
    rows.resize(static_cast<std::size_t>(height));
    for (Eigen::Index r = 0; r < height; ++r)
        rows[static_cast<std::size_t>(r)] = image.pixels.data() + r * width;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    image.polarity = Polarity::ink_dark;
    return image;
}

void write_png(const SignatureImage &image, const std::filesystem::path &path)
{
    if (image.empty())
        throw DataError("write_png: empty image");
    FilePtr file = open_file(path, "wb");

    std::string message;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler, png_warning_handler);
    if (!png)
        throw DataError("libpng: cannot create write struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw DataError("libpng: cannot create info struct");
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
    SignatureImage::Pixels copy = image.pixels;
    for (Eigen::Index r = 0; r < image.height(); ++r)
        rows[static_cast<std::size_t>(r)] = copy.data() + r * image.width();

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError("'" + path.string() + "': " + message);
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace sigvar
