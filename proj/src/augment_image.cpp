#include "sigvar/augment_image.hpp"

#include "sigvar/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include <unistd.h>

namespace sigvar {

std::map<std::string, double> default_passthrough_parameters()
{
    return {
        {"xi_x_1", -0.5}, {"sigma_x_1", 20.0}, {"mu_x_1", 40.0},
        {"xi_x_2", -0.5}, {"sigma_x_2", 28.0}, {"mu_x_2", 56.0},
        {"xi_x_3", -0.5}, {"sigma_x_3", 36.0}, {"mu_x_3", 72.0},
        {"xi_y_1", -0.5}, {"sigma_y_1", 8.0},  {"mu_y_1", 8.0},
        {"xi_y_2", -0.5}, {"sigma_y_2", 9.6},  {"mu_y_2", 9.6},
        {"xi_y_3", -0.5}, {"sigma_y_3", 12.0}, {"mu_y_3", 12.0},
        {"k1", 0.33},     {"k2", 0.67},        {"psi", 0.8},
        {"xi_S", -0.19},  {"sigma_S", 3.28},   {"mu_S", -1.30},
    };
}

SineWarp draw_warp(const ParameterVector &variability, Rng &rng)
{
    if (variability.kind != ParameterKind::duplicator)
        throw ConfigError("sinusoidal deformation: duplicator parameters required");
    validate(variability);
    const auto &v = variability.values;
    SineWarp w;
    w.amplitude_x = rng.uniform(v[0], v[1]);
    w.period_x = std::max(minimum_period, rng.uniform(v[2], v[3]));
    w.phase_x = rng.uniform(v[4], v[5]);
    w.amplitude_y = rng.uniform(v[0], v[1]);
    w.period_y = std::max(minimum_period, rng.uniform(v[2], v[3]));
    w.phase_y = rng.uniform(v[4], v[5]);
    return w;
}

Eigen::Vector2d displacement(const SineWarp &warp, double x, double y, Eigen::Index width, Eigen::Index height)
{
    const double two_pi = 2.0 * std::numbers::pi;
    const auto w = static_cast<double>(width);
    const auto h = static_cast<double>(height);
    const double dx = (w / warp.amplitude_x) * std::sin(two_pi * y / (warp.period_x * h) + two_pi * warp.phase_x);
    const double dy = (h / warp.amplitude_y) * std::sin(two_pi * x / (warp.period_y * w) + two_pi * warp.phase_y);
    return {dx, dy};
}

double mean_displacement(const SineWarp &warp, Eigen::Index width, Eigen::Index height)
{
    double total = 0.0;
    for (Eigen::Index y = 0; y < height; ++y)
        for (Eigen::Index x = 0; x < width; ++x)
            total += displacement(warp, static_cast<double>(x), static_cast<double>(y), width, height).norm();
    return total / static_cast<double>(width * height);
}

SignatureImage apply_warp(const SignatureImage &image, const SineWarp &warp)
{
    if (image.empty())
        throw DataError("sinusoidal deformation: zero-area image");
    const Eigen::Index width = image.width();
    const Eigen::Index height = image.height();
    const double background = image.background();

    auto at = [&](Eigen::Index r, Eigen::Index c) -> double {
        if (r < 0 || c < 0 || r >= height || c >= width)
            return background;
        return image.pixels(r, c);
    };

    // dx depends on the row only and dy on the column only.
    std::vector<double> shift_x(static_cast<std::size_t>(height)), shift_y(static_cast<std::size_t>(width));
    for (Eigen::Index y = 0; y < height; ++y)
        shift_x[static_cast<std::size_t>(y)] = displacement(warp, 0.0, static_cast<double>(y), width, height)[0];
    for (Eigen::Index x = 0; x < width; ++x)
        shift_y[static_cast<std::size_t>(x)] = displacement(warp, static_cast<double>(x), 0.0, width, height)[1];

    SignatureImage out(height, width, image.polarity);
    for (Eigen::Index y = 0; y < height; ++y) {
        for (Eigen::Index x = 0; x < width; ++x) {
            const double sx = static_cast<double>(x) - shift_x[static_cast<std::size_t>(y)];
            const double sy = static_cast<double>(y) - shift_y[static_cast<std::size_t>(x)];
            const double fx0 = std::floor(sx), fy0 = std::floor(sy);
            if (fx0 < -1.0 || fy0 < -1.0 || fx0 > static_cast<double>(width) || fy0 > static_cast<double>(height)) {
                out.pixels(y, x) = static_cast<std::uint8_t>(background);
                continue;
            }
            const auto c0 = static_cast<Eigen::Index>(fx0);
            const auto r0 = static_cast<Eigen::Index>(fy0);
            const double fx = sx - fx0, fy = sy - fy0;
            const double top = (1.0 - fx) * at(r0, c0) + fx * at(r0, c0 + 1);
            const double bottom = (1.0 - fx) * at(r0 + 1, c0) + fx * at(r0 + 1, c0 + 1);
            const double value = (1.0 - fy) * top + fy * bottom;
            out.pixels(y, x) = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
        }
    }
    return out;
}

SignatureImage sinusoidal_deform(const SignatureImage &image, const ParameterVector &variability, Rng &rng)
{
    if (image.empty())
        throw DataError("sinusoidal deformation: zero-area image");
    return apply_warp(image, draw_warp(variability, rng));
}

std::string format_duplicator_parameters(const DuplicatorConfig &config)
{
    validate(config.variability);
    std::ostringstream out;
    const auto names = parameter_names(ParameterKind::duplicator);
    for (Eigen::Index i = 0; i < config.variability.size(); ++i)
        out << names[i] << '=' << format_double(config.variability[i]) << '\n';
    for (const auto &[name, value] : config.passthrough)
        out << name << '=' << format_double(value) << '\n';
    return out.str();
}

namespace {

std::string shell_quote(const std::string &text)
{
    std::string quoted = "'";
    for (char c : text) {
        if (c == '\'')
            quoted += "'\\''";
        else
            quoted += c;
    }
    return quoted + "'";
}

std::vector<SignatureImage> run_external(const SignatureImage &image, const DuplicatorConfig &config, int n,
                                         std::uint64_t seed)
{
    namespace fs = std::filesystem;
    static std::atomic<std::uint64_t> calls{0};
    const fs::path work = fs::temp_directory_path()
                          / ("sigvar-dup-" + std::to_string(::getpid()) + "-" + std::to_string(calls++) + "-"
                             + std::to_string(seed));
    fs::remove_all(work);
    fs::create_directories(work / "out");
    struct Cleanup
    {
        fs::path dir;
        ~Cleanup()
        {
            std::error_code ec;
            fs::remove_all(dir, ec);
        }
    } cleanup{work};

    const fs::path params = work / "params.txt";
    const fs::path input = work / "input.png";
    const fs::path log = work / "stderr.txt";
    {
        std::ofstream out(params);
        out << format_duplicator_parameters(config);
    }
    write_png(image.polarity == Polarity::ink_dark ? image : invert(image), input);

    const std::string command = shell_quote(config.external_executable->string()) + " --params "
                                + shell_quote(params.string()) + " --input " + shell_quote(input.string())
                                + " --output-dir " + shell_quote((work / "out").string()) + " --count "
                                + std::to_string(n) + " --seed " + std::to_string(seed) + " >"
                                + shell_quote(log.string()) + " 2>&1";
    const int status = std::system(command.c_str());
    if (status != 0) {
        std::ifstream diag(log);
        std::string text((std::istreambuf_iterator<char>(diag)), std::istreambuf_iterator<char>());
        while (!text.empty() && (text.back() == '\n' || text.back() == '\r'))
            text.pop_back();
        throw DataError("external duplicator failed (status " + std::to_string(status) + ")"
                        + (text.empty() ? std::string() : ": " + text));
    }

    std::vector<fs::path> files;
    for (const auto &entry : fs::directory_iterator(work / "out"))
        if (entry.path().extension() == ".png")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.size() != static_cast<std::size_t>(n))
        throw DataError("external duplicator produced " + std::to_string(files.size()) + " images, expected "
                        + std::to_string(n));
    std::vector<SignatureImage> out;
    out.reserve(files.size());
    for (const auto &f : files) {
        SignatureImage dup = read_png(f);
        if (image.polarity == Polarity::ink_light)
            dup = invert(dup);
        out.push_back(std::move(dup));
    }
    return out;
}

} // namespace

std::vector<SignatureImage> duplicate(const SignatureImage &image, const DuplicatorConfig &config, int n, Rng &rng)
{
    if (n < 1)
        throw ConfigError("duplicate: count must be at least 1");
    if (image.empty())
        throw DataError("duplicate: zero-area image");
    if (config.external_executable)
        return run_external(image, config, n, rng.next());

    std::vector<SignatureImage> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        out.push_back(sinusoidal_deform(image, config.variability, rng));
    return out;
}

FeatureMatrix extract_all(std::span<const SignatureImage> images, const Extractor &extractor, CanvasSize canvas)
{
    FeatureMatrix features;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const FeatureVector v = extractor(normalize_signature(images[i], canvas));
        if (i == 0)
            features.resize(v.size(), static_cast<Eigen::Index>(images.size()));
        features.col(static_cast<Eigen::Index>(i)) = v;
    }
    return features;
}

double eval_params_image(const DuplicatorConfig &config, std::span<const SignatureImage> genuine,
                         const FeatureMatrix &genuine_features, int n_per, const Extractor &extractor,
                         CanvasSize canvas, Rng &rng)
{
    if (genuine.size() < 2)
        throw ConfigError("eval_params_image: at least two genuine images are required");
    if (genuine_features.cols() != static_cast<Eigen::Index>(genuine.size()))
        throw ConfigError("eval_params_image: genuine feature count does not match images");
    std::vector<SignatureImage> duplicates;
    duplicates.reserve(genuine.size() * static_cast<std::size_t>(n_per));
    for (const auto &image : genuine)
        for (auto &dup : duplicate(image, config, n_per, rng))
            duplicates.push_back(std::move(dup));
    const FeatureMatrix synthetic = extract_all(duplicates, extractor, canvas);
    return abs_silhouette<double>(genuine_features, synthetic);
}

double eval_params_image(const ParameterVector &variability, std::span<const SignatureImage> genuine, int n_per,
                         const Extractor &extractor, CanvasSize canvas, Rng &rng)
{
    DuplicatorConfig config;
    config.variability = variability;
    return eval_params_image(config, genuine, extract_all(genuine, extractor, canvas), n_per, extractor, canvas, rng);
}

} // namespace sigvar
