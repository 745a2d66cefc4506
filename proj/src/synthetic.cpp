#include "sigvar/synthetic.hpp"

#include "sigvar/error.hpp"
#include "sigvar/parallel.hpp"
#include "sigvar/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace sigvar {

namespace {

using Point = Eigen::Vector2d; // (x, y) in pixels

struct Stroke
{
    std::vector<Point> control; // 3n + 1 points, cubic segments
};

struct WriterModel
{
    std::vector<Stroke> strokes;
    double thickness = 2.0;
    // Anisotropic variability: std of control-point jitter per axis,
    // global scale std per axis, slant std.
    double jitter_x = 1.0, jitter_y = 1.0;
    double scale_x = 0.02, scale_y = 0.02;
    double slant = 0.03;
};

WriterModel make_writer(const SyntheticConfig &config, Rng &rng)
{
    WriterModel model;
    const double w = static_cast<double>(config.width);
    const double h = static_cast<double>(config.height);
    const int stroke_count = 2 + static_cast<int>(rng.below(3));
    double x = w * rng.uniform(0.12, 0.2);
    for (int s = 0; s < stroke_count; ++s) {
        Stroke stroke;
        const int segments = 2 + static_cast<int>(rng.below(3));
        const double span = w * 0.7 / stroke_count;
        double y = h * rng.uniform(0.35, 0.65);
        stroke.control.push_back({x, y});
        for (int k = 0; k < segments; ++k) {
            for (int c = 0; c < 3; ++c) {
                x += span / (3.0 * segments) * rng.uniform(0.4, 1.6);
                y = std::clamp(y + h * 0.18 * rng.normal(), h * 0.2, h * 0.8);
                stroke.control.push_back({x, y});
            }
        }
        x += w * rng.uniform(0.0, 0.04);
        model.strokes.push_back(std::move(stroke));
    }
    model.thickness = rng.uniform(1.5, 3.0);
    model.jitter_x = rng.uniform(0.5, 3.0);
    model.jitter_y = rng.uniform(0.5, 3.0);
    model.scale_x = rng.uniform(0.01, 0.05);
    model.scale_y = rng.uniform(0.01, 0.05);
    model.slant = rng.uniform(0.01, 0.06);
    return model;
}

Point bezier(const Point &p0, const Point &p1, const Point &p2, const Point &p3, double t)
{
    const double u = 1.0 - t;
    return u * u * u * p0 + 3.0 * u * u * t * p1 + 3.0 * u * t * t * p2 + t * t * t * p3;
}

void stamp(SignatureImage &image, const Point &centre, double radius, std::uint8_t ink)
{
    const Eigen::Index r0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(centre.y() - radius - 1)));
    const Eigen::Index r1 =
        std::min<Eigen::Index>(image.height() - 1, static_cast<Eigen::Index>(std::ceil(centre.y() + radius + 1)));
    const Eigen::Index c0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(centre.x() - radius - 1)));
    const Eigen::Index c1 =
        std::min<Eigen::Index>(image.width() - 1, static_cast<Eigen::Index>(std::ceil(centre.x() + radius + 1)));
    for (Eigen::Index r = r0; r <= r1; ++r)
        for (Eigen::Index c = c0; c <= c1; ++c) {
            const double d = std::hypot(c + 0.5 - centre.x(), r + 0.5 - centre.y());
            const double coverage = std::clamp(radius + 0.5 - d, 0.0, 1.0);
            if (coverage <= 0.0)
                continue;
            const double value = 255.0 - coverage * (255.0 - ink);
            auto &px = image.pixels(r, c);
            px = std::min<std::uint8_t>(px, static_cast<std::uint8_t>(std::lround(value)));
        }
}

struct Hand
{
    double jitter_x, jitter_y, scale_x, scale_y, slant, tremor, thickness;
};

SignatureImage render(const WriterModel &model, const Hand &hand, const SyntheticConfig &config, Rng &rng)
{
    SignatureImage image(config.height, config.width);
    const Point centre(config.width / 2.0, config.height / 2.0);
    const double sx = 1.0 + hand.scale_x * rng.normal();
    const double sy = 1.0 + hand.scale_y * rng.normal();
    const double shear = hand.slant * rng.normal();
    Point shift;
    shift.x() = 2.0 * hand.jitter_x * rng.normal();
    shift.y() = 2.0 * hand.jitter_y * rng.normal();
    const std::uint8_t ink = static_cast<std::uint8_t>(rng.uniform(20.0, 70.0));
    const double thickness = std::max(0.8, hand.thickness * (1.0 + 0.1 * rng.normal()));

    for (const auto &stroke : model.strokes) {
        std::vector<Point> control;
        for (const auto &p : stroke.control) {
            Point q = p - centre;
            q = Point(sx * (q.x() + shear * q.y()), sy * q.y());
            q += centre + shift;
            q.x() += hand.jitter_x * rng.normal();
            q.y() += hand.jitter_y * rng.normal();
            control.push_back(q);
        }
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (std::size_t k = 0; k + 3 < control.size(); k += 3) {
            const double length = (control[k + 3] - control[k]).norm() + (control[k + 1] - control[k]).norm()
                                  + (control[k + 2] - control[k + 3]).norm();
            const int steps = std::max(8, static_cast<int>(length * 2.0));
            for (int i = 0; i <= steps; ++i) {
                const double t = static_cast<double>(i) / steps;
                Point p = bezier(control[k], control[k + 1], control[k + 2], control[k + 3], t);
                if (hand.tremor > 0.0)
                    p.y() += hand.tremor * std::sin(phase + 0.35 * (k * steps + i));
                stamp(image, p, thickness, ink);
            }
        }
    }
    return image;
}

} // namespace

std::vector<SyntheticWriter> generate_synthetic(const SyntheticConfig &config)
{
    if (config.writers < 1 || config.genuine < 0 || config.skilled < 0)
        throw ConfigError("synthetic: counts must be positive");
    if (config.height < 32 || config.width < 32 || config.height > synthetic_canvas.height
        || config.width > synthetic_canvas.width)
        throw ConfigError("synthetic: image size must be between 32 and the synthetic canvas");

    std::vector<SyntheticWriter> writers(static_cast<std::size_t>(config.writers));
    parallel_for(writers.size(), config.jobs, [&](std::size_t w) {
        Rng model_rng(derive_seed(config.seed, {0x3D7, w}));
        const WriterModel model = make_writer(config, model_rng);
        char id[16];
        std::snprintf(id, sizeof id, "w%03zu", w + 1);
        writers[w].id = id;

        const Hand genuine{model.jitter_x, model.jitter_y, model.scale_x, model.scale_y,
                           model.slant,    0.0,           model.thickness};
        // A forger copies the shape but not the motor habits: coarser jitter
        // with a different axis balance, wider scale drift, visible tremor.
        Rng forger_rng(derive_seed(config.seed, {0xF06, w}));
        const Hand forger{model.jitter_y * 1.5 + 1.0,
                          model.jitter_x * 1.5 + 1.0,
                          model.scale_x * 2.0,
                          model.scale_y * 2.0,
                          model.slant * 2.0 + forger_rng.uniform(0.0, 0.05),
                          forger_rng.uniform(0.4, 1.2),
                          model.thickness * forger_rng.uniform(0.7, 1.4)};

        for (int i = 0; i < config.genuine; ++i) {
            Rng rng(derive_seed(config.seed, {0x6E1, w, static_cast<std::uint64_t>(i)}));
            writers[w].genuine.push_back(render(model, genuine, config, rng));
        }
        for (int i = 0; i < config.skilled; ++i) {
            Rng rng(derive_seed(config.seed, {0x5C1, w, static_cast<std::uint64_t>(i)}));
            writers[w].skilled.push_back(render(model, forger, config, rng));
        }
    });
    return writers;
}

DatasetHandle write_synthetic(const SyntheticConfig &config, const std::filesystem::path &directory)
{
    const auto writers = generate_synthetic(config);
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec)
        throw DataError("cannot create '" + directory.string() + "': " + ec.message());

    DatasetHandle handle;
    handle.name = "synthetic";
    handle.canvas = synthetic_canvas;
    handle.genuine_per_writer = static_cast<std::size_t>(config.genuine);
    handle.skilled_per_writer = static_cast<std::size_t>(config.skilled);
    for (const auto &w : writers) {
        const auto folder = directory / w.id;
        std::filesystem::create_directories(folder, ec);
        if (ec)
            throw DataError("cannot create '" + folder.string() + "': " + ec.message());
        WriterEntry entry;
        entry.id = w.id;
        char name[32];
        for (std::size_t i = 0; i < w.genuine.size(); ++i) {
            std::snprintf(name, sizeof name, "g_%02zu.png", i + 1);
            write_png(w.genuine[i], folder / name);
            entry.genuine.push_back(folder / name);
        }
        for (std::size_t i = 0; i < w.skilled.size(); ++i) {
            std::snprintf(name, sizeof name, "s_%02zu.png", i + 1);
            write_png(w.skilled[i], folder / name);
            entry.skilled.push_back(folder / name);
        }
        handle.writers.push_back(std::move(entry));
    }
    save_manifest(handle, directory / "manifest.json");
    return handle;
}

} // namespace sigvar
