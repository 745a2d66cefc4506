#include "sigvar/augment_feature.hpp"
#include "sigvar/augment_image.hpp"
#include "sigvar/error.hpp"
#include "sigvar/preprocess.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

using namespace sigvar;

namespace {

/// Same-size convolution written from the padding rule: indices fold back
/// into [0, n) by mirroring about the edges with the edge sample repeated.
FeatureVector reference_convolution(const FeatureVector &v, const Eigen::VectorXd &kernel)
{
    const Eigen::Index n = v.size();
    const Eigen::Index radius = kernel.size() / 2;
    FeatureVector out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index k = -radius; k <= radius; ++k) {
            Eigen::Index j = (i + k) % (2 * n);
            if (j < 0)
                j += 2 * n;
            if (j >= n)
                j = 2 * n - 1 - j;
            acc += kernel[radius - k] * v[j];
        }
        out[i] = acc;
    }
    return out;
}

FeatureVector random_vector(Rng &rng, Eigen::Index n)
{
    FeatureVector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = rng.uniform();
    return v;
}

SignatureImage stroke_image()
{
    SignatureImage img(120, 200);
    for (Eigen::Index x = 20; x < 180; ++x) {
        const auto y = static_cast<Eigen::Index>(60 + 25 * std::sin(x / 15.0));
        img.pixels.block(y - 2, x, 4, 1).setConstant(20);
    }
    return img;
}

} // namespace

TEST_SUITE("augment-feature")
{
    TEST_CASE("kernel shape")
    {
        CHECK(gaussian_density(0.0, 1.0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)));
        CHECK(gaussian_density(1.0, 2.0)
              == doctest::Approx(std::exp(-1.0 / 8.0) / (std::sqrt(2.0 * std::numbers::pi) * 2.0)));
        CHECK(kernel_radius(0.01) == 1);
        CHECK(kernel_radius(1.0) == 4);
        CHECK(kernel_radius(0.29) == 2);
        for (double sigma : {0.05, 0.3, 1.0, 2.5}) {
            const Eigen::VectorXd k = gaussian_kernel(sigma, kernel_radius(sigma));
            CHECK(k.size() == 2 * kernel_radius(sigma) + 1);
            CHECK(k.sum() == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(k.isApprox(k.reverse().eval()));
            CHECK(k.maxCoeff() == k[kernel_radius(sigma)]);
        }
        const Eigen::VectorXd raw = gaussian_kernel(1.0, 3, false);
        CHECK(raw[3] == doctest::Approx(gaussian_density(0.0, 1.0)));
        CHECK_THROWS_AS(gaussian_kernel(0.0, 3), ConfigError);
    }

    TEST_CASE("convolution matches the reference, including kernels wider than the vector")
    {
        Rng rng(6);
        for (Eigen::Index n : {1, 2, 3, 7, 50}) {
            const FeatureVector v = random_vector(rng, n);
            for (double sigma : {0.2, 1.0, 3.0}) {
                const Eigen::VectorXd k = gaussian_kernel(sigma, kernel_radius(sigma));
                CHECK(convolve_reflect(v, k).isApprox(reference_convolution(v, k), 1e-13));
            }
        }
    }

    TEST_CASE("an impulse returns the kernel")
    {
        FeatureVector impulse = FeatureVector::Zero(21);
        impulse[10] = 1.0;
        const Eigen::VectorXd k = gaussian_kernel(1.3, kernel_radius(1.3));
        const FeatureVector out = convolve_reflect(impulse, k);
        CHECK(out.segment(10 - kernel_radius(1.3), k.size()).isApprox(k));
    }

    TEST_CASE("constant vectors are fixed points of smoothing")
    {
        Rng rng(1);
        const FeatureVector c = FeatureVector::Constant(64, 0.37);
        for (double sigma : {0.01, 0.5, 1.0, 4.0}) {
            const FeatureVector out = perturb_once(c, sigma, PerturbMode::smooth, rng);
            CHECK((out - c).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }

    TEST_CASE("tiny sigma leaves vectors unchanged in smoothing mode")
    {
        Rng rng(2);
        const FeatureVector v = random_vector(rng, 30);
        CHECK((perturb_once(v, 0.01, PerturbMode::smooth, rng) - v).cwiseAbs().maxCoeff() < 1e-12);
    }

    TEST_CASE("distance from the original grows with sigma")
    {
        Rng rng(20);
        std::vector<FeatureVector> vectors;
        for (int i = 0; i < 20; ++i)
            vectors.push_back(random_vector(rng, 100));
        double previous = -1.0;
        for (double sigma : {0.1, 0.5, 1.0, 2.0, 4.0}) {
            double total = 0.0;
            for (const auto &v : vectors)
                total += (perturb_once(v, sigma, PerturbMode::smooth, rng) - v).norm();
            CHECK(total >= previous);
            previous = total;
        }
    }

    TEST_CASE("noise mode moves vectors and scales with sigma")
    {
        Rng rng(3);
        const FeatureVector v = FeatureVector::Constant(200, 1.0);
        const double small = (perturb_once(v, 0.1, PerturbMode::noise, rng) - v).norm();
        const double large = (perturb_once(v, 2.0, PerturbMode::noise, rng) - v).norm();
        CHECK(small > 0.0);
        CHECK(large > small);
        CHECK(parse_perturb_mode("noise") == PerturbMode::noise);
        CHECK_THROWS_AS(parse_perturb_mode("blur"), ConfigError);
    }

    TEST_CASE("perturb_features is seeded and draws sigma per sample")
    {
        Rng rng(1);
        const FeatureVector v = random_vector(rng, 40);
        Rng a(9), b(9);
        const auto first = perturb_features(v, make_gaussian_parameters(0.2, 2.0), 5, a);
        const auto second = perturb_features(v, make_gaussian_parameters(0.2, 2.0), 5, b);
        REQUIRE(first.size() == 5);
        for (int i = 0; i < 5; ++i)
            CHECK(first[i] == second[i]);
        CHECK_FALSE(first[0] == first[1]);
        CHECK_THROWS_AS(perturb_features(v, default_duplicator_parameters(), 1, a), ConfigError);
        CHECK_THROWS_AS(perturb_features(FeatureVector(), make_gaussian_parameters(0.2, 0.3), 1, a), DataError);
    }

    TEST_CASE("fitness: an identity-like filter gives 1/n")
    {
        Rng rng(31);
        FeatureMatrix genuine(60, 8);
        for (Eigen::Index j = 0; j < 8; ++j)
            genuine.col(j) = random_vector(rng, 60);
        Rng r1(1), r2(1);
        CHECK(eval_params_feature(make_gaussian_parameters(0.01, 0.01), genuine, 1, r1)
              == doctest::Approx(1.0 / 8.0).epsilon(1e-9));
        const double smoothed = eval_params_feature(make_gaussian_parameters(1.0, 1.0), genuine, 1, r2);
        CHECK(smoothed >= 0.0);
        CHECK(smoothed <= 1.0);
        CHECK_THROWS_AS(eval_params_feature(make_gaussian_parameters(0.1, 0.2), genuine.leftCols(1), 1, r1),
                        ConfigError);
    }
}

TEST_SUITE("augment-image")
{
    TEST_CASE("passthrough defaults")
    {
        const auto p = default_passthrough_parameters();
        CHECK(p.size() == 24);
        CHECK(p.at("sigma_x_2") == 28.0);
        CHECK(p.at("mu_x_3") == 72.0);
        CHECK(p.at("sigma_y_2") == 9.6);
        CHECK(p.at("mu_S") == -1.30);
        const std::string text = format_duplicator_parameters(DuplicatorConfig{});
        CHECK(std::count(text.begin(), text.end(), '\n') == 30);
        CHECK(text.rfind("alpha_A_min=5\n", 0) == 0);
    }

    TEST_CASE("draws stay inside the parameter intervals")
    {
        Rng rng(4);
        const ParameterVector p = make_duplicator_parameters(10, 20, 0.3, 0.6, 0.1, 0.2);
        for (int i = 0; i < 200; ++i) {
            const SineWarp w = draw_warp(p, rng);
            CHECK(w.amplitude_x >= 10);
            CHECK(w.amplitude_x < 20);
            CHECK(w.period_y >= 0.3);
            CHECK(w.period_y < 0.6);
            CHECK(w.phase_x >= 0.1);
            CHECK(w.phase_x < 0.2);
        }
        Rng zero(5);
        const SineWarp floored = draw_warp(make_duplicator_parameters(10, 10, 0, 0, 0, 0), zero);
        CHECK(floored.period_x == minimum_period);
        CHECK_THROWS_AS(draw_warp(make_gaussian_parameters(0.1, 0.2), zero), ConfigError);
    }

    TEST_CASE("displacement follows the sine fields")
    {
        const SineWarp w{20.0, 0.5, 0.25, 40.0, 1.0, 0.0};
        const Eigen::Vector2d d = displacement(w, 30.0, 10.0, 200, 100);
        CHECK(d[0] == doctest::Approx(200.0 / 20.0 * std::sin(2 * std::numbers::pi * 10.0 / 50.0 + std::numbers::pi / 2)));
        CHECK(d[1] == doctest::Approx(100.0 / 40.0 * std::sin(2 * std::numbers::pi * 30.0 / 200.0)));
    }

    TEST_CASE("larger amplitude divisors mean smaller deformation")
    {
        double previous = INFINITY;
        for (double a : {10.0, 25.0, 50.0, 100.0}) {
            const double m = mean_displacement(SineWarp{a, 0.7, 0.3, a, 0.7, 0.6}, 200, 120);
            CHECK(m < previous);
            previous = m;
        }
    }

    TEST_CASE("negligible warp reproduces the image")
    {
        const SignatureImage img = stroke_image();
        CHECK(apply_warp(img, SineWarp{1e12, 1.0, 0.0, 1e12, 1.0, 0.0}) == img);
    }

    TEST_CASE("warps keep size, polarity and background")
    {
        const SignatureImage img = stroke_image();
        Rng rng(8);
        const SignatureImage out = sinusoidal_deform(img, default_duplicator_parameters(), rng);
        CHECK(out.height() == img.height());
        CHECK(out.width() == img.width());
        CHECK(out.pixels(0, 0) == 255);
        CHECK_FALSE(out == img);
        const SignatureImage light = sinusoidal_deform(invert(img), default_duplicator_parameters(), rng);
        CHECK(light.polarity == Polarity::ink_light);
        CHECK(light.pixels(0, 0) == 0);
    }

    TEST_CASE("duplicate is deterministic per seed")
    {
        const SignatureImage img = stroke_image();
        Rng a(3), b(3);
        const auto first = duplicate(img, DuplicatorConfig{}, 3, a);
        const auto second = duplicate(img, DuplicatorConfig{}, 3, b);
        REQUIRE(first.size() == 3);
        for (int i = 0; i < 3; ++i)
            CHECK(first[i] == second[i]);
        CHECK_THROWS_AS(duplicate(img, DuplicatorConfig{}, 0, a), ConfigError);
        CHECK_THROWS_AS(duplicate(SignatureImage(), DuplicatorConfig{}, 1, a), DataError);
    }

    TEST_CASE("image fitness is finite and seeded")
    {
        std::vector<SignatureImage> genuine;
        Rng rng(12);
        for (int i = 0; i < 4; ++i)
            genuine.push_back(sinusoidal_deform(stroke_image(), make_duplicator_parameters(60, 90, 0.3, 0.6, 0, 1), rng));
        Rng a(1), b(1);
        const CanvasSize canvas{200, 300};
        const double first = eval_params_image(default_duplicator_parameters(), genuine, 1, baseline_extractor(), canvas, a);
        const double second = eval_params_image(default_duplicator_parameters(), genuine, 1, baseline_extractor(), canvas, b);
        CHECK(std::isfinite(first));
        CHECK(first >= 0.0);
        CHECK(first <= 1.0);
        CHECK(first == second);
    }

#ifdef SIGVAR_FAKE_DUPLICATOR
    TEST_CASE("external duplicator adapter")
    {
        DuplicatorConfig config;
        config.external_executable = std::filesystem::path(SIGVAR_FAKE_DUPLICATOR);
        const SignatureImage img = stroke_image();
        Rng rng(5);
        const auto out = duplicate(img, config, 3, rng);
        REQUIRE(out.size() == 3);
        for (const auto &d : out) {
            CHECK(d.height() == img.height());
            CHECK(d.polarity == Polarity::ink_dark);
        }
        CHECK_FALSE(out[0] == out[1]);

        const auto light = duplicate(invert(img), config, 1, rng);
        CHECK(light[0].polarity == Polarity::ink_light);
        CHECK(light[0].pixels(0, 0) == 0);

        config.passthrough["fail"] = 1;
        CHECK_THROWS_WITH_AS(duplicate(img, config, 2, rng), doctest::Contains("simulated failure"), DataError);
        config.passthrough.erase("fail");
        config.passthrough["short"] = 1;
        CHECK_THROWS_WITH_AS(duplicate(img, config, 2, rng), doctest::Contains("expected 2"), DataError);
        config.external_executable = "/nonexistent/duplicator";
        CHECK_THROWS_AS(duplicate(img, config, 1, rng), DataError);
    }
#endif
}
