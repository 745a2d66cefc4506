#include "sigvar/error.hpp"
#include "sigvar/parallel.hpp"
#include "sigvar/parameters.hpp"
#include "sigvar/random.hpp"
#include "sigvar/swarm.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <set>

using namespace sigvar;

TEST_SUITE("random")
{
    TEST_CASE("same seed, same stream; different seeds differ")
    {
        Rng a(42), b(42), c(43);
        bool differs = false;
        for (int i = 0; i < 100; ++i) {
            const auto x = a.next();
            CHECK(x == b.next());
            differs = differs || x != c.next();
        }
        CHECK(differs);
    }

    TEST_CASE("uniform draws stay in range")
    {
        Rng rng(1);
        for (int i = 0; i < 10000; ++i) {
            const double u = rng.uniform();
            CHECK(u >= 0.0);
            CHECK(u < 1.0);
            const double v = rng.uniform(-3.0, 5.0);
            CHECK(v >= -3.0);
            CHECK(v < 5.0);
        }
        CHECK(rng.uniform(2.0, 2.0) == 2.0);
    }

    TEST_CASE("normal draws have roughly unit moments")
    {
        Rng rng(7);
        double sum = 0.0, sq = 0.0;
        const int n = 200000;
        for (int i = 0; i < n; ++i) {
            const double z = rng.normal();
            sum += z;
            sq += z * z;
        }
        CHECK(std::abs(sum / n) < 0.01);
        CHECK(std::abs(sq / n - 1.0) < 0.02);
    }

    TEST_CASE("sampling without replacement yields distinct indices")
    {
        Rng rng(9);
        const auto picks = rng.sample_without_replacement(50, 20);
        REQUIRE(picks.size() == 20);
        const std::set<std::size_t> unique(picks.begin(), picks.end());
        CHECK(unique.size() == 20);
        for (auto p : picks)
            CHECK(p < 50);
        CHECK(rng.sample_without_replacement(5, 5).size() == 5);
    }

    TEST_CASE("derived seeds depend on every key and on their order")
    {
        CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
        CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
        CHECK(derive_seed(1, {2, 3}) != derive_seed(2, {2, 3}));
        CHECK(hash_string("w001") != hash_string("w002"));
        CHECK(hash_string("") == 0xcbf29ce484222325ULL);
        CHECK(hash_string("a") == 0xaf63dc4c8601ec8cULL);
    }

    TEST_CASE("parallel_for visits every index once and rethrows the lowest failure")
    {
        std::vector<std::atomic<int>> hits(1000);
        parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
        for (auto &h : hits)
            CHECK(h.load() == 1);
        CHECK_THROWS_WITH(parallel_for(100, 4,
                                       [](std::size_t i) {
                                           if (i == 17 || i == 60)
                                               throw std::runtime_error("index " + std::to_string(i));
                                       }),
                          "index 17");
    }
}

TEST_SUITE("parameters")
{
    TEST_CASE("names and dimensions")
    {
        CHECK(parameter_dimension(ParameterKind::duplicator) == 6);
        CHECK(parameter_dimension(ParameterKind::gaussian) == 2);
        const auto names = parameter_names(ParameterKind::duplicator);
        CHECK(names[0] == "alpha_A_min");
        CHECK(names[5] == "alpha_S_max");
        CHECK(parameter_names(ParameterKind::gaussian)[1] == "sigma_max");
        CHECK(parse_parameter_kind("feature") == ParameterKind::gaussian);
        CHECK(parse_parameter_kind("image") == ParameterKind::duplicator);
        CHECK_THROWS_AS(parse_parameter_kind("other"), ConfigError);
    }

    TEST_CASE("search box")
    {
        const auto dup = search_bounds(ParameterKind::duplicator);
        CHECK(dup.low == Eigen::VectorXd((Eigen::VectorXd(6) << 10, 10, 0, 0, 0, 0).finished()));
        CHECK(dup.high == Eigen::VectorXd((Eigen::VectorXd(6) << 100, 100, 1, 1, 1, 1).finished()));
        const auto gauss = search_bounds(ParameterKind::gaussian);
        CHECK(gauss.low == Eigen::Vector2d(0.01, 0.01));
        CHECK(gauss.high == Eigen::Vector2d(1.0, 1.0));
    }

    TEST_CASE("validation")
    {
        CHECK_NOTHROW(validate(default_duplicator_parameters()));
        CHECK_THROWS_AS(validate(make_gaussian_parameters(0.5, 0.4)), ConfigError);
        CHECK_THROWS_AS(validate(make_gaussian_parameters(0.0, 0.4)), ConfigError);
        CHECK_THROWS_AS(validate(make_duplicator_parameters(0.0, 1.0, 0.1, 0.2, 0.0, 1.0)), ConfigError);
        CHECK_THROWS_AS(validate(make_duplicator_parameters(5, 30, 0.5, 1, 0, NAN)), ConfigError);
        ParameterVector wrong{ParameterKind::gaussian, Eigen::VectorXd::Ones(3)};
        CHECK_THROWS_AS(validate(wrong), ConfigError);
    }

    TEST_CASE("repair clamps and then orders pairs")
    {
        const auto clamped = repair(make_gaussian_parameters(1.2, 1.5));
        CHECK(clamped.values == Eigen::Vector2d(1.0, 1.0));
        const auto swapped = repair(make_gaussian_parameters(0.5, 0.1));
        CHECK(swapped.values == Eigen::Vector2d(0.1, 0.5));
        const auto low = repair(make_duplicator_parameters(-5, 200, 0.2, 0.1, -1, 2));
        CHECK(low.values == (Eigen::VectorXd(6) << 10, 100, 0.1, 0.2, 0, 1).finished());
        CHECK(is_feasible(low));
        CHECK_FALSE(is_feasible(make_gaussian_parameters(0.5, 0.1)));
    }

    TEST_CASE("shipped vectors")
    {
        CHECK(default_duplicator_parameters().values == (Eigen::VectorXd(6) << 5, 30, 0.5, 1, 0, 1).finished());
        CHECK(optimized_duplicator_parameters().values
              == (Eigen::VectorXd(6) << 69.3, 88.7, 0.32, 0.53, 0.47, 0.74).finished());
        CHECK(optimized_gaussian_parameters().values == Eigen::Vector2d(0.29, 0.72));
    }
}

TEST_SUITE("swarm")
{
    TEST_CASE("update constants")
    {
        CHECK(swarm_inertia == doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-15));
        CHECK(swarm_personal_gain == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-15));
        CHECK(swarm_global_gain == 1.0);
        CHECK(swarm_inertia + swarm_personal_gain == doctest::Approx(2.0).epsilon(1e-15));
    }

    TEST_CASE("velocity update on a worked example")
    {
        Particle p;
        p.position = make_gaussian_parameters(0.0, 0.0);
        p.velocity = Eigen::Vector2d(0.0, 0.0);
        p.personal_best = make_gaussian_parameters(1.0, 1.0);
        const ParameterVector global = make_gaussian_parameters(2.0, 2.0);
        const Eigen::VectorXd v = update_velocity(p, global, Eigen::Vector2d::Ones(), Eigen::Vector2d::Ones());
        const double expected = (1.0 + std::sqrt(5.0)) / 2.0 + 2.0;
        CHECK(v[0] == doctest::Approx(expected).epsilon(1e-12));

        p.velocity = Eigen::Vector2d(1.0, -1.0);
        const Eigen::VectorXd inert = update_velocity(p, global, Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero());
        CHECK(inert[0] == doctest::Approx(swarm_inertia));
        CHECK(inert[1] == doctest::Approx(-swarm_inertia));
    }

    TEST_CASE("a particle sitting on both bests keeps only inertia")
    {
        Particle p;
        p.position = make_gaussian_parameters(0.3, 0.6);
        p.personal_best = p.position;
        p.velocity = Eigen::Vector2d(0.1, 0.2);
        Rng rng(1);
        const Eigen::VectorXd v = update_velocity(p, p.position, rng);
        CHECK(v[0] == doctest::Approx(0.1 * swarm_inertia).epsilon(1e-12));
        CHECK(v[1] == doctest::Approx(0.2 * swarm_inertia).epsilon(1e-12));
    }

    TEST_CASE("position update repairs into the box")
    {
        const auto x = update_position(make_gaussian_parameters(0.9, 0.95), Eigen::Vector2d(0.5, 0.5));
        CHECK(x.values == Eigen::Vector2d(1.0, 1.0));
        const auto y = update_position(make_gaussian_parameters(0.3, 0.4), Eigen::Vector2d(0.2, -0.3));
        CHECK(y.values[0] == doctest::Approx(0.1));
        CHECK(y.values[1] == doctest::Approx(0.5));
    }

    TEST_CASE("initial particles are feasible and seeded")
    {
        for (auto kind : {ParameterKind::duplicator, ParameterKind::gaussian}) {
            const Swarm s = init_swarm(kind, 40, 5);
            CHECK(s.particles.size() == 40);
            for (const auto &p : s.particles) {
                CHECK(is_feasible(p.position));
                CHECK(p.velocity.isZero());
            }
            const Swarm again = init_swarm(kind, 40, 5);
            CHECK(again.particles[7].position == s.particles[7].position);
        }
        CHECK_THROWS_AS(init_swarm(ParameterKind::gaussian, 1, 0), ConfigError);
    }

    TEST_CASE("global best is monotone and the result is the best ever seen")
    {
        const Fitness noisy = [](const ParameterVector &p, std::uint64_t seed) {
            Rng rng(seed);
            return (p.values.array() - 0.4).square().sum() + 0.01 * rng.uniform();
        };
        SwarmConfig config;
        config.iterations = 30;
        config.particles = 12;
        config.seed = 3;
        const SwarmResult r = optimize(noisy, ParameterKind::gaussian, config);
        REQUIRE(r.trace.size() == 30);
        for (std::size_t i = 1; i < r.trace.size(); ++i)
            CHECK(r.trace[i].global_best <= r.trace[i - 1].global_best);
        double lowest = INFINITY;
        for (const auto &t : r.trace) {
            CHECK(t.global_best <= t.iteration_best);
            lowest = std::min(lowest, t.iteration_best);
        }
        CHECK(r.best_fitness == lowest);
        CHECK(is_feasible(r.best));
    }

    TEST_CASE("results do not depend on the worker count")
    {
        const Fitness f = [](const ParameterVector &p, std::uint64_t seed) {
            Rng rng(seed);
            return std::abs(p.values[0] - 40.0) + std::abs(p.values[3] - 0.5) + 0.1 * rng.uniform();
        };
        SwarmConfig config;
        config.iterations = 8;
        config.particles = 10;
        config.seed = 99;
        config.jobs = 1;
        const SwarmResult one = optimize(f, ParameterKind::duplicator, config);
        config.jobs = 4;
        const SwarmResult four = optimize(f, ParameterKind::duplicator, config);
        CHECK(one.best == four.best);
        CHECK(one.best_fitness == four.best_fitness);
    }

    TEST_CASE("non-finite fitness is reported")
    {
        const Fitness bad = [](const ParameterVector &, std::uint64_t) { return NAN; };
        SwarmConfig config;
        config.iterations = 2;
        config.particles = 3;
        CHECK_THROWS_AS(optimize(bad, ParameterKind::gaussian, config), NumericalError);
    }

    TEST_CASE("sphere in the gaussian box converges")
    {
        const Fitness sphere = [](const ParameterVector &p, std::uint64_t) {
            return (p.values - Eigen::Vector2d(0.2, 0.7)).squaredNorm();
        };
        SwarmConfig config;
        config.iterations = 100;
        config.particles = 20;
        config.seed = 17;
        const SwarmResult r = optimize(sphere, ParameterKind::gaussian, config);
        CHECK(r.best_fitness < 1e-8);
    }
}
