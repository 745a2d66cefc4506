#include "oracles.hpp"

#include "sigvar/error.hpp"
#include "sigvar/metrics.hpp"
#include "sigvar/random.hpp"

#include <doctest.h>

using namespace sigvar;

namespace {

FeatureMatrix random_points(Rng &rng, Eigen::Index dim, Eigen::Index n, double offset)
{
    FeatureMatrix m(dim, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < dim; ++i)
            m(i, j) = rng.normal() + offset;
    return m;
}

oracle::PointSet to_points(const FeatureMatrix &m)
{
    oracle::PointSet out;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        out.emplace_back(m.col(j).data(), m.col(j).data() + m.rows());
    return out;
}

} // namespace

TEST_SUITE("metrics")
{
    TEST_CASE("euclidean distance matches a plain loop")
    {
        Rng rng(3);
        for (int trial = 0; trial < 50; ++trial) {
            const Eigen::Index dim = 1 + static_cast<Eigen::Index>(rng.below(30));
            const FeatureVector u = random_points(rng, dim, 1, 0.0).col(0);
            const FeatureVector v = random_points(rng, dim, 1, 0.0).col(0);
            const oracle::Point pu(u.data(), u.data() + dim), pv(v.data(), v.data() + dim);
            CHECK(euclidean(u, v) == doctest::Approx(oracle::distance(pu, pv)).epsilon(1e-14));
            CHECK(euclidean(u, v) == euclidean(v, u));
            CHECK(euclidean(u, u) == 0.0);
        }
    }

    TEST_CASE("euclidean rejects mismatched dimensions")
    {
        CHECK_THROWS_AS(euclidean(FeatureVector::Zero(3), FeatureVector::Zero(4)), DataError);
    }

    TEST_CASE("two far-apart pairs give the hand-computed width")
    {
        FeatureMatrix own(2, 2), other(2, 2);
        own << 0, 0, 0, 2;
        other << 10, 10, 0, 2;
        // a = 2, b = (10 + sqrt(104)) / 2
        const double b = (10.0 + std::sqrt(104.0)) / 2.0;
        const double expected = (b - 2.0) / b;
        const Cluster clusters[] = {{own, "a"}, {other, "b"}};
        CHECK(silhouette_width<double>(0, clusters[0], std::span(clusters + 1, 1))
              == doctest::Approx(expected).epsilon(1e-12));
        CHECK(expected == doctest::Approx(0.80196).epsilon(1e-4));
        CHECK(abs_silhouette<double>(own, other) == doctest::Approx(expected).epsilon(1e-12));
    }

    TEST_CASE("singleton clusters contribute zero")
    {
        FeatureMatrix one(2, 1), two(2, 2);
        one << 0, 0;
        two << 5, 6, 0, 0;
        const Cluster clusters[] = {{one, "a"}, {two, "b"}};
        const auto widths = silhouette_widths<double>(clusters);
        REQUIRE(widths.size() == 3);
        CHECK(widths[0] == 0.0);
        CHECK(abs_silhouette<double>(clusters) == doctest::Approx(oracle::abs_silhouette({to_points(one), to_points(two)})));
    }

    TEST_CASE("coincident points give zero rather than NaN")
    {
        const FeatureMatrix same = FeatureMatrix::Ones(3, 4);
        CHECK(abs_silhouette<double>(same, same) == 0.0);
    }

    TEST_CASE("a cluster against an exact copy of itself scores 1/n")
    {
        Rng rng(11);
        for (Eigen::Index n : {2, 5, 12}) {
            const FeatureMatrix a = random_points(rng, 4, n, 0.0);
            CHECK(abs_silhouette<double>(a, a) == doctest::Approx(1.0 / static_cast<double>(n)).epsilon(1e-12));
        }
    }

    TEST_CASE("widths stay within [-1, 1] and match the reference on random instances")
    {
        Rng rng(5);
        for (int trial = 0; trial < 100; ++trial) {
            const Eigen::Index dim = 1 + static_cast<Eigen::Index>(rng.below(8));
            const FeatureMatrix a = random_points(rng, dim, 1 + static_cast<Eigen::Index>(rng.below(20)), 0.0);
            const FeatureMatrix b =
                random_points(rng, dim, 1 + static_cast<Eigen::Index>(rng.below(20)), rng.uniform(-2.0, 2.0));
            const Cluster clusters[] = {{a, "a"}, {b, "b"}};
            for (double w : silhouette_widths<double>(clusters)) {
                CHECK(w >= -1.0);
                CHECK(w <= 1.0);
            }
            CHECK(abs_silhouette<double>(clusters)
                  == doctest::Approx(oracle::abs_silhouette({to_points(a), to_points(b)})).epsilon(1e-12));
        }
    }

    TEST_CASE("three clusters use the nearest other cluster")
    {
        Rng rng(8);
        const FeatureMatrix a = random_points(rng, 3, 6, 0.0);
        const FeatureMatrix b = random_points(rng, 3, 7, 3.0);
        const FeatureMatrix c = random_points(rng, 3, 5, -4.0);
        const Cluster clusters[] = {{a, "a"}, {b, "b"}, {c, "c"}};
        CHECK(abs_silhouette<double>(clusters)
              == doctest::Approx(oracle::abs_silhouette({to_points(a), to_points(b), to_points(c)})).epsilon(1e-12));
    }

    TEST_CASE("silhouette is invariant to cluster order and to translation")
    {
        Rng rng(9);
        const FeatureMatrix a = random_points(rng, 5, 8, 0.0);
        const FeatureMatrix b = random_points(rng, 5, 9, 1.0);
        const double forward = abs_silhouette<double>(a, b);
        CHECK(abs_silhouette<double>(b, a) == doctest::Approx(forward).epsilon(1e-12));
        const FeatureMatrix shift = FeatureVector::Constant(5, 7.5).replicate(1, 8);
        const FeatureMatrix shift_b = FeatureVector::Constant(5, 7.5).replicate(1, 9);
        CHECK(abs_silhouette<double>(FeatureMatrix(a + shift), FeatureMatrix(b + shift_b))
              == doctest::Approx(forward).epsilon(1e-9));
    }

    TEST_CASE("single precision instantiation agrees with double")
    {
        Rng rng(21);
        const FeatureMatrix a = random_points(rng, 3, 6, 0.0);
        const FeatureMatrix b = random_points(rng, 3, 6, 1.5);
        const FeatureMatrixT<float> af = a.cast<float>(), bf = b.cast<float>();
        CHECK(abs_silhouette<float>(af, bf) == doctest::Approx(abs_silhouette<double>(a, b)).epsilon(1e-4));
    }

    TEST_CASE("cohesion")
    {
        FeatureMatrix pts(2, 2);
        pts << 0, 2, 0, 0;
        CHECK(cohesion(Cluster{pts, "a"}) == doctest::Approx(2.0));

        Rng rng(4);
        const FeatureMatrix m = random_points(rng, 4, 10, 0.0);
        const FeatureVector mu = m.rowwise().mean();
        double expected = 0.0;
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            expected += (m.col(j) - mu).squaredNorm();
        CHECK(cohesion(Cluster{m, "a"}) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(cohesion(Cluster{FeatureMatrix(FeatureVector::Ones(4).replicate(1, 3)), "a"}) == 0.0);
    }
}
