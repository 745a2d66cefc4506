#include "oracles.hpp"
#include "sigvar/error.hpp"
#include "sigvar/random.hpp"
#include "sigvar/verify.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace sigvar;

namespace {

struct Instance
{
    FeatureMatrix samples;
    Eigen::VectorXd labels;
    Eigen::VectorXd costs;
    double gamma;
};

Instance random_instance(Rng &rng)
{
    const auto n = static_cast<Eigen::Index>(4 + rng.below(17));
    const auto dim = static_cast<Eigen::Index>(1 + rng.below(6));
    Instance inst;
    inst.samples.resize(dim, n);
    inst.labels.resize(n);
    inst.costs.resize(n);
    const double c_pos = rng.uniform(0.1, 5.0);
    const double c_neg = rng.uniform(0.1, 5.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool positive = i == 0 || (i != 1 && rng.uniform() < 0.5);
        inst.labels[i] = positive ? 1.0 : -1.0;
        inst.costs[i] = positive ? c_pos : c_neg;
        for (Eigen::Index d = 0; d < dim; ++d)
            inst.samples(d, i) = rng.normal() + (positive ? 0.5 : -0.5);
    }
    inst.gamma = rng.uniform(0.05, 2.0);
    return inst;
}

double reference_objective(const Instance &inst)
{
    const auto n = static_cast<std::size_t>(inst.labels.size());
    std::vector<std::vector<double>> q(n, std::vector<double>(n));
    std::vector<double> y(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = inst.labels[static_cast<Eigen::Index>(i)];
        c[i] = inst.costs[static_cast<Eigen::Index>(i)];
        for (std::size_t j = 0; j < n; ++j) {
            double sq = 0.0;
            for (Eigen::Index d = 0; d < inst.samples.rows(); ++d) {
                const double diff = inst.samples(d, static_cast<Eigen::Index>(i))
                                    - inst.samples(d, static_cast<Eigen::Index>(j));
                sq += diff * diff;
            }
            q[i][j] = inst.labels[static_cast<Eigen::Index>(i)] * inst.labels[static_cast<Eigen::Index>(j)]
                      * std::exp(-inst.gamma * sq);
        }
    }
    return oracle::svm_dual_optimum(q, y, c);
}

} // namespace

TEST_SUITE("verify")
{
    TEST_CASE("class weights")
    {
        const ClassWeights w = class_weights(1, 14 * 581);
        CHECK(w.skew == 8134.0);
        CHECK(w.positive == 8134.0);
        CHECK(w.negative == 1.0);
        CHECK(class_weights(4, 10).positive == 2.5);
        CHECK_THROWS_AS(class_weights(0, 3), ConfigError);
    }

    TEST_CASE("rbf kernel")
    {
        FeatureVector a(2), b(2);
        a << 0, 0;
        b << 1, 2;
        CHECK(rbf_kernel(a, b, 0.5) == doctest::Approx(std::exp(-2.5)));
        CHECK(rbf_kernel(a, a, 3.0) == 1.0);
    }

    TEST_CASE("dual objective matches a generic QP solver")
    {
        Rng rng(55);
        SvmOptions tight;
        tight.tolerance = 1e-6;
        for (int k = 0; k < 10; ++k) {
            const Instance inst = random_instance(rng);
            const DualSolution s = solve_dual(inst.samples, inst.labels, inst.costs, inst.gamma, tight);
            CHECK(s.dual_objective == doctest::Approx(reference_objective(inst)).epsilon(1e-5));
            CHECK(std::abs(inst.labels.dot(s.alpha)) < 1e-9);
            CHECK(s.alpha.minCoeff() >= 0.0);
            CHECK((inst.costs - s.alpha).minCoeff() >= 0.0);
        }
    }

    TEST_CASE("separable toys train without errors")
    {
        Rng rng(8);
        for (int k = 0; k < 5; ++k) {
            TrainingSet set;
            set.positives.resize(3, 6);
            set.negatives.resize(3, 9);
            for (Eigen::Index i = 0; i < 6; ++i)
                set.positives.col(i) = FeatureVector::Constant(3, 3.0) + 0.3 * FeatureVector::NullaryExpr(3, [&] { return rng.normal(); });
            for (Eigen::Index i = 0; i < 9; ++i)
                set.negatives.col(i) = FeatureVector::Constant(3, -3.0) + 0.3 * FeatureVector::NullaryExpr(3, [&] { return rng.normal(); });
            const TrainedClassifier t = train_wd_classifier(set, 0.2);
            CHECK(t.classifier.decision_scores(set.positives).minCoeff() > 0.0);
            CHECK(t.classifier.decision_scores(set.negatives).maxCoeff() < 0.0);
        }
    }

    TEST_CASE("skew weighting keeps a lone positive")
    {
        // One positive inside a ring of negatives: with equal costs the
        // positive is outvoted, with C+ = N it is classified correctly.
        TrainingSet set;
        set.positives = FeatureMatrix::Zero(2, 1);
        set.negatives.resize(2, 40);
        for (Eigen::Index i = 0; i < 40; ++i) {
            const double angle = 2.0 * M_PI * static_cast<double>(i) / 40.0;
            set.negatives(0, i) = 0.8 * std::cos(angle);
            set.negatives(1, i) = 0.8 * std::sin(angle);
        }
        const double gamma = 0.5;
        const TrainedClassifier weighted = train_wd_classifier(set, gamma);
        CHECK(weighted.weights.positive == 40.0);
        CHECK(weighted.classifier.decision_score(set.positives.col(0)) > 0.0);

        FeatureMatrix samples(2, 41);
        samples << set.positives, set.negatives;
        Eigen::VectorXd labels = Eigen::VectorXd::Constant(41, -1.0);
        labels[0] = 1.0;
        const DualSolution flat = solve_dual(samples, labels, Eigen::VectorXd::Ones(41), gamma);
        double score = -flat.rho;
        for (Eigen::Index i = 0; i < 41; ++i)
            score += flat.alpha[i] * labels[i] * rbf_kernel(samples.col(i), samples.col(0), gamma);
        CHECK(score < 0.0);
    }

    TEST_CASE("default gamma")
    {
        TrainingSet set;
        set.positives.resize(2, 1);
        set.positives << 0, 2;
        set.negatives.resize(2, 1);
        set.negatives << 0, 2;
        CHECK(default_gamma(set) == doctest::Approx(1.0 / (2.0 * 1.0)));
        set.positives.setZero();
        set.negatives.setZero();
        CHECK(default_gamma(set) == 0.5);
    }

    TEST_CASE("model files round trip")
    {
        Rng rng(4);
        TrainingSet set;
        set.positives = FeatureMatrix::NullaryExpr(4, 3, [&] { return rng.normal() + 1.0; });
        set.negatives = FeatureMatrix::NullaryExpr(4, 7, [&] { return rng.normal() - 1.0; });
        const Classifier c = train_wd_classifier(set, 0.3).classifier;
        const FeatureMatrix probe = FeatureMatrix::NullaryExpr(4, 5, [&] { return rng.normal(); });
        const auto dir = std::filesystem::temp_directory_path() / "sigvar_model_test";
        std::filesystem::create_directories(dir);
        save_classifier_text(c, dir / "m.txt");
        save_classifier_binary(c, dir / "m.bin");
        for (const char *name : {"m.txt", "m.bin"}) {
            const Classifier back = load_classifier(dir / name);
            CHECK(back.gamma() == c.gamma());
            CHECK(back.bias() == c.bias());
            CHECK(back.decision_scores(probe) == c.decision_scores(probe));
        }
        {
            std::ofstream junk(dir / "junk.txt");
            junk << "not a model\n";
        }
        CHECK_THROWS_AS(load_classifier(dir / "junk.txt"), DataError);
        std::filesystem::remove_all(dir);
    }
}
