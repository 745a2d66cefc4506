#ifndef SIGVAR_VERIFY_HPP
#define SIGVAR_VERIFY_HPP

// Writer-dependent verification: an RBF-kernel soft-margin SVM trained on
// genuine (positive) against random-forgery (negative) vectors with
// per-class costs C- = 1 and C+ = skew * C-, skew = negatives / positives.

#include "sigvar/metrics.hpp"

#include <cstddef>
#include <filesystem>

namespace sigvar {

struct ClassWeights
{
    double skew = 1.0;
    double positive = 1.0; ///< C+
    double negative = 1.0; ///< C-
};

ClassWeights class_weights(std::size_t positive_count, std::size_t negative_count);

struct TrainingSet
{
    FeatureMatrix positives; ///< one vector per column
    FeatureMatrix negatives;
};

struct SvmOptions
{
    double tolerance = 1e-3;        ///< stop when the maximal KKT violation drops below this
    std::size_t max_iterations = 0; ///< 0 selects max(10^7, 100 n)
    std::size_t cache_bytes = std::size_t{256} << 20;
};

/// Result of the dual solve on explicit labels and per-sample costs.
struct DualSolution
{
    Eigen::VectorXd alpha;
    double rho = 0.0;            ///< decision = sum alpha_i y_i K(x_i, x) - rho
    double dual_objective = 0.0; ///< sum alpha - 1/2 alpha^T Q alpha
    double kkt_violation = 0.0;
    std::size_t iterations = 0;
};

double rbf_kernel(const FeatureVector &a, const FeatureVector &b, double gamma);

/// SMO with maximal-violating-pair working-set selection.
/// labels are +1 / -1; costs are the per-sample upper bounds.
DualSolution solve_dual(const FeatureMatrix &samples, const Eigen::VectorXd &labels, const Eigen::VectorXd &costs,
                        double gamma, const SvmOptions &options = {});

class Classifier
{
public:
    Classifier() = default;
    Classifier(double gamma, FeatureMatrix support_vectors, Eigen::VectorXd coefficients, double bias);

    /// Signed decision value; positive means the genuine side.
    double decision_score(const FeatureVector &v) const;
    Eigen::VectorXd decision_scores(const FeatureMatrix &samples) const;

    double gamma() const { return gamma_; }
    double bias() const { return bias_; }
    const FeatureMatrix &support_vectors() const { return support_; }
    const Eigen::VectorXd &coefficients() const { return coefficients_; } ///< alpha_i * y_i
    Eigen::Index dimension() const { return support_.rows(); }

private:
    double gamma_ = 1.0;
    FeatureMatrix support_;
    Eigen::VectorXd coefficients_;
    Eigen::VectorXd support_norms_;
    double bias_ = 0.0;
};

struct TrainedClassifier
{
    Classifier classifier;
    ClassWeights weights;
    DualSolution solution; ///< over positives followed by negatives
};

/// 1 / (D * variance of all feature entries); 1 / D when the variance is zero.
double default_gamma(const TrainingSet &set);

TrainedClassifier train_wd_classifier(const TrainingSet &set, double gamma, const SvmOptions &options = {});

/// Versioned text ("sigvar-svm 1") and binary ("SVSM") model files.
void save_classifier_text(const Classifier &classifier, const std::filesystem::path &path);
void save_classifier_binary(const Classifier &classifier, const std::filesystem::path &path);
Classifier load_classifier(const std::filesystem::path &path);

} // namespace sigvar

#endif // SIGVAR_VERIFY_HPP
