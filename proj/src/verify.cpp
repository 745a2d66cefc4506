#include "sigvar/verify.hpp"

#include "sigvar/error.hpp"
#include "sigvar/features.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <list>
#include <sstream>
#include <unordered_map>

namespace sigvar {

ClassWeights class_weights(std::size_t positive_count, std::size_t negative_count)
{
    if (positive_count == 0 || negative_count == 0)
        throw ConfigError("class weights: both classes need at least one example");
    ClassWeights w;
    w.negative = 1.0;
    w.skew = static_cast<double>(negative_count) / static_cast<double>(positive_count);
    w.positive = w.skew * w.negative;
    return w;
}

double rbf_kernel(const FeatureVector &a, const FeatureVector &b, double gamma)
{
    return std::exp(-gamma * (a - b).squaredNorm());
}

namespace {

/// LRU cache of kernel rows K(x_i, .).
class KernelRows
{
public:
    KernelRows(const FeatureMatrix &samples, double gamma, std::size_t budget_bytes)
        : samples_(samples), gamma_(gamma), norms_(samples.colwise().squaredNorm().transpose())
    {
        const std::size_t row_bytes = static_cast<std::size_t>(samples.cols()) * sizeof(double) + 64;
        capacity_ = std::max<std::size_t>(2, budget_bytes / row_bytes);
    }

    const Eigen::VectorXd &row(Eigen::Index i)
    {
        if (auto it = index_.find(i); it != index_.end()) {
            order_.splice(order_.begin(), order_, it->second);
            return it->second->second;
        }
        if (order_.size() >= capacity_) {
            index_.erase(order_.back().first);
            order_.pop_back();
        }
        Eigen::VectorXd k = samples_.transpose() * samples_.col(i);
        for (Eigen::Index j = 0; j < k.size(); ++j)
            k[j] = std::exp(-gamma_ * std::max(0.0, norms_[i] + norms_[j] - 2.0 * k[j]));
        k[i] = 1.0;
        order_.emplace_front(i, std::move(k));
        index_[i] = order_.begin();
        return order_.front().second;
    }

private:
    const FeatureMatrix &samples_;
    double gamma_;
    Eigen::VectorXd norms_;
    std::size_t capacity_;
    std::list<std::pair<Eigen::Index, Eigen::VectorXd>> order_;
    std::unordered_map<Eigen::Index, std::list<std::pair<Eigen::Index, Eigen::VectorXd>>::iterator> index_;
};

constexpr double tau = 1e-12;

} // namespace

DualSolution solve_dual(const FeatureMatrix &samples, const Eigen::VectorXd &labels, const Eigen::VectorXd &costs,
                        double gamma, const SvmOptions &options)
{
    const Eigen::Index n = samples.cols();
    if (n < 2 || labels.size() != n || costs.size() != n)
        throw ConfigError("svm: need at least two samples with matching labels and costs");
    if (!(gamma > 0.0))
        throw ConfigError("svm: gamma must be positive");
    for (Eigen::Index t = 0; t < n; ++t) {
        if (labels[t] != 1.0 && labels[t] != -1.0)
            throw ConfigError("svm: labels must be +1 or -1");
        if (!(costs[t] > 0.0))
            throw ConfigError("svm: costs must be positive");
    }
    if (!samples.allFinite())
        throw DataError("svm: training samples contain non-finite values");

    const std::size_t cap =
        options.max_iterations > 0 ? options.max_iterations
                                   : std::max<std::size_t>(10'000'000, 100 * static_cast<std::size_t>(n));
    KernelRows kernel(samples, gamma, options.cache_bytes);
    const Eigen::VectorXd &y = labels;
    const Eigen::VectorXd &c = costs;

    DualSolution sol;
    sol.alpha = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd &alpha = sol.alpha;
    Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0); // gradient of 1/2 a^T Q a - e^T a

    auto in_up = [&](Eigen::Index t) { return y[t] > 0 ? alpha[t] < c[t] : alpha[t] > 0.0; };
    auto in_low = [&](Eigen::Index t) { return y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < c[t]; };

    std::size_t iter = 0;
    double violation = std::numeric_limits<double>::infinity();
    while (true) {
        double g_max = -std::numeric_limits<double>::infinity();
        double g_min = std::numeric_limits<double>::infinity();
        Eigen::Index i = -1, j = -1;
        for (Eigen::Index t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            if (in_up(t) && v > g_max) {
                g_max = v;
                i = t;
            }
            if (in_low(t) && v < g_min) {
                g_min = v;
                j = t;
            }
        }
        violation = (i < 0 || j < 0) ? 0.0 : g_max - g_min;
        if (violation < options.tolerance)
            break;
        if (iter >= cap) {
            std::ostringstream msg;
            msg << "svm: no convergence after " << iter << " iterations (KKT violation " << violation << ")";
            throw NumericalError(msg.str());
        }
        ++iter;

        const Eigen::VectorXd &k_i = kernel.row(i);
        const Eigen::VectorXd &k_j = kernel.row(j);
        const double c_i = c[i], c_j = c[j];
        const double old_i = alpha[i], old_j = alpha[j];
        const double q_ij = y[i] * y[j] * k_i[j];

        if (y[i] != y[j]) {
            double quad = 2.0 + 2.0 * q_ij;
            if (quad <= 0.0)
                quad = tau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > c_i - c_j) {
                if (alpha[i] > c_i) {
                    alpha[i] = c_i;
                    alpha[j] = c_i - diff;
                }
            } else if (alpha[j] > c_j) {
                alpha[j] = c_j;
                alpha[i] = c_j + diff;
            }
        } else {
            double quad = 2.0 - 2.0 * q_ij;
            if (quad <= 0.0)
                quad = tau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c_i) {
                if (alpha[i] > c_i) {
                    alpha[i] = c_i;
                    alpha[j] = sum - c_i;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > c_j) {
                if (alpha[j] > c_j) {
                    alpha[j] = c_j;
                    alpha[i] = sum - c_j;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        const double d_i = (alpha[i] - old_i) * y[i];
        const double d_j = (alpha[j] - old_j) * y[j];
        // Q_it = y_i y_t K_it, so grad_t += y_t (K_it d_i + K_jt d_j).
        grad += y.cwiseProduct(k_i * d_i + k_j * d_j);
    }

    sol.kkt_violation = violation;
    sol.iterations = iter;

    double upper = std::numeric_limits<double>::infinity();
    double lower = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        const bool at_upper = alpha[t] >= c[t];
        const bool at_lower = alpha[t] <= 0.0;
        if (at_upper) {
            if (y[t] < 0)
                upper = std::min(upper, yg);
            else
                lower = std::max(lower, yg);
        } else if (at_lower) {
            if (y[t] > 0)
                upper = std::min(upper, yg);
            else
                lower = std::max(lower, yg);
        } else {
            ++free_count;
            free_sum += yg;
        }
    }
    sol.rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (upper + lower) / 2.0;
    // 1/2 a^T Q a - e^T a = sum a_t (grad_t - 1) / 2
    sol.dual_objective = -0.5 * alpha.dot(grad - Eigen::VectorXd::Ones(n));
    return sol;
}

Classifier::Classifier(double gamma, FeatureMatrix support_vectors, Eigen::VectorXd coefficients, double bias)
    : gamma_(gamma), support_(std::move(support_vectors)), coefficients_(std::move(coefficients)), bias_(bias)
{
    if (!(gamma_ > 0.0))
        throw ConfigError("classifier: gamma must be positive");
    if (coefficients_.size() != support_.cols())
        throw DataError("classifier: coefficient count does not match support vectors");
    support_norms_ = support_.colwise().squaredNorm().transpose();
}

double Classifier::decision_score(const FeatureVector &v) const
{
    if (v.size() != support_.rows())
        throw DataError("decision_score: dimension " + std::to_string(v.size()) + " does not match model dimension "
                        + std::to_string(support_.rows()));
    double score = bias_;
    for (Eigen::Index t = 0; t < support_.cols(); ++t)
        score += coefficients_[t] * std::exp(-gamma_ * (support_.col(t) - v).squaredNorm());
    return score;
}

Eigen::VectorXd Classifier::decision_scores(const FeatureMatrix &samples) const
{
    Eigen::VectorXd scores(samples.cols());
    for (Eigen::Index i = 0; i < samples.cols(); ++i)
        scores[i] = decision_score(samples.col(i));
    return scores;
}

double default_gamma(const TrainingSet &set)
{
    const Eigen::Index dim = set.positives.rows();
    if (dim == 0)
        throw DataError("default_gamma: empty feature dimension");
    const double count = static_cast<double>(set.positives.size() + set.negatives.size());
    const double mean = (set.positives.sum() + set.negatives.sum()) / count;
    const double sq = (set.positives.array() - mean).square().sum() + (set.negatives.array() - mean).square().sum();
    const double variance = sq / count;
    return variance > 0.0 ? 1.0 / (static_cast<double>(dim) * variance) : 1.0 / static_cast<double>(dim);
}

TrainedClassifier train_wd_classifier(const TrainingSet &set, double gamma, const SvmOptions &options)
{
    if (set.positives.cols() == 0 || set.negatives.cols() == 0)
        throw ConfigError("train: both positive and negative examples are required");
    if (set.positives.rows() != set.negatives.rows())
        throw DataError("train: positive and negative dimensions differ");

    TrainedClassifier out;
    out.weights = class_weights(static_cast<std::size_t>(set.positives.cols()),
                                static_cast<std::size_t>(set.negatives.cols()));
    const Eigen::Index p = set.positives.cols();
    const Eigen::Index n = p + set.negatives.cols();
    FeatureMatrix samples(set.positives.rows(), n);
    samples << set.positives, set.negatives;
    Eigen::VectorXd labels(n), costs(n);
    labels.head(p).setOnes();
    labels.tail(n - p).setConstant(-1.0);
    costs.head(p).setConstant(out.weights.positive);
    costs.tail(n - p).setConstant(out.weights.negative);

    out.solution = solve_dual(samples, labels, costs, gamma, options);

    std::vector<Eigen::Index> support;
    for (Eigen::Index t = 0; t < n; ++t)
        if (out.solution.alpha[t] > 0.0)
            support.push_back(t);
    FeatureMatrix vectors(samples.rows(), static_cast<Eigen::Index>(support.size()));
    Eigen::VectorXd coef(static_cast<Eigen::Index>(support.size()));
    for (std::size_t s = 0; s < support.size(); ++s) {
        vectors.col(static_cast<Eigen::Index>(s)) = samples.col(support[s]);
        coef[static_cast<Eigen::Index>(s)] = out.solution.alpha[support[s]] * labels[support[s]];
    }
    out.classifier = Classifier(gamma, std::move(vectors), std::move(coef), -out.solution.rho);
    return out;
}

namespace {

constexpr char model_magic[4] = {'S', 'V', 'S', 'M'};
constexpr std::uint32_t model_version = 1;

template<class T>
void put(std::ostream &out, T value)
{
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes, bytes + sizeof(T));
    out.write(reinterpret_cast<const char *>(bytes), sizeof(T));
}

template<class T>
T get(std::istream &in, const std::filesystem::path &path)
{
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char *>(bytes), sizeof(T)))
        throw DataError("'" + path.string() + "': truncated model file");
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

double parse_double(std::string_view text, const std::filesystem::path &path, std::size_t line)
{
    double value = 0.0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || p != text.data() + text.size() || !std::isfinite(value))
        throw DataError(path.string() + ":" + std::to_string(line) + ": invalid number '" + std::string(text) + "'");
    return value;
}

std::string_view expect_key(const std::string &line, std::string_view key, const std::filesystem::path &path,
                            std::size_t line_no)
{
    if (line.size() <= key.size() || line.compare(0, key.size(), key) != 0 || line[key.size()] != '=')
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected '" + std::string(key) + "='");
    return std::string_view(line).substr(key.size() + 1);
}

} // namespace

void save_classifier_text(const Classifier &classifier, const std::filesystem::path &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write model '" + path.string() + "'");
    out << "sigvar-svm " << model_version << '\n';
    out << "gamma=" << format_double(classifier.gamma()) << '\n';
    out << "bias=" << format_double(classifier.bias()) << '\n';
    out << "dim=" << classifier.dimension() << '\n';
    out << "count=" << classifier.support_vectors().cols() << '\n';
    for (Eigen::Index t = 0; t < classifier.support_vectors().cols(); ++t) {
        out << format_double(classifier.coefficients()[t]);
        for (Eigen::Index k = 0; k < classifier.dimension(); ++k)
            out << ',' << format_double(classifier.support_vectors()(k, t));
        out << '\n';
    }
}

void save_classifier_binary(const Classifier &classifier, const std::filesystem::path &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write model '" + path.string() + "'");
    out.write(model_magic, 4);
    put(out, model_version);
    put(out, classifier.gamma());
    put(out, classifier.bias());
    put(out, static_cast<std::uint32_t>(classifier.dimension()));
    put(out, static_cast<std::uint32_t>(classifier.support_vectors().cols()));
    for (Eigen::Index t = 0; t < classifier.support_vectors().cols(); ++t) {
        put(out, classifier.coefficients()[t]);
        for (Eigen::Index k = 0; k < classifier.dimension(); ++k)
            put(out, classifier.support_vectors()(k, t));
    }
}

Classifier load_classifier(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open model '" + path.string() + "'");
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() == 4 && std::memcmp(magic, model_magic, 4) == 0) {
        const auto version = get<std::uint32_t>(in, path);
        if (version != model_version)
            throw DataError("'" + path.string() + "': unsupported model version " + std::to_string(version));
        const auto gamma = get<double>(in, path);
        const auto bias = get<double>(in, path);
        const auto dim = get<std::uint32_t>(in, path);
        const auto count = get<std::uint32_t>(in, path);
        FeatureMatrix support(dim, count);
        Eigen::VectorXd coef(count);
        for (std::uint32_t t = 0; t < count; ++t) {
            coef[t] = get<double>(in, path);
            for (std::uint32_t k = 0; k < dim; ++k)
                support(k, t) = get<double>(in, path);
        }
        return Classifier(gamma, std::move(support), std::move(coef), bias);
    }

    in.clear();
    in.seekg(0);
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> const std::string & {
        if (!std::getline(in, line))
            throw DataError("'" + path.string() + "': truncated model file");
        ++line_no;
        return line;
    };
    const std::string header = next_line();
    if (header.rfind("sigvar-svm ", 0) != 0)
        throw DataError("'" + path.string() + "': not a sigvar model file");
    if (header != "sigvar-svm " + std::to_string(model_version))
        throw DataError("'" + path.string() + "': unsupported model version '" + header.substr(11) + "'");
    const double gamma = parse_double(expect_key(next_line(), "gamma", path, line_no), path, line_no);
    const double bias = parse_double(expect_key(next_line(), "bias", path, line_no), path, line_no);
    const auto dim = static_cast<Eigen::Index>(parse_double(expect_key(next_line(), "dim", path, line_no), path, line_no));
    const auto count =
        static_cast<Eigen::Index>(parse_double(expect_key(next_line(), "count", path, line_no), path, line_no));
    FeatureMatrix support(dim, count);
    Eigen::VectorXd coef(count);
    for (Eigen::Index t = 0; t < count; ++t) {
        const std::string &row = next_line();
        std::size_t start = 0;
        for (Eigen::Index k = -1; k < dim; ++k) {
            const std::size_t comma = row.find(',', start);
            const bool last = k + 1 == dim;
            if (last != (comma == std::string::npos))
                throw DataError(path.string() + ":" + std::to_string(line_no) + ": wrong number of fields");
            const std::string_view field =
                std::string_view(row).substr(start, last ? std::string::npos : comma - start);
            const double value = parse_double(field, path, line_no);
            if (k < 0)
                coef[t] = value;
            else
                support(k, t) = value;
            start = comma + 1;
        }
    }
    return Classifier(gamma, std::move(support), std::move(coef), bias);
}

} // namespace sigvar
