#ifndef SIGVAR_TESTS_ORACLES_HPP
#define SIGVAR_TESTS_ORACLES_HPP

// Reference implementations written straight from the definitions, with
// plain loops and no shared code with the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using Point = std::vector<double>;
using PointSet = std::vector<Point>;

inline double distance(const Point &a, const Point &b)
{
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
}

/// Mean silhouette width over all points of all clusters, absolute value.
inline double abs_silhouette(const std::vector<PointSet> &clusters)
{
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (std::size_t i = 0; i < clusters[c].size(); ++i) {
            ++count;
            if (clusters[c].size() == 1)
                continue;
            double a = 0.0;
            for (std::size_t j = 0; j < clusters[c].size(); ++j)
                if (j != i)
                    a += distance(clusters[c][i], clusters[c][j]);
            a /= static_cast<double>(clusters[c].size() - 1);
            double b = std::numeric_limits<double>::infinity();
            for (std::size_t o = 0; o < clusters.size(); ++o) {
                if (o == c || clusters[o].empty())
                    continue;
                double m = 0.0;
                for (const auto &q : clusters[o])
                    m += distance(clusters[c][i], q);
                b = std::min(b, m / static_cast<double>(clusters[o].size()));
            }
            const double denom = std::max(a, b);
            total += denom > 0.0 ? (b - a) / denom : 0.0;
        }
    }
    return std::abs(total / static_cast<double>(count));
}

struct Eer
{
    double eer;
    double threshold;
};

/// Tries every candidate threshold and counts errors one score at a time.
inline Eer eer_sweep(const std::vector<double> &genuine, const std::vector<double> &forgery)
{
    std::vector<double> pooled = genuine;
    pooled.insert(pooled.end(), forgery.begin(), forgery.end());
    std::sort(pooled.begin(), pooled.end());
    pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());
    std::vector<double> candidates{-std::numeric_limits<double>::infinity()};
    for (std::size_t k = 0; k < pooled.size(); ++k) {
        candidates.push_back(pooled[k]);
        if (k + 1 < pooled.size())
            candidates.push_back(pooled[k] + (pooled[k + 1] - pooled[k]) / 2.0);
    }
    candidates.push_back(std::numeric_limits<double>::infinity());

    Eer best{0.0, 0.0};
    double best_gap = std::numeric_limits<double>::infinity();
    for (double t : candidates) {
        double g_below = 0, g_equal = 0, f_above = 0, f_equal = 0;
        for (double s : genuine) {
            g_below += s < t;
            g_equal += s == t;
        }
        for (double s : forgery) {
            f_above += s > t;
            f_equal += s == t;
        }
        const double frr = (g_below + 0.5 * g_equal) / static_cast<double>(genuine.size());
        const double far = (f_above + 0.5 * f_equal) / static_cast<double>(forgery.size());
        if (std::abs(far - frr) < best_gap) {
            best_gap = std::abs(far - frr);
            best = {(far + frr) / 2.0, t};
        }
    }
    return best;
}

/// Otsu threshold from per-pixel class statistics, compared as exact
/// fractions. Split is {v < t} versus {v >= t}; ties go to the lowest t.
inline int otsu(const std::vector<std::uint8_t> &pixels)
{
    using i128 = __int128;
    i128 best_num = -1;
    i128 best_den = 1;
    int best_t = 0;
    for (int t = 0; t < 256; ++t) {
        i128 n0 = 0, n1 = 0, s0 = 0, s1 = 0;
        for (std::uint8_t v : pixels) {
            if (v < t) {
                ++n0;
                s0 += v;
            } else {
                ++n1;
                s1 += v;
            }
        }
        // n0 n1 (mu0 - mu1)^2 = (s0 n1 - s1 n0)^2 / (n0 n1)
        i128 num = 0, den = 1;
        if (n0 > 0 && n1 > 0) {
            const i128 diff = s0 * n1 - s1 * n0;
            num = diff * diff;
            den = n0 * n1;
        }
        if (num * best_den > best_num * den) {
            best_num = num;
            best_den = den;
            best_t = t;
        }
    }
    return best_t;
}

/// Dual SVM objective  sum(alpha) - 1/2 alpha' Q alpha  maximized over
/// 0 <= alpha <= C, y' alpha = 0 by accelerated projected gradient with
/// restarts. Q is given densely.
inline double svm_dual_optimum(const std::vector<std::vector<double>> &q, const std::vector<double> &y,
                               const std::vector<double> &c, int iterations = 60000)
{
    const std::size_t n = y.size();
    auto objective = [&](const std::vector<double> &a) {
        double lin = 0.0, quad = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            lin += a[i];
            for (std::size_t j = 0; j < n; ++j)
                quad += a[i] * q[i][j] * a[j];
        }
        return lin - 0.5 * quad;
    };
    // Projection onto the box intersected with the hyperplane: bisection on
    // the multiplier of y' alpha = 0.
    auto project = [&](const std::vector<double> &z) {
        auto at = [&](double lambda, std::vector<double> &out) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                out[i] = std::clamp(z[i] - lambda * y[i], 0.0, c[i]);
                s += y[i] * out[i];
            }
            return s;
        };
        std::vector<double> out(n);
        double lo = -1e6, hi = 1e6;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (at(mid, out) > 0.0)
                lo = mid;
            else
                hi = mid;
        }
        at(0.5 * (lo + hi), out);
        return out;
    };
    double lipschitz = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            row += std::abs(q[i][j]);
        lipschitz = std::max(lipschitz, row);
    }
    const double step = 1.0 / lipschitz;

    std::vector<double> x(n, 0.0), x_prev(n, 0.0), v(n, 0.0);
    double t = 1.0;
    double best = objective(x);
    for (int it = 0; it < iterations; ++it) {
        std::vector<double> z(n);
        for (std::size_t i = 0; i < n; ++i) {
            double grad = 1.0;
            for (std::size_t j = 0; j < n; ++j)
                grad -= q[i][j] * v[j];
            z[i] = v[i] + step * grad;
        }
        x_prev = x;
        x = project(z);
        const double value = objective(x);
        if (value < best) {
            // Restart momentum whenever the objective drops.
            t = 1.0;
            v = x;
        } else {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            for (std::size_t i = 0; i < n; ++i)
                v[i] = x[i] + (t - 1.0) / t_next * (x[i] - x_prev[i]);
            t = t_next;
        }
        best = std::max(best, value);
    }
    return best;
}

} // namespace oracle

#endif // SIGVAR_TESTS_ORACLES_HPP
