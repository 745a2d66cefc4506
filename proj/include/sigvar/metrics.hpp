#ifndef SIGVAR_METRICS_HPP
#define SIGVAR_METRICS_HPP

// Cluster-quality measures over feature vectors: Euclidean dissimilarity,
// per-member silhouette widths, the absolute silhouette index and cohesion.
//
// Clusters store one member per column. Everything is templated on the
// scalar type; the library itself instantiates double.

#include "sigvar/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace sigvar {

template<typename Scalar>
using FeatureMatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template<typename Scalar>
using FeatureVectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using FeatureMatrix = FeatureMatrixT<double>;
using FeatureVector = FeatureVectorT<double>;

template<typename Scalar>
struct ClusterT
{
    FeatureMatrixT<Scalar> members; // D x n, one member per column
    std::string label;

    Eigen::Index size() const { return members.cols(); }
    Eigen::Index dimension() const { return members.rows(); }
    bool empty() const { return members.cols() == 0; }
};

using Cluster = ClusterT<double>;

/// Euclidean distance between two vectors of equal dimension.
template<typename DerivedA, typename DerivedB>
typename DerivedA::Scalar euclidean(const Eigen::MatrixBase<DerivedA> &u, const Eigen::MatrixBase<DerivedB> &v)
{
    if (u.size() != v.size())
        throw DataError("euclidean: dimension mismatch (" + std::to_string(u.size()) + " vs "
                        + std::to_string(v.size()) + ")");
    using Scalar = typename DerivedA::Scalar;
    Scalar sum(0);
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        const Scalar diff = u.derived().coeff(k) - v.derived().coeff(k);
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

namespace detail {

template<typename Scalar, typename Derived>
Scalar mean_distance_to(const Eigen::MatrixBase<Derived> &point, const FeatureMatrixT<Scalar> &members,
                        Eigen::Index skip = -1)
{
    Scalar sum(0);
    for (Eigen::Index j = 0; j < members.cols(); ++j)
        if (j != skip)
            sum += euclidean(point, members.col(j));
    const Eigen::Index count = skip >= 0 ? members.cols() - 1 : members.cols();
    return sum / static_cast<Scalar>(count);
}

template<typename Scalar>
Scalar silhouette_ratio(Scalar a, Scalar b)
{
    const Scalar scale = std::max(a, b);
    // All distances zero: the member sits on top of everything, no separation.
    if (scale == Scalar(0))
        return Scalar(0);
    return (b - a) / scale;
}

} // namespace detail

/// Silhouette width of member `i` of `own` against the other clusters:
/// (b - a) / max(a, b), a the mean distance to the rest of `own`, b the
/// smallest mean distance to another cluster. Singleton clusters give 0.
template<typename Scalar>
Scalar silhouette_width(Eigen::Index i, const ClusterT<Scalar> &own, std::span<const ClusterT<Scalar>> others)
{
    if (i < 0 || i >= own.size())
        throw ConfigError("silhouette_width: member index out of range");
    bool any_other = false;
    for (const auto &c : others) {
        if (c.empty())
            continue;
        if (c.dimension() != own.dimension())
            throw DataError("silhouette_width: clusters differ in dimension");
        any_other = true;
    }
    if (!any_other)
        throw ConfigError("silhouette_width: no non-empty other cluster");
    if (own.size() == 1)
        return Scalar(0);

    const auto point = own.members.col(i);
    const Scalar a = detail::mean_distance_to<Scalar>(point, own.members, i);
    Scalar b = std::numeric_limits<Scalar>::infinity();
    for (const auto &c : others)
        if (!c.empty())
            b = std::min(b, detail::mean_distance_to<Scalar>(point, c.members));
    return detail::silhouette_ratio(a, b);
}

/// Silhouette widths of every member of every cluster, cluster by cluster
/// in member order.
template<typename Scalar>
std::vector<Scalar> silhouette_widths(std::span<const ClusterT<Scalar>> clusters)
{
    if (clusters.size() < 2)
        throw ConfigError("silhouette: at least two clusters are required");
    Eigen::Index total = 0;
    for (const auto &c : clusters) {
        if (c.empty())
            throw ConfigError("silhouette: empty cluster '" + c.label + "'");
        if (c.dimension() != clusters.front().dimension())
            throw DataError("silhouette: clusters differ in dimension");
        total += c.size();
    }

    // Pairwise distances over the stacked members, computed once.
    FeatureMatrixT<Scalar> stacked(clusters.front().dimension(), total);
    std::vector<Eigen::Index> offsets;
    Eigen::Index at = 0;
    for (const auto &c : clusters) {
        offsets.push_back(at);
        stacked.middleCols(at, c.size()) = c.members;
        at += c.size();
    }
    FeatureMatrixT<Scalar> dist(total, total);
    for (Eigen::Index p = 0; p < total; ++p) {
        dist(p, p) = Scalar(0);
        for (Eigen::Index q = p + 1; q < total; ++q)
            dist(p, q) = dist(q, p) = euclidean(stacked.col(p), stacked.col(q));
    }

    std::vector<Scalar> widths;
    widths.reserve(static_cast<std::size_t>(total));
    for (std::size_t s = 0; s < clusters.size(); ++s) {
        const Eigen::Index n_own = clusters[s].size();
        for (Eigen::Index i = 0; i < n_own; ++i) {
            if (n_own == 1) {
                widths.push_back(Scalar(0));
                continue;
            }
            const Eigen::Index row = offsets[s] + i;
            const Scalar a = dist.row(row).segment(offsets[s], n_own).sum() / static_cast<Scalar>(n_own - 1);
            Scalar b = std::numeric_limits<Scalar>::infinity();
            for (std::size_t r = 0; r < clusters.size(); ++r) {
                if (r == s)
                    continue;
                const Eigen::Index n_other = clusters[r].size();
                b = std::min(b, dist.row(row).segment(offsets[r], n_other).sum() / static_cast<Scalar>(n_other));
            }
            widths.push_back(detail::silhouette_ratio(a, b));
        }
    }
    return widths;
}

/// |mean silhouette width| over all members of all clusters; in [0, 1].
template<typename Scalar>
Scalar abs_silhouette(std::span<const ClusterT<Scalar>> clusters)
{
    const auto widths = silhouette_widths(clusters);
    Scalar sum(0);
    for (Scalar w : widths)
        sum += w;
    return std::abs(sum / static_cast<Scalar>(widths.size()));
}

/// Convenience for the common genuine-vs-synthetic pair.
template<typename Scalar>
Scalar abs_silhouette(const FeatureMatrixT<Scalar> &first, const FeatureMatrixT<Scalar> &second)
{
    const ClusterT<Scalar> pair[2] = {{first, "first"}, {second, "second"}};
    return abs_silhouette(std::span<const ClusterT<Scalar>>(pair));
}

/// Sum of squared distances of the members to their centroid.
template<typename Scalar>
Scalar cohesion(const ClusterT<Scalar> &cluster)
{
    if (cluster.empty())
        throw ConfigError("cohesion: empty cluster");
    const FeatureVectorT<Scalar> centroid = cluster.members.rowwise().mean();
    return (cluster.members.colwise() - centroid).squaredNorm();
}

} // namespace sigvar

#endif // SIGVAR_METRICS_HPP
