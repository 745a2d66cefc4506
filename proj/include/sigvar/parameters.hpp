#ifndef SIGVAR_PARAMETERS_HPP
#define SIGVAR_PARAMETERS_HPP

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>

namespace sigvar {

/// Which augmenter a parameter vector drives.
enum class ParameterKind
{
    duplicator, ///< (alpha_A_min, alpha_A_max, alpha_P_min, alpha_P_max, alpha_S_min, alpha_S_max)
    gaussian    ///< (sigma_min, sigma_max)
};

std::string_view to_string(ParameterKind kind);
ParameterKind parse_parameter_kind(std::string_view text);

/// Number of coordinates for a kind (6 or 2).
Eigen::Index parameter_dimension(ParameterKind kind);

/// Ordered ASCII names of the coordinates, e.g. "alpha_A_min".
std::span<const std::string_view> parameter_names(ParameterKind kind);

/// A position in the search space. Coordinates come in (min, max) pairs.
struct ParameterVector
{
    ParameterKind kind = ParameterKind::gaussian;
    Eigen::VectorXd values;

    Eigen::Index size() const { return values.size(); }
    double operator[](Eigen::Index i) const { return values[i]; }

    friend bool operator==(const ParameterVector &a, const ParameterVector &b)
    {
        return a.kind == b.kind && a.values.size() == b.values.size() && a.values == b.values;
    }
};

ParameterVector make_duplicator_parameters(double amplitude_min, double amplitude_max, double period_min,
                                           double period_max, double phase_min, double phase_max);
ParameterVector make_gaussian_parameters(double sigma_min, double sigma_max);

/// Global search box: the low and high limits of each coordinate.
struct ParameterBounds
{
    Eigen::VectorXd low;
    Eigen::VectorXd high;
};

ParameterBounds search_bounds(ParameterKind kind);

/// Throws ConfigError unless the vector has the right dimension, finite
/// entries, ordered (min <= max) pairs and strictly positive amplitudes/sigmas.
void validate(const ParameterVector &params);

/// True when the vector is ordered and inside the search box.
bool is_feasible(const ParameterVector &params);

/// Clamps every coordinate to the search box, then swaps inverted pairs.
ParameterVector repair(ParameterVector params);

/// Table of the default duplicator variability (5, 30, 0.5, 1, 0, 1).
ParameterVector default_duplicator_parameters();

/// Writer-averaged vectors shipped with the toolkit.
ParameterVector optimized_duplicator_parameters();
ParameterVector optimized_gaussian_parameters();

} // namespace sigvar

#endif // SIGVAR_PARAMETERS_HPP
