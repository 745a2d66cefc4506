#include "sigvar/parameters.hpp"

#include "sigvar/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace sigvar {

namespace {

constexpr std::array<std::string_view, 6> duplicator_names = {
    "alpha_A_min", "alpha_A_max", "alpha_P_min", "alpha_P_max", "alpha_S_min", "alpha_S_max"};
constexpr std::array<std::string_view, 2> gaussian_names = {"sigma_min", "sigma_max"};

} // namespace

std::string_view to_string(ParameterKind kind)
{
    return kind == ParameterKind::duplicator ? "duplicator" : "gaussian";
}

ParameterKind parse_parameter_kind(std::string_view text)
{
    if (text == "duplicator" || text == "image")
        return ParameterKind::duplicator;
    if (text == "gaussian" || text == "feature")
        return ParameterKind::gaussian;
    throw ConfigError("unknown parameter kind '" + std::string(text) + "'");
}

Eigen::Index parameter_dimension(ParameterKind kind)
{
    return kind == ParameterKind::duplicator ? 6 : 2;
}

std::span<const std::string_view> parameter_names(ParameterKind kind)
{
    if (kind == ParameterKind::duplicator)
        return duplicator_names;
    return gaussian_names;
}

ParameterVector make_duplicator_parameters(double amplitude_min, double amplitude_max, double period_min,
                                           double period_max, double phase_min, double phase_max)
{
    ParameterVector p{ParameterKind::duplicator, Eigen::VectorXd(6)};
    p.values << amplitude_min, amplitude_max, period_min, period_max, phase_min, phase_max;
    return p;
}

ParameterVector make_gaussian_parameters(double sigma_min, double sigma_max)
{
    ParameterVector p{ParameterKind::gaussian, Eigen::VectorXd(2)};
    p.values << sigma_min, sigma_max;
    return p;
}

ParameterBounds search_bounds(ParameterKind kind)
{
    ParameterBounds b;
    if (kind == ParameterKind::duplicator) {
        b.low = Eigen::VectorXd(6);
        b.high = Eigen::VectorXd(6);
        b.low << 10.0, 10.0, 0.0, 0.0, 0.0, 0.0;
        b.high << 100.0, 100.0, 1.0, 1.0, 1.0, 1.0;
    } else {
        b.low = Eigen::VectorXd::Constant(2, 0.01);
        b.high = Eigen::VectorXd::Constant(2, 1.0);
    }
    return b;
}

void validate(const ParameterVector &params)
{
    const Eigen::Index dim = parameter_dimension(params.kind);
    if (params.values.size() != dim)
        throw ConfigError(std::string(to_string(params.kind)) + " parameters need " + std::to_string(dim)
                          + " values, got " + std::to_string(params.values.size()));
    const auto names = parameter_names(params.kind);
    for (Eigen::Index i = 0; i < dim; ++i)
        if (!std::isfinite(params.values[i]))
            throw ConfigError("parameter " + std::string(names[i]) + " is not finite");
    for (Eigen::Index i = 0; i < dim; i += 2)
        if (params.values[i] > params.values[i + 1])
            throw ConfigError("parameter " + std::string(names[i]) + " exceeds " + std::string(names[i + 1]));
    // Amplitude and sigma divide; period and phase may be zero.
    if (params.values[0] <= 0.0)
        throw ConfigError("parameter " + std::string(names[0]) + " must be positive");
    for (Eigen::Index i = 2; i < dim; ++i)
        if (params.values[i] < 0.0)
            throw ConfigError("parameter " + std::string(names[i]) + " must be non-negative");
}

bool is_feasible(const ParameterVector &params)
{
    if (params.values.size() != parameter_dimension(params.kind))
        return false;
    const auto bounds = search_bounds(params.kind);
    for (Eigen::Index i = 0; i < params.values.size(); ++i) {
        const double v = params.values[i];
        if (!(v >= bounds.low[i] && v <= bounds.high[i]))
            return false;
    }
    for (Eigen::Index i = 0; i < params.values.size(); i += 2)
        if (params.values[i] > params.values[i + 1])
            return false;
    return true;
}

ParameterVector repair(ParameterVector params)
{
    const auto bounds = search_bounds(params.kind);
    params.values = params.values.cwiseMax(bounds.low).cwiseMin(bounds.high);
    for (Eigen::Index i = 0; i + 1 < params.values.size(); i += 2)
        if (params.values[i] > params.values[i + 1])
            std::swap(params.values[i], params.values[i + 1]);
    return params;
}

ParameterVector default_duplicator_parameters()
{
    return make_duplicator_parameters(5.0, 30.0, 0.5, 1.0, 0.0, 1.0);
}

ParameterVector optimized_duplicator_parameters()
{
    return make_duplicator_parameters(69.3, 88.7, 0.32, 0.53, 0.47, 0.74);
}

ParameterVector optimized_gaussian_parameters()
{
    return make_gaussian_parameters(0.29, 0.72);
}

} // namespace sigvar
