#ifndef SIGVAR_SWARM_HPP
#define SIGVAR_SWARM_HPP

// Particle swarm minimizer over the (min, max)-paired parameter boxes.
//
// Velocity update per coordinate d:
//   v' = k_inertia * v + k_personal * r1 * (p_best - x) + k_global * r2 * (g_best - x)
// with k_inertia = (3 - sqrt 5) / 2, k_personal = (1 + sqrt 5) / 2, k_global = 1,
// followed by x' = x + v' and a repair back into the feasible box.

#include "sigvar/parameters.hpp"
#include "sigvar/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace sigvar {

inline const double swarm_inertia = (3.0 - std::sqrt(5.0)) / 2.0;
inline const double swarm_personal_gain = (1.0 + std::sqrt(5.0)) / 2.0;
inline const double swarm_global_gain = 1.0;

struct Particle
{
    ParameterVector position;
    Eigen::VectorXd velocity;
    ParameterVector personal_best;
    double personal_best_fitness = std::numeric_limits<double>::infinity();
};

struct Swarm
{
    std::vector<Particle> particles;
    ParameterVector global_best;
    double global_best_fitness = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;
    int iteration = 0;
};

/// Samples particle positions uniformly inside the search box, each max
/// coordinate drawn above its sampled min. Velocities start at zero.
Swarm init_swarm(ParameterKind kind, int particle_count, std::uint64_t seed);

/// Velocity update with explicit per-dimension random factors.
Eigen::VectorXd update_velocity(const Particle &particle, const ParameterVector &global_best,
                                const Eigen::VectorXd &r1, const Eigen::VectorXd &r2);

/// Velocity update drawing r1, r2 ~ U[0, 1) per dimension (r1[0], r2[0], r1[1], ...).
Eigen::VectorXd update_velocity(const Particle &particle, const ParameterVector &global_best, Rng &rng);

/// x + v, repaired into the search box.
ParameterVector update_position(const ParameterVector &position, const Eigen::VectorXd &velocity);

/// Fitness to minimize. The seed is unique per (iteration, particle) so
/// stochastic fitnesses stay reproducible under parallel evaluation.
using Fitness = std::function<double(const ParameterVector &, std::uint64_t)>;

struct SwarmConfig
{
    int iterations = 50;
    int particles = 30;
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct IterationRecord
{
    int iteration = 0;
    double iteration_best = 0.0; ///< lowest fitness seen in this iteration
    double global_best = 0.0;    ///< lowest fitness seen so far
};

struct SwarmResult
{
    ParameterVector best;
    double best_fitness = std::numeric_limits<double>::infinity();
    std::vector<IterationRecord> trace;
};

/// Runs `config.iterations` rounds of evaluate-then-move. Best tracking uses
/// strict '<' in particle-index order, so ties keep the incumbent.
SwarmResult optimize(const Fitness &fitness, ParameterKind kind, const SwarmConfig &config);

} // namespace sigvar

#endif // SIGVAR_SWARM_HPP
