#include "sigvar/swarm.hpp"

#include "sigvar/error.hpp"
#include "sigvar/parallel.hpp"

#include <sstream>

namespace sigvar {

namespace {

void check_dimensions(const Particle &particle, const ParameterVector &global_best)
{
    const Eigen::Index dim = particle.position.size();
    if (particle.velocity.size() != dim || particle.personal_best.size() != dim || global_best.size() != dim)
        throw ConfigError("swarm: particle, velocity and global best dimensions disagree");
}

} // namespace

Swarm init_swarm(ParameterKind kind, int particle_count, std::uint64_t seed)
{
    if (particle_count < 2)
        throw ConfigError("swarm: at least 2 particles are required, got " + std::to_string(particle_count));

    const auto bounds = search_bounds(kind);
    const Eigen::Index dim = parameter_dimension(kind);
    Rng rng(derive_seed(seed, {0x1417}));

    Swarm swarm;
    swarm.seed = seed;
    swarm.particles.reserve(static_cast<std::size_t>(particle_count));
    for (int i = 0; i < particle_count; ++i) {
        Particle p;
        p.position.kind = kind;
        p.position.values.resize(dim);
        for (Eigen::Index d = 0; d < dim; d += 2) {
            const double low = rng.uniform(bounds.low[d], bounds.high[d]);
            p.position.values[d] = low;
            p.position.values[d + 1] = rng.uniform(low, bounds.high[d + 1]);
        }
        p.velocity = Eigen::VectorXd::Zero(dim);
        p.personal_best = p.position;
        swarm.particles.push_back(std::move(p));
    }
    swarm.global_best = swarm.particles.front().position;
    return swarm;
}

Eigen::VectorXd update_velocity(const Particle &particle, const ParameterVector &global_best,
                                const Eigen::VectorXd &r1, const Eigen::VectorXd &r2)
{
    check_dimensions(particle, global_best);
    if (r1.size() != particle.velocity.size() || r2.size() != particle.velocity.size())
        throw ConfigError("swarm: random factor dimension mismatch");
    const Eigen::VectorXd &x = particle.position.values;
    return swarm_inertia * particle.velocity
           + swarm_personal_gain * r1.cwiseProduct(particle.personal_best.values - x)
           + swarm_global_gain * r2.cwiseProduct(global_best.values - x);
}

Eigen::VectorXd update_velocity(const Particle &particle, const ParameterVector &global_best, Rng &rng)
{
    const Eigen::Index dim = particle.velocity.size();
    Eigen::VectorXd r1(dim), r2(dim);
    for (Eigen::Index d = 0; d < dim; ++d) {
        r1[d] = rng.uniform();
        r2[d] = rng.uniform();
    }
    return update_velocity(particle, global_best, r1, r2);
}

ParameterVector update_position(const ParameterVector &position, const Eigen::VectorXd &velocity)
{
    if (velocity.size() != position.size())
        throw ConfigError("swarm: velocity dimension mismatch");
    ParameterVector moved = position;
    moved.values += velocity;
    return repair(std::move(moved));
}

SwarmResult optimize(const Fitness &fitness, ParameterKind kind, const SwarmConfig &config)
{
    if (config.iterations < 1)
        throw ConfigError("swarm: iteration budget must be at least 1");

    Swarm swarm = init_swarm(kind, config.particles, config.seed);
    const std::size_t count = swarm.particles.size();
    std::vector<double> values(count);

    SwarmResult result;
    result.trace.reserve(static_cast<std::size_t>(config.iterations));

    for (int n = 0; n < config.iterations; ++n) {
        swarm.iteration = n;
        parallel_for(count, config.jobs, [&](std::size_t i) {
            const std::uint64_t eval_seed = derive_seed(config.seed, {0xF17, static_cast<std::uint64_t>(n), i});
            values[i] = fitness(swarm.particles[i].position, eval_seed);
        });

        double iteration_best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < count; ++i) {
            const double f = values[i];
            if (!std::isfinite(f)) {
                std::ostringstream msg;
                msg << "swarm: fitness of particle " << i << " at iteration " << n << " is not finite (" << f << ")";
                throw NumericalError(msg.str());
            }
            Particle &p = swarm.particles[i];
            if (f < p.personal_best_fitness) {
                p.personal_best_fitness = f;
                p.personal_best = p.position;
            }
            if (f < swarm.global_best_fitness) {
                swarm.global_best_fitness = f;
                swarm.global_best = p.position;
            }
            iteration_best = std::min(iteration_best, f);
        }
        result.trace.push_back({n, iteration_best, swarm.global_best_fitness});

        if (n + 1 == config.iterations)
            break;
        for (std::size_t i = 0; i < count; ++i) {
            Particle &p = swarm.particles[i];
            Rng rng(derive_seed(config.seed, {0x7E1, static_cast<std::uint64_t>(n), i}));
            p.velocity = update_velocity(p, swarm.global_best, rng);
            p.position = update_position(p.position, p.velocity);
        }
    }

    result.best = swarm.global_best;
    result.best_fitness = swarm.global_best_fitness;
    return result;
}

} // namespace sigvar
