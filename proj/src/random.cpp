#include "sigvar/random.hpp"

#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sigvar {

std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> keys)
{
    std::uint64_t state = mix_seed(parent);
    for (std::uint64_t key : keys)
        state = mix_seed(state ^ mix_seed(key + 0x632be59bd9b4e019ULL));
    return state;
}

std::uint64_t hash_string(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

double Rng::normal()
{
    // 1 - u keeps the logarithm argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::below(std::size_t n)
{
    if (n == 0)
        throw std::invalid_argument("Rng::below: empty range");
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t word = engine_();
    while (word >= limit)
        word = engine_();
    return static_cast<std::size_t>(word % bound);
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k)
{
    if (k > n)
        throw std::invalid_argument("Rng::sample_without_replacement: k exceeds n");
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    // Partial Fisher-Yates: the first k slots hold the sample.
    for (std::size_t i = 0; i < k; ++i)
        std::swap(pool[i], pool[i + below(n - i)]);
    pool.resize(k);
    return pool;
}

} // namespace sigvar
