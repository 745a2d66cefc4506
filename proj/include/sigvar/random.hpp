#ifndef SIGVAR_RANDOM_HPP
#define SIGVAR_RANDOM_HPP

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace sigvar {

/// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Derives a child seed from a parent seed and a sequence of keys
/// (iteration, particle, writer, ...). Order of keys matters.
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> keys);

/// 64-bit FNV-1a, for keying streams by string identifiers.
std::uint64_t hash_string(std::string_view text);

/// Seeded random stream. Draws are built from raw engine words so the
/// sequence is identical across standard library implementations.
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [low, high); returns low when the interval is degenerate.
    double uniform(double low, double high) { return low + (high - low) * uniform(); }

    /// Standard normal via Box-Muller (one variate per call).
    double normal();

    /// Uniform integer in [0, n). n must be positive.
    std::size_t below(std::size_t n);

    template<class T>
    void shuffle(std::vector<T> &items)
    {
        for (std::size_t i = items.size(); i > 1; --i)
            std::swap(items[i - 1], items[below(i)]);
    }

    /// k distinct indices drawn uniformly from [0, n), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
};

} // namespace sigvar

#endif // SIGVAR_RANDOM_HPP
