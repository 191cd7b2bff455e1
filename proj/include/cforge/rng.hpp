#ifndef CFORGE_RNG_HPP
#define CFORGE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace cforge {

// Counter-based generator: output k-th word of a stream keyed by a 64-bit
// seed.  splitmix64 applied to (seed, counter); identical on every platform,
// no hidden state beyond the counter, cheap to fork.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)))), counter_(0) {}

    std::uint64_t next_u64() {
        std::uint64_t z = key_ + 0x9e3779b97f4a7c15ULL * (++counter_);
        return mix(z);
    }

    // Uniform in [0,1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // in {lo, ..., hi} inclusive
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

    // Box-Muller; deterministic given the counter stream.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    // Independent child stream (for per-trial isolation in suites).
    Rng fork(std::uint64_t stream) const { return Rng(key_, stream + 1); }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t counter_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace cforge

#endif
