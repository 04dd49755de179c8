#ifndef FLEXSCHED_RNG_HPP
#define FLEXSCHED_RNG_HPP

#include <cmath>
#include <cstdint>
#include <vector>

namespace flexsched {

// Deterministic generator with hand-rolled distributions. Standard-library
// distributions are implementation-defined, which would break the
// byte-reproducibility contract of seeded runs; everything random in this
// project goes through this class.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    // splitmix64
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [lo, hi] inclusive.
    std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Marsaglia polar method; consumes a variable number of draws but is
    // fully determined by the seed.
    double next_normal(double mean, double std) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + std * spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_double() - 1.0;
            v = 2.0 * next_double() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double factor = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * factor;
        have_spare_ = true;
        return mean + std * u * factor;
    }

    double next_exponential(double rate) {
        // Inverse transform; 1 - u avoids log(0).
        return -std::log(1.0 - next_double()) / rate;
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(next_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Stable derivation of per-task seeds from a base seed and a stream index.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    Rng mixer(base ^ (0xd1b54a32d192ed03ULL * (stream + 1)));
    return mixer.next_u64();
}

}  // namespace flexsched

#endif
