#ifndef DEGCRAFT_RNG_HPP
#define DEGCRAFT_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>

namespace degcraft {

// splitmix64 finalizer (Vigna 2015). Used both for seeding the engine and
// for deriving independent sub-streams from a master seed.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stream derivation rule: stream(master, index) feeds (master, index) through
// two splitmix64 rounds. Parallel work units seeded this way are independent
// of scheduling order, so parallel and sequential runs agree bit for bit.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64_next(s);
    s = a ^ (index * 0x9e3779b97f4a7c15ULL + 0xbf58476d1ce4e5b9ULL);
    return splitmix64_next(s);
}

// xoshiro256++ with splitmix64 seeding. All distribution transforms are
// hand-rolled so sequences are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = splitmix64_next(s);
        has_cached_normal_ = false;
        cached_normal_ = 0.0;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n), multiply-shift reduction
    std::uint64_t uniform_int(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // standard normal via Box-Muller; the pair partner is cached
    double normal() {
        if (has_cached_normal_) {
            has_cached_normal_ = false;
            return cached_normal_;
        }
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        cached_normal_ = r * std::sin(theta);
        has_cached_normal_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

} // namespace degcraft

#endif
