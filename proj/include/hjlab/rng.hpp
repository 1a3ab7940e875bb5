#pragma once

#include <cmath>
#include <cstdint>

namespace hjlab {

// splitmix64 finalizer; the workhorse for all seeded hashing.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

constexpr std::uint64_t hash3(std::uint64_t a, std::int64_t i, std::int64_t j) {
    return hash_combine(hash_combine(a, static_cast<std::uint64_t>(i)),
                        static_cast<std::uint64_t>(j));
}

// 53-bit mantissa, uniform in [0,1).
constexpr double to_unit(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Counter-based stream: state advances via splitmix64, so two streams with
// distinct seeds never correlate. Enough for field generation; statistical
// quality is that of splitmix64.
class SplitMix {
  public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return to_unit(next()); }
    // Uniform over [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Knuth's product method; fine for the small intensities used here.
    int poisson(double lambda) {
        const double limit = std::exp(-lambda);
        double prod = 1.0;
        int k = -1;
        do {
            ++k;
            prod *= uniform();
        } while (prod > limit);
        return k;
    }

  private:
    std::uint64_t state_;
};

}  // namespace hjlab
