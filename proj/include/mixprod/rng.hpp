#ifndef MIXPROD_RNG_HPP
#define MIXPROD_RNG_HPP

#include <cstdint>

namespace mixprod {

// SplitMix64: tiny counter-friendly generator. Every consumer in this library
// derives an independent substream from (seed, stream index), so results are
// identical for any worker count and any evaluation order.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static Rng substream(std::uint64_t seed, std::uint64_t index) {
        // Full avalanche on the seed, inject the index, avalanche again. Plain
        // state arithmetic is not enough here: streams must neither collide
        // for adjacent seeds nor overlap for adjacent indices.
        Rng s(seed);
        std::uint64_t h = s.next();
        s.state_ = h + index;
        return Rng(s.next());
    }

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n). Rejection keeps it exactly uniform.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        std::uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            std::uint64_t v = next();
            if (v >= threshold) return v % n;
        }
    }

  private:
    std::uint64_t state_;
};

}  // namespace mixprod

#endif
