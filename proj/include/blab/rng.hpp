#pragma once

#include <cstdint>
#include <random>

#include "blab/vec3.hpp"

namespace blab {

// Deterministic RNG: the distributions are hand-rolled so that a fixed seed
// yields the same stream on every standard library.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform01() { return double(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }
    std::uint64_t bits() { return eng_(); }

    Vec3 inBox(const Box3& b) {
        return {uniform(b.lo.x, b.hi.x), uniform(b.lo.y, b.hi.y), uniform(b.lo.z, b.hi.z)};
    }

    // Derive an independent stream for a grid row; stable under threading.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t row) {
        std::uint64_t h = seed ^ (row + 0x9e3779b97f4a7c15ULL);
        h ^= h >> 30; h *= 0xbf58476d1ce4e5b9ULL;
        h ^= h >> 27; h *= 0x94d049bb133111ebULL;
        h ^= h >> 31;
        return h;
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace blab
