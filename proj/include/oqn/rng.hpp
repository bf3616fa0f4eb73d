#pragma once

#include <cstdint>
#include <random>

#include "types.hpp"

namespace oqn {

// Seeded stream. Every randomized oracle call takes one draw index; (seed, draw index)
// replays it.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t draws() const { return draws_; }

    // Uniform direction on the unit sphere (normalized Gaussian).
    Vector unit_sphere(Index d) {
        ++draws_;
        std::normal_distribution<double> n01(0.0, 1.0);
        Vector v(d);
        for (;;) {
            for (Index i = 0; i < d; ++i) v[i] = n01(engine_);
            const double nv = v.norm();
            if (nv > 0.0) return v / nv;
        }
    }

    double uniform(double lo, double hi) {
        ++draws_;
        std::uniform_real_distribution<double> u(lo, hi);
        return u(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

    // Independent child seed for a parallel cell.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t seed_;
    std::uint64_t draws_ = 0;
    std::mt19937_64 engine_;
};

} // namespace oqn
